//! Optimal migration schedules.
//!
//! [`IlpInstance`] is the binary program over `mu[n][t]` (node `n` migrated
//! by step `t`) and `pi[p][t]` (alternative path `p` usable at step `t`).
//! [`optimal_schedule`] maximizes the same objective by exact search over
//! chains of migrated sets `M_1 ⊆ ... ⊆ M_T = N`, so no external solver is
//! needed at desk scale.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::pathcat::{PathCatalog, PathId};
use crate::scheduler::{
    granted_by, greedy_schedule, tolerance, MigrationSchedule, Mode, Policy, PriorityMap,
    ScheduleConstraints, ScheduleError,
};
use crate::topology::NodeId;

/// Largest network the exact search accepts (dense `2^N` tables).
pub const MAX_EXACT_NODES: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExactError {
    #[error("exact search supports at most {max} nodes, network has {nodes}")]
    TooManyNodes { nodes: usize, max: usize },
    #[error("{nodes} nodes cannot be split into {steps} steps of ceil(N/T) nodes")]
    Infeasible { nodes: usize, steps: usize },
    #[error("node and step counts must both be positive")]
    EmptyInstance,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Right-hand side family of the per-step budget rows.
#[derive(Debug, Clone, PartialEq)]
pub enum IlpBudget {
    /// `sum_n mu[n][t] <= t * per_step`
    Count { per_step: usize },
    /// `sum_n c_n * mu[n][t] <= t * per_step`, with `per_step = C/T`
    Cost { costs: Vec<f64>, per_step: f64 },
}

/// An alternative path as seen by the program: `alpha_p = key_nodes.len()`
/// and `beta[n][p] = key_nodes.contains(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IlpPath {
    pub id: PathId,
    pub key_nodes: Vec<NodeId>,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpInstance {
    node_names: Vec<String>,
    steps: usize,
    paths: Vec<IlpPath>,
    budget: IlpBudget,
}

/// Variable values decoded from a schedule, indexed `[node][t-1]` and
/// `[path][t-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpAssignment {
    pub mu: Vec<Vec<bool>>,
    pub pi: Vec<Vec<bool>>,
}

pub fn build_ilp(
    catalog: &PathCatalog,
    constraints: &ScheduleConstraints,
    priorities: &PriorityMap,
) -> IlpInstance {
    let paths = catalog
        .alt_paths()
        .enumerate()
        .map(|(i, p)| IlpPath {
            id: PathId(i),
            key_nodes: p.key_nodes().to_vec(),
            priority: priorities.get(PathId(i)),
        })
        .collect();
    let budget = match constraints.mode() {
        Mode::Count { per_step } => IlpBudget::Count {
            per_step: *per_step,
        },
        Mode::Budget { costs } => IlpBudget::Cost {
            costs: costs.costs().to_vec(),
            per_step: costs.total() / constraints.steps() as f64,
        },
    };
    IlpInstance {
        node_names: catalog.node_names().to_vec(),
        steps: constraints.steps(),
        paths,
        budget,
    }
}

impl IlpInstance {
    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn paths(&self) -> &[IlpPath] {
        &self.paths
    }

    pub fn budget(&self) -> &IlpBudget {
        &self.budget
    }

    pub fn mu_count(&self) -> usize {
        self.node_count() * self.steps
    }

    pub fn pi_count(&self) -> usize {
        self.paths.len() * self.steps
    }

    pub fn availability_rows(&self) -> usize {
        self.paths.len() * self.steps
    }

    pub fn budget_rows(&self) -> usize {
        self.steps
    }

    pub fn monotone_rows(&self) -> usize {
        self.node_count() * (self.steps - 1)
    }

    pub fn constraint_count(&self) -> usize {
        self.availability_rows() + self.budget_rows() + self.monotone_rows()
    }

    /// The assignment a schedule induces, with every path switched on as
    /// soon as its key-nodes allow (the maximizing choice of `pi`).
    pub fn assignment(&self, schedule: &MigrationSchedule) -> IlpAssignment {
        let n = self.node_count();
        let mut mu = vec![vec![false; self.steps]; n];
        for (t, step) in schedule.steps().iter().enumerate() {
            for &node in step {
                for slot in &mut mu[node.0][t..] {
                    *slot = true;
                }
            }
        }
        let pi = self
            .paths
            .iter()
            .map(|p| {
                (0..self.steps)
                    .map(|t| p.key_nodes.iter().all(|k| mu[k.0][t]))
                    .collect()
            })
            .collect();
        IlpAssignment { mu, pi }
    }

    /// Checks every row of the three constraint families.
    pub fn is_feasible(&self, a: &IlpAssignment) -> bool {
        for t in 0..self.steps {
            for (p, path) in self.paths.iter().enumerate() {
                let lhs = usize::from(a.pi[p][t]) * path.key_nodes.len();
                let rhs = path.key_nodes.iter().filter(|k| a.mu[k.0][t]).count();
                if lhs > rhs {
                    return false;
                }
            }
            let step = (t + 1) as f64;
            let ok = match &self.budget {
                IlpBudget::Count { per_step } => {
                    a.mu.iter().filter(|m| m[t]).count() <= (t + 1) * per_step
                }
                IlpBudget::Cost { costs, per_step } => {
                    let spent: f64 = (0..self.node_count())
                        .filter(|&n| a.mu[n][t])
                        .map(|n| costs[n])
                        .sum();
                    let total = per_step * self.steps as f64;
                    spent <= step * per_step + tolerance(total)
                }
            };
            if !ok {
                return false;
            }
        }
        a.mu.iter().all(|m| m.windows(2).all(|w| !w[0] || w[1]))
    }

    pub fn objective(&self, a: &IlpAssignment) -> f64 {
        self.paths
            .iter()
            .zip(&a.pi)
            .map(|(p, on)| p.priority * on.iter().filter(|&&x| x).count() as f64)
            .sum()
    }
}

/// Effort cap for [`optimal_schedule`]: candidate migrated sets generated,
/// pruned ones included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimit {
    pub max_explored: u64,
}

impl Default for SearchLimit {
    fn default() -> Self {
        SearchLimit {
            max_explored: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalResult {
    pub schedule: MigrationSchedule,
    pub objective: f64,
    /// True when the search completed, so no feasible schedule scores higher.
    pub proved: bool,
    pub explored: u64,
}

/// Maximizes the cumulative objective over all complete schedules.
///
/// Count mode fixes step sizes to `per_step` (the last step takes the rest),
/// budget mode admits any chain whose cost by step `t` stays within
/// `t * C / T`. The search is a depth-first branch and bound over migrated
/// sets with memoized completions; a child is skipped once even making every
/// path available from the following step on could not beat the best
/// completion found so far. When `limit` runs out the best schedule seen
/// (never worse than greedy) is returned with `proved == false`.
pub fn optimal_schedule(
    catalog: &PathCatalog,
    constraints: &ScheduleConstraints,
    priorities: &PriorityMap,
    limit: SearchLimit,
) -> Result<OptimalResult, ExactError> {
    let n = catalog.node_count();
    if n > MAX_EXACT_NODES {
        return Err(ExactError::TooManyNodes {
            nodes: n,
            max: MAX_EXACT_NODES,
        });
    }
    constraints.check(n)?;
    let incumbent = greedy_schedule(catalog, constraints)?;
    let mut search = Search::new(catalog, constraints, priorities, limit);
    let greedy_value = search.chain_value(&masks_of(&incumbent));

    let mut best: Option<(f64, u64)> = None;
    let (root_children, mut aborted) = match search.children(0, 0) {
        Ok(c) => (c, false),
        Err(Abort) => (Vec::new(), true),
    };
    for child in root_children {
        let upper = search.value[child as usize] + search.optimistic_tail(2);
        if best.is_some_and(|(v, _)| upper <= v) {
            break;
        }
        match search.solve(1, child) {
            Ok(rest) => {
                let v = search.value[child as usize] + rest;
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, child));
                }
            }
            Err(Abort) => {
                aborted = true;
                break;
            }
        }
    }

    let (objective, schedule) = match best {
        Some((v, first)) if !aborted || v > greedy_value => {
            let chain = search.reconstruct(first);
            let steps = steps_of(&chain);
            (
                v,
                MigrationSchedule::new(steps, Policy::Optimal, None, constraints),
            )
        }
        _ => {
            let steps = incumbent.steps().to_vec();
            (
                greedy_value,
                MigrationSchedule::new(steps, Policy::Optimal, None, constraints),
            )
        }
    };
    schedule.validate(n)?;
    Ok(OptimalResult {
        schedule,
        objective,
        proved: !aborted,
        explored: search.explored,
    })
}

struct Abort;

struct Search {
    steps: usize,
    full: u64,
    /// `value[M]`: summed priority of paths whose key-nodes lie in `M`
    value: Vec<f64>,
    /// `cost[M]` in budget mode
    cost: Option<Vec<f64>>,
    total_cost: f64,
    per_step: usize,
    priority_total: f64,
    memo: BTreeMap<(usize, u64), (f64, u64)>,
    explored: u64,
    limit: u64,
}

impl Search {
    fn new(
        catalog: &PathCatalog,
        constraints: &ScheduleConstraints,
        priorities: &PriorityMap,
        limit: SearchLimit,
    ) -> Self {
        let n = catalog.node_count();
        let size = 1usize << n;
        let mut value = vec![0.0; size];
        for (i, p) in catalog.alt_paths().enumerate() {
            let mask = p.key_nodes().iter().fold(0usize, |m, k| m | 1 << k.0);
            value[mask] += priorities.get(PathId(i));
        }
        superset_sums(&mut value, n);
        let (cost, total_cost, per_step) = match constraints.mode() {
            Mode::Count { per_step } => (None, 0.0, *per_step),
            Mode::Budget { costs } => {
                let mut table = vec![0.0; size];
                for mask in 1..size {
                    let low = mask.trailing_zeros() as usize;
                    table[mask] = table[mask & (mask - 1)] + costs.cost(NodeId(low));
                }
                (Some(table), costs.total(), 0)
            }
        };
        Search {
            steps: constraints.steps(),
            full: (size - 1) as u64,
            value,
            cost,
            total_cost,
            per_step,
            priority_total: priorities.total(),
            memo: BTreeMap::new(),
            explored: 0,
            limit: limit.max_explored,
        }
    }

    /// Upper bound on the value of steps `t..=T`.
    fn optimistic_tail(&self, t: usize) -> f64 {
        (self.steps + 1 - t) as f64 * self.priority_total
    }

    /// Feasible sets `M_{t+1}` after `M_t = migrated`, best value first.
    /// Every generated set counts toward the effort limit.
    fn children(&mut self, t: usize, migrated: u64) -> Result<Vec<u64>, Abort> {
        let rest = self.full & !migrated;
        let next = t + 1;
        let mut out = Vec::new();
        if next == self.steps {
            out.push(self.full);
            return self.charge(out);
        }
        match &self.cost {
            None => {
                let take = self.per_step.min(rest.count_ones() as usize);
                for_each_k_subset(rest, take, |s| out.push(migrated | s));
            }
            Some(cost) => {
                let cap =
                    granted_by(self.total_cost, next, self.steps) + tolerance(self.total_cost);
                let mut s = rest;
                loop {
                    let m = migrated | s;
                    if cost[m as usize] <= cap {
                        out.push(m);
                    }
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & rest;
                }
            }
        }
        out.sort_by(|&a, &b| {
            self.value[b as usize]
                .total_cmp(&self.value[a as usize])
                .then(a.cmp(&b))
        });
        self.charge(out)
    }

    fn charge(&mut self, generated: Vec<u64>) -> Result<Vec<u64>, Abort> {
        self.explored += generated.len() as u64;
        if self.explored > self.limit {
            return Err(Abort);
        }
        Ok(generated)
    }

    /// Best value of steps `t+1..=T` given `M_t = migrated`.
    fn solve(&mut self, t: usize, migrated: u64) -> Result<f64, Abort> {
        if t == self.steps {
            return Ok(0.0);
        }
        if let Some(&(v, _)) = self.memo.get(&(t, migrated)) {
            return Ok(v);
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = self.full;
        for child in self.children(t, migrated)? {
            let here = self.value[child as usize];
            if here + self.optimistic_tail(t + 2) <= best {
                break;
            }
            let v = here + self.solve(t + 1, child)?;
            if v > best {
                best = v;
                arg = child;
            }
        }
        self.memo.insert((t, migrated), (best, arg));
        Ok(best)
    }

    fn reconstruct(&self, first: u64) -> Vec<u64> {
        let mut chain = vec![first];
        let mut cur = first;
        for t in 1..self.steps {
            let (_, next) = self.memo[&(t, cur)];
            chain.push(next);
            cur = next;
        }
        chain
    }

    fn chain_value(&self, chain: &[u64]) -> f64 {
        chain.iter().map(|&m| self.value[m as usize]).sum()
    }
}

/// In-place sum over subsets: `table[M] = sum of table[S] for S ⊆ M`.
fn superset_sums(table: &mut [f64], bits: usize) {
    for b in 0..bits {
        let bit = 1usize << b;
        for mask in 0..table.len() {
            if mask & bit != 0 {
                table[mask] += table[mask ^ bit];
            }
        }
    }
}

fn for_each_k_subset(set: u64, k: usize, mut f: impl FnMut(u64)) {
    let bits: Vec<u64> = (0..64)
        .filter(|b| set >> b & 1 == 1)
        .map(|b| 1u64 << b)
        .collect();
    if k > bits.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(idx.iter().fold(0, |m, &i| m | bits[i]));
        let Some(i) = (0..k).rev().find(|&i| idx[i] < bits.len() - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn masks_of(schedule: &MigrationSchedule) -> Vec<u64> {
    let mut acc = 0u64;
    schedule
        .steps()
        .iter()
        .map(|step| {
            acc |= step.iter().fold(0u64, |m, n| m | 1 << n.0);
            acc
        })
        .collect()
}

fn steps_of(chain: &[u64]) -> Vec<Vec<NodeId>> {
    let mut prev = 0u64;
    chain
        .iter()
        .map(|&m| {
            let fresh = m & !prev;
            prev = m;
            (0..64)
                .filter(|b| fresh >> b & 1 == 1)
                .map(NodeId)
                .collect()
        })
        .collect()
}

/// Number of ways to split `nodes` into `steps` ordered groups of
/// `ceil(N/T)` nodes, the last group taking the remainder:
/// `prod_{i<T} C(z_i, ceil(N/T))` with `z_i` the nodes left before step `i`.
pub fn search_space_size(nodes: usize, steps: usize) -> Result<BigUint, ExactError> {
    if nodes == 0 || steps == 0 {
        return Err(ExactError::EmptyInstance);
    }
    let per_step = nodes.div_ceil(steps);
    if (steps - 1) * per_step > nodes {
        return Err(ExactError::Infeasible { nodes, steps });
    }
    let mut total = BigUint::from(1u32);
    let mut left = nodes;
    for _ in 1..steps {
        total *= binomial(left, per_step);
        left -= per_step;
    }
    Ok(total)
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::pathcat::{build_catalog, DEFAULT_PATH_CAP};
    use crate::scheduler::cumulative_objective;
    use crate::topology::{migration_costs, Topology, WeightedTopology};

    #[test]
    fn fig2_counts() {
        let cat = build_catalog(&fixtures::fig2(), DEFAULT_PATH_CAP);
        let pri = PriorityMap::uniform(&cat);
        let ilp = build_ilp(&cat, &ScheduleConstraints::count(7, 2).unwrap(), &pri);
        assert_eq!(ilp.mu_count(), 14);
        assert_eq!(ilp.pi_count(), 14);
        assert_eq!(ilp.availability_rows(), 14);
        assert_eq!(ilp.budget_rows(), 2);
        assert_eq!(ilp.monotone_rows(), 7);
        assert_eq!(ilp.constraint_count(), 23);
        let single = build_ilp(&cat, &ScheduleConstraints::count(7, 1).unwrap(), &pri);
        assert_eq!(single.monotone_rows(), 0);
    }

    #[test]
    fn empty_alternatives() {
        let tri =
            Topology::from_names(["x", "y", "z"], [("x", "y"), ("y", "z"), ("x", "z")]).unwrap();
        let tri = WeightedTopology::new(tri, vec![1.0, 1.1, 1.2]).unwrap();
        let cat = build_catalog(&tri, 10);
        let cons = ScheduleConstraints::count(3, 2).unwrap();
        let pri = PriorityMap::uniform(&cat);
        let ilp = build_ilp(&cat, &cons, &pri);
        assert_eq!(ilp.pi_count(), 0);
        let res = optimal_schedule(&cat, &cons, &pri, SearchLimit::default()).unwrap();
        assert_eq!(res.objective, 0.0);
        assert!(res.proved);
    }

    #[test]
    fn fig2_optimal_count() {
        let cat = build_catalog(&fixtures::fig2(), DEFAULT_PATH_CAP);
        let pri = PriorityMap::uniform(&cat);
        let cons = ScheduleConstraints::count_with(2, 4).unwrap();
        let res = optimal_schedule(&cat, &cons, &pri, SearchLimit::default()).unwrap();
        assert!(res.proved);
        assert_eq!(res.objective, 13.0);
        assert_eq!(cumulative_objective(&cat, &res.schedule, &pri), 13.0);
        assert_eq!(res.schedule.policy(), Policy::Optimal);

        let one = ScheduleConstraints::count(7, 1).unwrap();
        let res = optimal_schedule(&cat, &one, &pri, SearchLimit::default()).unwrap();
        assert_eq!(res.objective, 7.0);
    }

    #[test]
    fn exhausted_search_falls_back() {
        let cat = build_catalog(&fixtures::fig2(), DEFAULT_PATH_CAP);
        let pri = PriorityMap::uniform(&cat);
        let costs = migration_costs(&Topology::clone(fixtures::fig2().topology()), 1.0).unwrap();
        let cons = ScheduleConstraints::budget(3, costs).unwrap();
        let res = optimal_schedule(&cat, &cons, &pri, SearchLimit { max_explored: 1 }).unwrap();
        assert!(!res.proved);
        assert!(res.objective >= 18.0);
        assert_eq!(
            cumulative_objective(&cat, &res.schedule, &pri),
            res.objective
        );
    }

    #[test]
    fn assignment_round_trip() {
        let w = fixtures::fig2();
        let cat = build_catalog(&w, DEFAULT_PATH_CAP);
        let pri = PriorityMap::uniform(&cat);
        let costs = migration_costs(w.topology(), 1.0).unwrap();
        let cons = ScheduleConstraints::budget(3, costs).unwrap();
        let ilp = build_ilp(&cat, &cons, &pri);
        let sched = greedy_schedule(&cat, &cons).unwrap();
        let a = ilp.assignment(&sched);
        assert!(ilp.is_feasible(&a));
        assert_eq!(ilp.objective(&a), cumulative_objective(&cat, &sched, &pri));

        let mut broken = a.clone();
        broken.mu[0][0] = true;
        broken.mu[0][1] = false;
        assert!(!ilp.is_feasible(&broken));
    }

    #[test]
    fn space_sizes() {
        assert_eq!(search_space_size(5, 2).unwrap(), BigUint::from(10u32));
        assert_eq!(search_space_size(7, 2).unwrap(), BigUint::from(35u32));
        assert_eq!(search_space_size(9, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(
            search_space_size(5, 4).unwrap_err(),
            ExactError::Infeasible { nodes: 5, steps: 4 }
        );
        // 65 nodes in 10 steps overflows u128
        assert!(search_space_size(65, 10).unwrap().bits() > 128);
    }

    #[test]
    fn k_subsets() {
        let mut seen = Vec::new();
        for_each_k_subset(0b10110, 2, |s| seen.push(s));
        assert_eq!(seen, [0b00110, 0b10010, 0b10100]);
        let mut empty = Vec::new();
        for_each_k_subset(0b1, 0, |s| empty.push(s));
        assert_eq!(empty, [0]);
    }
}
