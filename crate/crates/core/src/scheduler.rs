//! Step-wise migration schedules: greedy, random, and their scoring.
//!
//! The greedy driver recomputes, at the start of every step, the number of
//! extra alternative paths each unmigrated node would unlock, then picks
//! nodes either by raw gain under a node-count limit or by gain per unit cost
//! under a CapEx budget that carries unused allowance forward.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::seq::SliceRandom;

use crate::pathcat::{AvailabilityTracker, MigratedSet, PathCatalog, PathId};
use crate::rng;
use crate::topology::{CostModel, NodeId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("number of time-steps must be at least 1")]
    NoSteps,
    #[error("nodes per step must be at least 1")]
    NoCapacity,
    #[error("{per_step} nodes per step over {steps} steps cannot place {nodes} nodes")]
    Infeasible {
        nodes: usize,
        steps: usize,
        per_step: usize,
    },
    #[error("cost model covers {costs} nodes but the network has {nodes}")]
    CostModelMismatch { costs: usize, nodes: usize },
    #[error("schedule places node {0} more than once")]
    RepeatedNode(NodeId),
    #[error("schedule never places node {0}")]
    MissingNode(NodeId),
    #[error("schedule references node {0} outside the network")]
    UnknownNode(NodeId),
    #[error("schedule has {got} steps, expected {expected}")]
    StepCount { expected: usize, got: usize },
    #[error("priority {0} is not a positive finite number")]
    BadPriority(f64),
    #[error("priority map covers {got} paths, catalog has {expected}")]
    PriorityCount { expected: usize, got: usize },
}

/// How many nodes may migrate per step.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// At most `per_step` nodes per step.
    Count { per_step: usize },
    /// CapEx allowance `C/T` per step, unspent allowance carried forward.
    Budget { costs: CostModel },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConstraints {
    steps: usize,
    mode: Mode,
}

impl ScheduleConstraints {
    /// Count mode with the default `ceil(N/T)` nodes per step.
    pub fn count(node_count: usize, steps: usize) -> Result<Self, ScheduleError> {
        if steps == 0 {
            return Err(ScheduleError::NoSteps);
        }
        Self::count_with(steps, node_count.div_ceil(steps).max(1))
    }

    pub fn count_with(steps: usize, per_step: usize) -> Result<Self, ScheduleError> {
        if steps == 0 {
            return Err(ScheduleError::NoSteps);
        }
        if per_step == 0 {
            return Err(ScheduleError::NoCapacity);
        }
        Ok(ScheduleConstraints {
            steps,
            mode: Mode::Count { per_step },
        })
    }

    pub fn budget(steps: usize, costs: CostModel) -> Result<Self, ScheduleError> {
        if steps == 0 {
            return Err(ScheduleError::NoSteps);
        }
        Ok(ScheduleConstraints {
            steps,
            mode: Mode::Budget { costs },
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    /// `C/T` in budget mode.
    pub fn per_step_budget(&self) -> Option<f64> {
        match &self.mode {
            Mode::Budget { costs } => Some(costs.total() / self.steps as f64),
            Mode::Count { .. } => None,
        }
    }

    pub fn check(&self, node_count: usize) -> Result<(), ScheduleError> {
        match &self.mode {
            Mode::Count { per_step } if per_step * self.steps < node_count => {
                Err(ScheduleError::Infeasible {
                    nodes: node_count,
                    steps: self.steps,
                    per_step: *per_step,
                })
            }
            Mode::Budget { costs } if costs.node_count() != node_count => {
                Err(ScheduleError::CostModelMismatch {
                    costs: costs.node_count(),
                    nodes: node_count,
                })
            }
            _ => Ok(()),
        }
    }
}

/// CapEx bookkeeping: by the end of step `t` at most `t * C / T` is spent.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    total: f64,
    steps: usize,
    step: usize,
    granted: f64,
    spent: f64,
}

impl BudgetLedger {
    /// A ledger before its first step.
    pub fn new(total: f64, steps: usize) -> Self {
        BudgetLedger {
            total,
            steps,
            step: 0,
            granted: 0.0,
            spent: 0.0,
        }
    }

    /// A single open step with `available` to spend.
    pub fn with_available(available: f64) -> Self {
        let mut ledger = Self::new(available, 1);
        ledger.open_step();
        ledger
    }

    /// Moves to the next step and releases its allowance. The final step
    /// releases exactly the remainder of `C`.
    pub fn open_step(&mut self) {
        self.step += 1;
        self.granted = granted_by(self.total, self.step, self.steps);
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// `C_t`: the step's allowance plus every earlier residual.
    pub fn available(&self) -> f64 {
        (self.granted - self.spent).max(0.0)
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn granted(&self) -> f64 {
        self.granted
    }

    pub fn can_afford(&self, cost: f64) -> bool {
        self.spent + cost <= self.granted + tolerance(self.total)
    }

    pub fn spend(&mut self, cost: f64) {
        self.spent += cost;
    }
}

/// Cumulative allowance after `step` of `steps`.
pub(crate) fn granted_by(total: f64, step: usize, steps: usize) -> f64 {
    if step >= steps {
        total
    } else {
        total * step as f64 / steps as f64
    }
}

/// Absorbs summation-order rounding so the last step always fits the rest.
pub(crate) fn tolerance(total: f64) -> f64 {
    1e-9 * total.abs().max(1.0)
}

/// `P(u)`: extra alternative paths unlocked by migrating `u`.
pub type GainVector = Vec<(NodeId, usize)>;

/// The `m` highest-gain nodes; ties go to the lower node id.
pub fn select_by_count(gains: &[(NodeId, usize)], m: usize) -> Vec<NodeId> {
    let mut order = gains.to_vec();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    order.into_iter().take(m).map(|(n, _)| n).collect()
}

/// Walks candidates by descending gain per unit cost, migrating each one the
/// ledger can afford and stopping at the first it cannot.
///
/// Ratio ties prefer the cheaper node, then the lower id.
pub fn select_by_budget(
    gains: &[(NodeId, usize)],
    costs: &CostModel,
    ledger: &mut BudgetLedger,
) -> Vec<NodeId> {
    let mut order = gains.to_vec();
    order.sort_by(|&(a, pa), &(b, pb)| {
        let (ca, cb) = (costs.cost(a), costs.cost(b));
        // pa/ca vs pb/cb, costs are positive
        (pb as f64 * ca)
            .partial_cmp(&(pa as f64 * cb))
            .unwrap_or(Ordering::Equal)
            .then(ca.total_cmp(&cb))
            .then(a.cmp(&b))
    });
    let mut chosen = Vec::new();
    for (node, _) in order {
        let cost = costs.cost(node);
        if !ledger.can_afford(cost) {
            break;
        }
        ledger.spend(cost);
        chosen.push(node);
    }
    chosen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Greedy,
    Random,
    Optimal,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Greedy => "greedy",
            Policy::Random => "random",
            Policy::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Budget-mode spending of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpend {
    pub spent: f64,
    /// Allowance left unspent, carried into the next step.
    pub residual: f64,
}

/// Ordered partition of the nodes into `T` migration steps.
#[derive(Debug, Clone, PartialEq)]
pub struct MigrationSchedule {
    steps: Vec<Vec<NodeId>>,
    policy: Policy,
    seed: Option<u64>,
    spend: Option<Vec<StepSpend>>,
}

impl MigrationSchedule {
    /// Wraps steps and, in budget mode, fills in per-step spending.
    pub fn new(
        steps: Vec<Vec<NodeId>>,
        policy: Policy,
        seed: Option<u64>,
        constraints: &ScheduleConstraints,
    ) -> Self {
        let spend = match constraints.mode() {
            Mode::Count { .. } => None,
            Mode::Budget { costs } => {
                let mut ledger = BudgetLedger::new(costs.total(), constraints.steps());
                let per_step = steps
                    .iter()
                    .map(|step| {
                        ledger.open_step();
                        let spent: f64 = step.iter().map(|&n| costs.cost(n)).sum();
                        ledger.spend(spent);
                        StepSpend {
                            spent,
                            residual: ledger.available(),
                        }
                    })
                    .collect();
                Some(per_step)
            }
        };
        MigrationSchedule {
            steps,
            policy,
            seed,
            spend,
        }
    }

    pub fn steps(&self) -> &[Vec<NodeId>] {
        &self.steps
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn spend(&self) -> Option<&[StepSpend]> {
        self.spend.as_deref()
    }

    /// Nodes migrated by the end of step `t` (1-based; 0 is the empty set).
    pub fn migrated_by(&self, t: usize, node_count: usize) -> MigratedSet {
        MigratedSet::from_nodes(node_count, self.steps[..t].iter().flatten().copied())
    }

    /// Checks that steps are disjoint and cover every node exactly once.
    pub fn validate(&self, node_count: usize) -> Result<(), ScheduleError> {
        let mut seen = vec![false; node_count];
        for &n in self.steps.iter().flatten() {
            let slot = seen.get_mut(n.0).ok_or(ScheduleError::UnknownNode(n))?;
            if core::mem::replace(slot, true) {
                return Err(ScheduleError::RepeatedNode(n));
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(ScheduleError::MissingNode(NodeId(i))),
            None => Ok(()),
        }
    }
}

/// Path priorities `phi_p`, one per alternative path.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityMap {
    weights: Vec<f64>,
}

impl PriorityMap {
    pub fn uniform(catalog: &PathCatalog) -> Self {
        PriorityMap {
            weights: vec![1.0; catalog.alt_count()],
        }
    }

    pub fn from_weights(catalog: &PathCatalog, weights: Vec<f64>) -> Result<Self, ScheduleError> {
        if weights.len() != catalog.alt_count() {
            return Err(ScheduleError::PriorityCount {
                expected: catalog.alt_count(),
                got: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(ScheduleError::BadPriority(w));
        }
        Ok(PriorityMap { weights })
    }

    pub fn get(&self, path: PathId) -> f64 {
        self.weights[path.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Greedy schedule: gains are computed once per step against the nodes
/// migrated before it, then count- or budget-based selection picks the step.
pub fn greedy_schedule(
    catalog: &PathCatalog,
    constraints: &ScheduleConstraints,
) -> Result<MigrationSchedule, ScheduleError> {
    let n = catalog.node_count();
    constraints.check(n)?;
    let mut tracker = AvailabilityTracker::new(catalog);
    let mut ledger = constraints
        .per_step_budget()
        .map(|_| BudgetLedger::new(total_cost(constraints), constraints.steps()));
    let mut steps = Vec::with_capacity(constraints.steps());
    for _ in 0..constraints.steps() {
        let gains: GainVector = (0..n)
            .map(NodeId)
            .filter(|&u| !tracker.migrated().contains(u))
            .map(|u| (u, tracker.gain(u)))
            .collect();
        let chosen = match (constraints.mode(), ledger.as_mut()) {
            (Mode::Count { per_step }, _) => select_by_count(&gains, *per_step),
            (Mode::Budget { costs }, Some(ledger)) => {
                ledger.open_step();
                select_by_budget(&gains, costs, ledger)
            }
            (Mode::Budget { .. }, None) => unreachable!("budget mode always has a ledger"),
        };
        for &u in &chosen {
            tracker.migrate(u);
        }
        steps.push(chosen);
    }
    let schedule = MigrationSchedule::new(steps, Policy::Greedy, None, constraints);
    schedule.validate(n)?;
    Ok(schedule)
}

fn total_cost(constraints: &ScheduleConstraints) -> f64 {
    match constraints.mode() {
        Mode::Budget { costs } => costs.total(),
        Mode::Count { .. } => 0.0,
    }
}

/// Random baseline: a seeded shuffle packed into steps under the same count
/// or budget rule as the greedy schedule.
pub fn random_schedule(
    node_count: usize,
    constraints: &ScheduleConstraints,
    seed: u64,
) -> Result<MigrationSchedule, ScheduleError> {
    constraints.check(node_count)?;
    let mut order: Vec<NodeId> = (0..node_count).map(NodeId).collect();
    order.shuffle(&mut rng::seeded(seed));
    let mut steps = Vec::with_capacity(constraints.steps());
    let mut next = 0;
    match constraints.mode() {
        Mode::Count { per_step } => {
            for _ in 0..constraints.steps() {
                let end = (next + per_step).min(node_count);
                steps.push(order[next..end].to_vec());
                next = end;
            }
        }
        Mode::Budget { costs } => {
            let mut ledger = BudgetLedger::new(costs.total(), constraints.steps());
            for _ in 0..constraints.steps() {
                ledger.open_step();
                let start = next;
                while next < node_count && ledger.can_afford(costs.cost(order[next])) {
                    ledger.spend(costs.cost(order[next]));
                    next += 1;
                }
                steps.push(order[start..next].to_vec());
            }
        }
    }
    let schedule = MigrationSchedule::new(steps, Policy::Random, Some(seed), constraints);
    schedule.validate(node_count)?;
    Ok(schedule)
}

/// Alternative paths available after each step `t = 1..T`.
pub fn availability_curve(catalog: &PathCatalog, schedule: &MigrationSchedule) -> Vec<usize> {
    let mut tracker = AvailabilityTracker::new(catalog);
    schedule
        .steps()
        .iter()
        .map(|step| {
            for &u in step {
                tracker.migrate(u);
            }
            tracker.available()
        })
        .collect()
}

/// `sum_t sum_p pi_t^p * phi_p`: priority of every available path, summed
/// over all steps.
pub fn cumulative_objective(
    catalog: &PathCatalog,
    schedule: &MigrationSchedule,
    priorities: &PriorityMap,
) -> f64 {
    let n = catalog.node_count();
    (1..=schedule.horizon())
        .map(|t| {
            let migrated = schedule.migrated_by(t, n);
            catalog
                .available_alt_paths(&migrated)
                .into_iter()
                .map(|id| priorities.get(id))
                .sum::<f64>()
        })
        .sum()
}
