//! Hybrid OSPF/SDN traffic-engineering simulation.
//!
//! Every period the traffic grows, traffic engineering reassigns flows once
//! over the alternative paths the migrated nodes have unlocked, and both the
//! OSPF-only and the engineered link loads are provisioned from a fixed set
//! of module sizes under a utilization headroom. The gap between the two
//! provisioned totals is the capacity saving.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::pathcat::{AltPath, PathCatalog, PathId};
use crate::rng;
use crate::scheduler::{availability_curve, MigrationSchedule};
use crate::topology::{NodeId, Topology, WeightedTopology};

/// Mbit/s per Gbit/s.
const MBPS_PER_GBPS: f64 = 1000.0;

/// Loads at or below this many Mbit/s count as idle; absorbs the rounding
/// residue left when flows are moved on and off a link.
pub const IDLE_LOAD_MBPS: f64 = 1e-6;

/// Upper end of the uniform per-flow demand draw, Mbit/s.
pub const MAX_DEMAND_MBPS: f64 = 400.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("headroom {0} must lie in (0, 1]")]
    BadHeadroom(f64),
    #[error("granularities must be positive and strictly ascending")]
    BadGranularities,
    #[error("growth interval [{0}, {1}] is not a valid positive range")]
    BadGrowth(f64, f64),
    #[error("negative load {load} on link {link}")]
    NegativeLoad { link: usize, load: f64 },
    #[error("{combinations} assignment combinations exceed the limit of {limit}")]
    TooManyCombinations { combinations: u128, limit: u128 },
    #[error("traffic matrix covers {got} nodes, catalog has {expected}")]
    NodeCountMismatch { expected: usize, got: usize },
    #[error("path {0:?} is not an alternative path of the catalog")]
    UnknownPath(PathId),
}

/// Simulation knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Maximum link utilization.
    pub headroom: f64,
    /// Link module sizes in Gbit/s, ascending.
    pub granularities_gbps: Vec<f64>,
    /// Per-step growth factor interval.
    pub growth: (f64, f64),
    /// Local-search sweep cap.
    pub sweeps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            headroom: 0.7,
            granularities_gbps: vec![1.0, 5.0, 10.0, 40.0, 100.0, 400.0, 1000.0],
            growth: (1.05, 1.3),
            sweeps: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.headroom > 0.0 && self.headroom <= 1.0) {
            return Err(SimError::BadHeadroom(self.headroom));
        }
        let g = &self.granularities_gbps;
        if g.is_empty()
            || !g.iter().all(|x| x.is_finite() && *x > 0.0)
            || g.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(SimError::BadGranularities);
        }
        let (lo, hi) = self.growth;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
            return Err(SimError::BadGrowth(lo, hi));
        }
        Ok(())
    }

    /// Module choice for one link load (Mbit/s): the smallest size that keeps
    /// utilization under the headroom, else enough of the largest size.
    pub fn module_for(&self, load_mbps: f64) -> Option<(f64, u64)> {
        if load_mbps <= IDLE_LOAD_MBPS {
            return None;
        }
        let usable = |g: f64| self.headroom * g * MBPS_PER_GBPS;
        if let Some(&g) = self
            .granularities_gbps
            .iter()
            .find(|&&g| load_mbps <= usable(g))
        {
            return Some((g, 1));
        }
        let largest = self.granularities_gbps[self.granularities_gbps.len() - 1];
        let per_module = usable(largest);
        let mut count = (load_mbps / per_module) as u64;
        while (count as f64) * per_module < load_mbps {
            count += 1;
        }
        Some((largest, count))
    }

    /// Provisioned Gbit/s for one link load.
    pub fn capacity_for(&self, load_mbps: f64) -> f64 {
        self.module_for(load_mbps)
            .map_or(0.0, |(size, count)| size * count as f64)
    }
}

/// Demand per ordered pair of distinct nodes, Mbit/s.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    node_count: usize,
    // row-major, diagonal unused and zero
    demand: Vec<f64>,
}

impl TrafficMatrix {
    pub fn zeros(node_count: usize) -> Self {
        TrafficMatrix {
            node_count,
            demand: vec![0.0; node_count * node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn get(&self, src: NodeId, dst: NodeId) -> f64 {
        self.demand[src.0 * self.node_count + dst.0]
    }

    /// Sets a demand; negative values are clamped to zero, the diagonal is
    /// ignored.
    pub fn set(&mut self, src: NodeId, dst: NodeId, mbps: f64) {
        if src != dst {
            self.demand[src.0 * self.node_count + dst.0] = mbps.max(0.0);
        }
    }

    /// All ordered pairs `(src, dst, demand)`, row-major.
    pub fn flows(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let n = self.node_count;
        (0..n).flat_map(move |i| {
            (0..n)
                .filter(move |&j| j != i)
                .map(move |j| (NodeId(i), NodeId(j), self.demand[i * n + j]))
        })
    }

    pub fn total(&self) -> f64 {
        self.demand.iter().sum()
    }
}

/// I.i.d. uniform `[0, 400]` Mbit/s demand for every ordered pair.
pub fn generate_traffic(topology: &Topology, seed: u64) -> TrafficMatrix {
    let n = topology.node_count();
    let mut rng = rng::seeded(seed);
    let mut tm = TrafficMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                tm.demand[i * n + j] = rng.random_range(0.0..=MAX_DEMAND_MBPS);
            }
        }
    }
    tm
}

/// Scales every demand by its own uniform draw from `cfg.growth`.
pub fn grow_traffic(tm: &TrafficMatrix, cfg: &SimConfig, seed: u64) -> TrafficMatrix {
    let (lo, hi) = cfg.growth;
    let mut rng = rng::seeded(seed);
    let n = tm.node_count;
    let mut out = tm.clone();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.demand[i * n + j] *= rng.random_range(lo..=hi);
            }
        }
    }
    out
}

/// Which path each flow uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Route {
    LeastCost,
    Alt(PathId),
}

/// One route per ordered pair, in [`TrafficMatrix::flows`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    node_count: usize,
    routes: Vec<Route>,
}

impl FlowAssignment {
    /// Every flow on its pair's least-cost path.
    pub fn ospf(node_count: usize) -> Self {
        FlowAssignment {
            node_count,
            routes: vec![Route::LeastCost; node_count * node_count.saturating_sub(1)],
        }
    }

    fn slot(&self, src: NodeId, dst: NodeId) -> usize {
        let n = self.node_count;
        src.0 * (n - 1) + if dst.0 > src.0 { dst.0 - 1 } else { dst.0 }
    }

    pub fn route(&self, src: NodeId, dst: NodeId) -> &Route {
        &self.routes[self.slot(src, dst)]
    }

    pub fn set_route(&mut self, src: NodeId, dst: NodeId, route: Route) {
        let slot = self.slot(src, dst);
        self.routes[slot] = route;
    }

    /// Flows moved off their least-cost path.
    pub fn rerouted(&self) -> usize {
        self.routes
            .iter()
            .filter(|r| **r != Route::LeastCost)
            .count()
    }

    pub fn path<'c>(&self, catalog: &'c PathCatalog, src: NodeId, dst: NodeId) -> &'c AltPath {
        resolve(catalog, src, dst, self.route(src, dst))
    }
}

fn resolve<'c>(catalog: &'c PathCatalog, src: NodeId, dst: NodeId, route: &Route) -> &'c AltPath {
    match route {
        Route::LeastCost => catalog
            .pair(src, dst)
            .expect("distinct nodes of the catalog")
            .least_cost(),
        Route::Alt(id) => catalog.alt_path(*id),
    }
}

/// Undirected link loads (Mbit/s) of an assignment.
pub fn link_loads(
    catalog: &PathCatalog,
    tm: &TrafficMatrix,
    assignment: &FlowAssignment,
) -> Vec<f64> {
    let mut loads = vec![0.0; catalog.link_count()];
    for (src, dst, d) in tm.flows() {
        if d > 0.0 {
            for link in assignment.path(catalog, src, dst).links() {
                loads[link.0] += d;
            }
        }
    }
    loads
}

/// Loads when every flow follows its least-cost path.
pub fn route_ospf(catalog: &PathCatalog, tm: &TrafficMatrix) -> Vec<f64> {
    link_loads(catalog, tm, &FlowAssignment::ospf(tm.node_count()))
}

/// Modules installed on each link.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvisioningPlan {
    /// `(module size Gbit/s, module count)` per link; `None` when unloaded.
    pub modules: Vec<Option<(f64, u64)>>,
    pub total_capacity_gbps: f64,
}

pub fn provision(loads: &[f64], cfg: &SimConfig) -> Result<ProvisioningPlan, SimError> {
    if let Some((link, &load)) = loads.iter().enumerate().find(|(_, l)| **l < 0.0) {
        return Err(SimError::NegativeLoad { link, load });
    }
    let modules: Vec<_> = loads.iter().map(|&l| cfg.module_for(l)).collect();
    let total_capacity_gbps = modules
        .iter()
        .flatten()
        .map(|&(size, count)| size * count as f64)
        .sum();
    Ok(ProvisioningPlan {
        modules,
        total_capacity_gbps,
    })
}

/// Total provisioned capacity of an assignment, Gbit/s.
pub fn assignment_capacity(
    catalog: &PathCatalog,
    tm: &TrafficMatrix,
    assignment: &FlowAssignment,
    cfg: &SimConfig,
) -> f64 {
    link_loads(catalog, tm, assignment)
        .iter()
        .map(|&l| cfg.capacity_for(l))
        .sum()
}

struct Candidate {
    src: NodeId,
    dst: NodeId,
    demand: f64,
    routes: Vec<Route>,
}

fn candidates(
    catalog: &PathCatalog,
    available: &[PathId],
    tm: &TrafficMatrix,
) -> Result<Vec<Candidate>, SimError> {
    if tm.node_count() != catalog.node_count() {
        return Err(SimError::NodeCountMismatch {
            expected: catalog.node_count(),
            got: tm.node_count(),
        });
    }
    let n = catalog.node_count();
    let mut per_pair: Vec<Vec<PathId>> = vec![Vec::new(); n * n];
    for &id in available {
        if id.0 >= catalog.alt_count() {
            return Err(SimError::UnknownPath(id));
        }
        let p = catalog.alt_path(id);
        per_pair[p.src().0 * n + p.dst().0].push(id);
    }
    let mut out: Vec<Candidate> = tm
        .flows()
        .filter(|&(_, _, d)| d > 0.0)
        .filter_map(|(src, dst, demand)| {
            let (a, b) = if src < dst { (src, dst) } else { (dst, src) };
            let alts = &per_pair[a.0 * n + b.0];
            if alts.is_empty() {
                return None;
            }
            let mut routes = vec![Route::LeastCost];
            routes.extend(alts.iter().map(|&id| Route::Alt(id)));
            Some(Candidate {
                src,
                dst,
                demand,
                routes,
            })
        })
        .collect();
    // descending demand, stable on flow order
    out.sort_by(|a, b| b.demand.total_cmp(&a.demand));
    Ok(out)
}

/// Local search over single-path assignments.
///
/// Starts from all-OSPF routing; each sweep visits the flows that have at
/// least one available alternative, largest demand first, and moves a flow
/// to the first candidate path that strictly lowers the total provisioned
/// capacity. Stops after a sweep without moves or `cfg.sweeps` sweeps.
pub fn te_assign(
    catalog: &PathCatalog,
    available: &[PathId],
    tm: &TrafficMatrix,
    cfg: &SimConfig,
) -> Result<FlowAssignment, SimError> {
    cfg.validate()?;
    let flows = candidates(catalog, available, tm)?;
    let mut assignment = FlowAssignment::ospf(tm.node_count());
    let mut loads = route_ospf(catalog, tm);
    let mut current: Vec<usize> = vec![0; flows.len()];
    for _ in 0..cfg.sweeps {
        let mut moved = false;
        for (f, flow) in flows.iter().enumerate() {
            let old = resolve(catalog, flow.src, flow.dst, &flow.routes[current[f]]);
            for (r, route) in flow.routes.iter().enumerate() {
                if r == current[f] {
                    continue;
                }
                let new = resolve(catalog, flow.src, flow.dst, route);
                if move_delta(&loads, old, new, flow.demand, cfg) < 0.0 {
                    for l in old.links() {
                        loads[l.0] -= flow.demand;
                    }
                    for l in new.links() {
                        loads[l.0] += flow.demand;
                    }
                    current[f] = r;
                    assignment.set_route(flow.src, flow.dst, route.clone());
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            break;
        }
    }
    Ok(assignment)
}

// Capacity change of moving `demand` from `old` to `new`; links on both
// paths are unaffected.
fn move_delta(loads: &[f64], old: &AltPath, new: &AltPath, demand: f64, cfg: &SimConfig) -> f64 {
    let mut delta = 0.0;
    for l in old.links() {
        if !new.links().contains(l) {
            let load = loads[l.0];
            delta += cfg.capacity_for(load - demand) - cfg.capacity_for(load);
        }
    }
    for l in new.links() {
        if !old.links().contains(l) {
            let load = loads[l.0];
            delta += cfg.capacity_for(load + demand) - cfg.capacity_for(load);
        }
    }
    delta
}

/// Globally minimal single-path assignment by exhaustive enumeration.
///
/// Fails if the number of combinations over flows with alternatives exceeds
/// `limit`. Among equal totals the first combination in enumeration order
/// (least-cost paths first) wins.
pub fn te_assign_exact(
    catalog: &PathCatalog,
    available: &[PathId],
    tm: &TrafficMatrix,
    cfg: &SimConfig,
    limit: u128,
) -> Result<FlowAssignment, SimError> {
    cfg.validate()?;
    let flows = candidates(catalog, available, tm)?;
    let mut combinations: u128 = 1;
    for f in &flows {
        combinations = combinations.saturating_mul(f.routes.len() as u128);
        if combinations > limit {
            return Err(SimError::TooManyCombinations {
                combinations,
                limit,
            });
        }
    }
    let mut loads = route_ospf(catalog, tm);
    let mut choice = vec![0usize; flows.len()];
    let mut best_choice = choice.clone();
    let mut best = total_capacity(&loads, cfg);
    enumerate(
        catalog,
        &flows,
        0,
        &mut loads,
        &mut choice,
        cfg,
        &mut best,
        &mut best_choice,
    );

    let mut assignment = FlowAssignment::ospf(tm.node_count());
    for (flow, &c) in flows.iter().zip(&best_choice) {
        assignment.set_route(flow.src, flow.dst, flow.routes[c].clone());
    }
    Ok(assignment)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    catalog: &PathCatalog,
    flows: &[Candidate],
    depth: usize,
    loads: &mut [f64],
    choice: &mut [usize],
    cfg: &SimConfig,
    best: &mut f64,
    best_choice: &mut [usize],
) {
    if depth == flows.len() {
        let total = total_capacity(loads, cfg);
        if total < *best {
            *best = total;
            best_choice.copy_from_slice(choice);
        }
        return;
    }
    let flow = &flows[depth];
    let base = resolve(catalog, flow.src, flow.dst, &Route::LeastCost);
    for (r, route) in flow.routes.iter().enumerate() {
        let path = resolve(catalog, flow.src, flow.dst, route);
        if r > 0 {
            shift(loads, base, path, flow.demand);
        }
        choice[depth] = r;
        enumerate(
            catalog,
            flows,
            depth + 1,
            loads,
            choice,
            cfg,
            best,
            best_choice,
        );
        if r > 0 {
            shift(loads, path, base, flow.demand);
        }
    }
    choice[depth] = 0;
}

fn shift(loads: &mut [f64], from: &AltPath, to: &AltPath, demand: f64) {
    for l in from.links() {
        loads[l.0] -= demand;
    }
    for l in to.links() {
        loads[l.0] += demand;
    }
}

fn total_capacity(loads: &[f64], cfg: &SimConfig) -> f64 {
    loads.iter().map(|&l| cfg.capacity_for(l)).sum()
}

/// One row of a [`CapacityReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCapacity {
    pub step: usize,
    pub available_paths: usize,
    pub ospf_gbps: f64,
    pub te_gbps: f64,
    pub savings_gbps: f64,
}

impl StepCapacity {
    /// Savings as a percentage of the OSPF-only capacity.
    pub fn savings_pct(&self) -> f64 {
        if self.ospf_gbps > 0.0 {
            100.0 * self.savings_gbps / self.ospf_gbps
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    pub steps: Vec<StepCapacity>,
}

/// Capacity savings along a schedule.
///
/// Traffic starts from `generate_traffic(seed)` and grows once per step
/// before traffic engineering runs over the paths unlocked by the nodes
/// migrated so far.
pub fn savings_series(
    wtopo: &WeightedTopology,
    catalog: &PathCatalog,
    schedule: &MigrationSchedule,
    cfg: &SimConfig,
    seed: u64,
) -> Result<CapacityReport, SimError> {
    cfg.validate()?;
    let n = catalog.node_count();
    let mut tm = generate_traffic(wtopo.topology(), rng::derive_seed(seed, 0));
    let curve = availability_curve(catalog, schedule);
    let mut steps = Vec::with_capacity(schedule.horizon());
    for t in 1..=schedule.horizon() {
        tm = grow_traffic(&tm, cfg, rng::derive_seed(seed, t as u64));
        let migrated = schedule.migrated_by(t, n);
        let available = catalog.available_alt_paths(&migrated);
        let ospf = provision(&route_ospf(catalog, &tm), cfg)?.total_capacity_gbps;
        let te_assignment = te_assign(catalog, &available, &tm, cfg)?;
        let te = provision(&link_loads(catalog, &tm, &te_assignment), cfg)?.total_capacity_gbps;
        steps.push(StepCapacity {
            step: t,
            available_paths: curve[t - 1],
            ospf_gbps: ospf,
            te_gbps: te,
            savings_gbps: ospf - te,
        });
    }
    Ok(CapacityReport { steps })
}
