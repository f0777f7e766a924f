//! Planning and evaluation of gradual IP-to-SDN network migration.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`topology`]: the undirected graph model, OSPF-consistent link weights
//!   and the degree-proportional migration cost model.
//! * [`pathcat`]: equal-hop alternative path enumeration, key-node
//!   computation and availability queries against a set of migrated nodes.
//! * [`scheduler`]: greedy (count or CapEx budget) and random migration
//!   schedules, plus the cumulative-availability objective.
//! * [`exact`]: the integer-program model, an exact branch-and-bound
//!   scheduler and the search-space size formula.
//! * [`tesim`]: hybrid OSPF/SDN traffic-engineering simulation with granular
//!   link provisioning.
//!
//! File formats, the command line front end and benchmarks live in the
//! companion `sdnmig` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod exact;
pub mod fixtures;
pub mod pathcat;
pub mod rng;
pub mod scheduler;
pub mod tesim;
pub mod topology;

pub use exact::{
    build_ilp, optimal_schedule, search_space_size, ExactError, IlpBudget, IlpInstance,
    OptimalResult, SearchLimit,
};
pub use pathcat::{
    build_catalog, compute_key_nodes, enumerate_equal_hop_paths, AltPath, MigratedSet, PathCatalog,
    PathError, PathId,
};
pub use scheduler::{
    availability_curve, cumulative_objective, greedy_schedule, random_schedule, select_by_budget,
    select_by_count, BudgetLedger, MigrationSchedule, Mode, Policy, PriorityMap,
    ScheduleConstraints, ScheduleError,
};
pub use tesim::{
    generate_traffic, grow_traffic, provision, route_ospf, savings_series, te_assign,
    te_assign_exact, CapacityReport, FlowAssignment, ProvisioningPlan, SimConfig, SimError,
    TrafficMatrix,
};
pub use topology::{
    generate_ospf_weights, migration_costs, CostModel, LinkId, NodeId, Topology, TopologyError,
    WeightedTopology,
};
