//! Built-in named topologies.

use alloc::vec::Vec;

use crate::topology::{Topology, WeightedTopology};

/// Seven-node key-node illustration.
///
/// Least-cost `s-a-b-d` (3.00), then `s-c-e-d` (3.30), then `s-c-h-d`
/// (3.45): all three are 3-hop paths between `s` and `d`.
pub fn fig2() -> WeightedTopology {
    const LINKS: [(&str, &str, f64); 9] = [
        ("s", "a", 1.00),
        ("a", "b", 1.00),
        ("b", "d", 1.00),
        ("s", "c", 1.10),
        ("c", "e", 1.10),
        ("e", "d", 1.10),
        ("c", "h", 1.15),
        ("h", "d", 1.20),
        ("h", "e", 1.05),
    ];
    let topo = Topology::from_names(
        ["s", "a", "b", "c", "d", "e", "h"],
        LINKS.iter().map(|&(a, b, _)| (a, b)),
    )
    .expect("fixture topology is valid");
    let weights: Vec<f64> = LINKS.iter().map(|&(_, _, w)| w).collect();
    WeightedTopology::new(topo, weights).expect("fixture weights are valid")
}

/// Looks a fixture up by name.
pub fn by_name(name: &str) -> Option<WeightedTopology> {
    match name {
        "fig2" => Some(fig2()),
        _ => None,
    }
}
