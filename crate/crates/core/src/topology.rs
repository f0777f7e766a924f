//! Graph model, link weights and migration costs.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng;

/// Index of a node in declaration order.
///
/// Declaration order is the canonical node order: it orients each pair of
/// the path catalog (lower id is the source) and breaks every selection tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

impl LinkId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("a topology needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("duplicate link between `{0}` and `{1}`")]
    DuplicateLink(String, String),
    #[error("graph is disconnected: `{0}` is unreachable from `{1}`")]
    Disconnected(String, String),
    #[error("expected {expected} link weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("link weight {0} is not a positive finite number")]
    BadWeight(f64),
    #[error("unit cost {0} is not a positive finite number")]
    BadUnitCost(f64),
    #[error("migration cost {0} is not a positive finite number")]
    BadCost(f64),
    #[error("cannot place {links} links on {nodes} nodes as a simple connected graph")]
    BadLinkCount { nodes: usize, links: usize },
}

/// Simple, connected, undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    names: Vec<String>,
    by_name: BTreeMap<String, NodeId>,
    // endpoints stored with the lower id first
    links: Vec<(NodeId, NodeId)>,
    by_endpoints: BTreeMap<(NodeId, NodeId), LinkId>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Topology {
    /// Builds a topology from node names and links given by name.
    pub fn from_names<N, L, S>(nodes: N, links: L) -> Result<Self, TopologyError>
    where
        N: IntoIterator,
        N::Item: Into<String>,
        L: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let names: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut by_name = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if by_name.insert(name.clone(), NodeId(i)).is_some() {
                return Err(TopologyError::DuplicateNode(name.clone()));
            }
        }
        let mut idx_links = Vec::new();
        for (a, b) in links {
            let lookup = |s: &str| {
                by_name
                    .get(s)
                    .copied()
                    .ok_or_else(|| TopologyError::UnknownNode(String::from(s)))
            };
            idx_links.push((lookup(a.as_ref())?, lookup(b.as_ref())?));
        }
        Self::from_indices(names, idx_links)
    }

    /// Builds a topology from node names and links given by node index.
    pub fn from_indices(
        names: Vec<String>,
        links: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, TopologyError> {
        let n = names.len();
        if n < 2 {
            return Err(TopologyError::TooFewNodes(n));
        }
        let mut by_name = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if by_name.insert(name.clone(), NodeId(i)).is_some() {
                return Err(TopologyError::DuplicateNode(name.clone()));
            }
        }
        let mut stored = Vec::new();
        let mut by_endpoints = BTreeMap::new();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in links {
            for end in [a, b] {
                if end.0 >= n {
                    return Err(TopologyError::UnknownNode(format!("{end}")));
                }
            }
            if a == b {
                return Err(TopologyError::SelfLoop(names[a.0].clone()));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if by_endpoints.contains_key(&key) {
                return Err(TopologyError::DuplicateLink(
                    names[key.0 .0].clone(),
                    names[key.1 .0].clone(),
                ));
            }
            by_endpoints.insert(key, LinkId(stored.len()));
            stored.push(key);
            adjacency[a.0].push(b);
            adjacency[b.0].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let topo = Topology {
            names,
            by_name,
            links: stored,
            by_endpoints,
            adjacency,
        };
        let dist = topo.hop_distances_from(NodeId(0));
        if let Some(far) = dist.iter().position(Option::is_none) {
            return Err(TopologyError::Disconnected(
                topo.names[far].clone(),
                topo.names[0].clone(),
            ));
        }
        Ok(topo)
    }

    /// Random connected graph with nodes `n0..n{nodes-1}`: a random spanning
    /// tree topped up with uniformly chosen extra links.
    pub fn random_connected(nodes: usize, links: usize, seed: u64) -> Result<Self, TopologyError> {
        if nodes < 2 {
            return Err(TopologyError::TooFewNodes(nodes));
        }
        if links + 1 < nodes || links > nodes * (nodes - 1) / 2 {
            return Err(TopologyError::BadLinkCount { nodes, links });
        }
        let mut rng = rng::seeded(seed);
        let mut order: Vec<usize> = (0..nodes).collect();
        order.shuffle(&mut rng);
        let mut present = BTreeMap::new();
        let mut edges = Vec::with_capacity(links);
        for i in 1..nodes {
            let parent = order[rng.random_range(0..i)];
            let (a, b) = minmax(order[i], parent);
            present.insert((a, b), ());
            edges.push((NodeId(a), NodeId(b)));
        }
        while edges.len() < links {
            let a = rng.random_range(0..nodes);
            let b = rng.random_range(0..nodes);
            if a == b {
                continue;
            }
            let key = minmax(a, b);
            if present.insert(key, ()).is_none() {
                edges.push((NodeId(key.0), NodeId(key.1)));
            }
        }
        let names = (0..nodes).map(|i| format!("n{i}")).collect();
        Self::from_indices(names, edges)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len()).map(NodeId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, node: NodeId) -> &str {
        &self.names[node.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    /// Link endpoints, lower id first, indexed by [`LinkId`].
    pub fn links(&self) -> &[(NodeId, NodeId)] {
        &self.links
    }

    pub fn endpoints(&self, link: LinkId) -> (NodeId, NodeId) {
        self.links[link.0]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.by_endpoints.get(&key).copied()
    }

    /// Neighbors in ascending id order.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.0]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.0].len()
    }

    /// Breadth-first hop distances from `src`; `None` for unreachable nodes.
    pub fn hop_distances_from(&self, src: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.names.len()];
        let mut queue = VecDeque::new();
        dist[src.0] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.0].unwrap_or(0);
            for &v in &self.adjacency[u.0] {
                if dist[v.0].is_none() {
                    dist[v.0] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest minimum hop distance over all node pairs.
    pub fn hop_diameter(&self) -> usize {
        self.nodes()
            .map(|s| {
                self.hop_distances_from(s)
                    .into_iter()
                    .flatten()
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }
}

fn minmax(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A topology with one positive weight per link.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTopology {
    topology: Topology,
    weights: Vec<f64>,
}

impl WeightedTopology {
    pub fn new(topology: Topology, weights: Vec<f64>) -> Result<Self, TopologyError> {
        if weights.len() != topology.link_count() {
            return Err(TopologyError::WeightCount {
                expected: topology.link_count(),
                got: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(TopologyError::BadWeight(w));
        }
        Ok(WeightedTopology { topology, weights })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn weight(&self, link: LinkId) -> f64 {
        self.weights[link.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Draws every link weight uniformly from `[1, 1 + 1/L)`, `L` being the hop
/// diameter. Any `n`-hop path then costs less than `n + 1`, so no `n`-hop
/// path is more expensive than an `(n+1)`-hop one.
pub fn generate_ospf_weights(topology: &Topology, seed: u64) -> WeightedTopology {
    let diameter = topology.hop_diameter().max(1);
    let upper = 1.0 + 1.0 / diameter as f64;
    let mut rng = rng::seeded(seed);
    let weights = (0..topology.link_count())
        .map(|_| rng.random_range(1.0..upper))
        .collect();
    WeightedTopology {
        topology: topology.clone(),
        weights,
    }
}

/// Per-node migration cost `c_n` and the total `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    unit_cost: Option<f64>,
    costs: Vec<f64>,
    total: f64,
}

impl CostModel {
    /// Arbitrary strictly positive costs indexed by node id.
    pub fn from_costs(costs: Vec<f64>) -> Result<Self, TopologyError> {
        if let Some(&c) = costs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(TopologyError::BadCost(c));
        }
        let total = costs.iter().sum();
        Ok(CostModel {
            unit_cost: None,
            costs,
            total,
        })
    }

    /// Unit cost per degree, if the model is degree-proportional.
    pub fn unit_cost(&self) -> Option<f64> {
        self.unit_cost
    }

    pub fn cost(&self, node: NodeId) -> f64 {
        self.costs[node.0]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn node_count(&self) -> usize {
        self.costs.len()
    }
}

/// Degree-proportional costs: `c_n = unit_cost * degree(n)`.
pub fn migration_costs(topology: &Topology, unit_cost: f64) -> Result<CostModel, TopologyError> {
    if !(unit_cost.is_finite() && unit_cost > 0.0) {
        return Err(TopologyError::BadUnitCost(unit_cost));
    }
    let costs: Vec<f64> = topology
        .nodes()
        .map(|n| unit_cost * topology.degree(n) as f64)
        .collect();
    let total = costs.iter().sum();
    Ok(CostModel {
        unit_cost: Some(unit_cost),
        costs,
        total,
    })
}
