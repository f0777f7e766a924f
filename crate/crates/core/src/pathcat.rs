//! Equal-hop path catalog and key-node availability.
//!
//! For every unordered node pair the catalog holds the least-cost path and
//! every other simple path with the same (minimum) hop count, sorted by
//! ascending cost. A non-least-cost path only becomes usable for traffic
//! engineering once all of its key-nodes run SDN: the nodes where it forks
//! off each cheaper path of the same pair.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::topology::{LinkId, NodeId, WeightedTopology};

/// Default cap on enumerated paths per pair.
pub const DEFAULT_PATH_CAP: usize = 1000;

/// Stable id of an alternative path (one with at least one key-node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathId(pub usize);

impl PathId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("source and destination are both {0}")]
    SameEndpoints(NodeId),
    #[error("node {0} is not in the topology")]
    UnknownNode(NodeId),
    #[error("path has fewer than two nodes")]
    TooShort,
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(NodeId, NodeId),
    #[error("node {0} repeats within the path")]
    RepeatedNode(NodeId),
    #[error("paths connect different endpoints")]
    MismatchedEndpoints,
    #[error("cheaper path is identical to the path itself")]
    IdenticalPath,
    #[error("node {0} has already migrated")]
    AlreadyMigrated(NodeId),
}

/// A simple path between two nodes with its key-node set.
#[derive(Debug, Clone, PartialEq)]
pub struct AltPath {
    nodes: Vec<NodeId>,
    links: Vec<LinkId>,
    cost: f64,
    key_nodes: Vec<NodeId>,
    id: Option<PathId>,
}

impl AltPath {
    /// Validates a node sequence against the topology and prices it.
    pub fn from_nodes(wtopo: &WeightedTopology, nodes: Vec<NodeId>) -> Result<Self, PathError> {
        let topo = wtopo.topology();
        if nodes.len() < 2 {
            return Err(PathError::TooShort);
        }
        if let Some(&bad) = nodes.iter().find(|n| n.0 >= topo.node_count()) {
            return Err(PathError::UnknownNode(bad));
        }
        let mut seen = vec![false; topo.node_count()];
        for &n in &nodes {
            if core::mem::replace(&mut seen[n.0], true) {
                return Err(PathError::RepeatedNode(n));
            }
        }
        let mut links = Vec::with_capacity(nodes.len() - 1);
        let mut cost = 0.0;
        for w in nodes.windows(2) {
            let link = topo
                .link_between(w[0], w[1])
                .ok_or(PathError::NotAdjacent(w[0], w[1]))?;
            cost += wtopo.weight(link);
            links.push(link);
        }
        Ok(AltPath {
            nodes,
            links,
            cost,
            key_nodes: Vec::new(),
            id: None,
        })
    }

    pub fn src(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dst(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn hop_len(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Key-nodes in ascending id order.
    pub fn key_nodes(&self) -> &[NodeId] {
        &self.key_nodes
    }

    pub fn alpha(&self) -> usize {
        self.key_nodes.len()
    }

    /// Catalog id; `None` for least-cost paths and paths outside a catalog.
    pub fn id(&self) -> Option<PathId> {
        self.id
    }

    pub fn set_key_nodes(&mut self, key_nodes: Vec<NodeId>) {
        self.key_nodes = key_nodes;
    }

    fn order(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

/// Paths returned by [`enumerate_equal_hop_paths`].
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub paths: Vec<AltPath>,
    /// Set when the cap stopped the enumeration early.
    pub truncated: bool,
}

/// All simple `src -> dst` paths whose hop count equals the hop distance,
/// cheapest first (ties by node sequence). At most `cap` paths are kept.
pub fn enumerate_equal_hop_paths(
    wtopo: &WeightedTopology,
    src: NodeId,
    dst: NodeId,
    cap: usize,
) -> Result<Enumeration, PathError> {
    let topo = wtopo.topology();
    for n in [src, dst] {
        if n.0 >= topo.node_count() {
            return Err(PathError::UnknownNode(n));
        }
    }
    if src == dst {
        return Err(PathError::SameEndpoints(src));
    }
    let to_dst = topo.hop_distances_from(dst);
    let mut found = Vec::new();
    let mut truncated = false;
    let mut stack = vec![src];
    walk_down(
        wtopo,
        &to_dst,
        dst,
        cap,
        &mut stack,
        &mut found,
        &mut truncated,
    );
    found.sort_by(AltPath::order);
    Ok(Enumeration {
        paths: found,
        truncated,
    })
}

// Depth-first walk along links that move exactly one hop closer to `dst`;
// every such walk is a simple minimum-hop path.
fn walk_down(
    wtopo: &WeightedTopology,
    to_dst: &[Option<usize>],
    dst: NodeId,
    cap: usize,
    stack: &mut Vec<NodeId>,
    found: &mut Vec<AltPath>,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    let here = stack[stack.len() - 1];
    if here == dst {
        if found.len() == cap {
            *truncated = true;
            return;
        }
        let path = AltPath::from_nodes(wtopo, stack.clone()).expect("walk yields valid paths");
        found.push(path);
        return;
    }
    let Some(d) = to_dst[here.0] else { return };
    for &next in wtopo.topology().neighbors(here) {
        if to_dst[next.0] == Some(d - 1) {
            stack.push(next);
            walk_down(wtopo, to_dst, dst, cap, stack, found, truncated);
            stack.pop();
        }
    }
}

/// Key-nodes of `path` given the same-pair paths that rank before it: for
/// each cheaper path, the last node of the common prefix (the fork node).
pub fn compute_key_nodes(path: &AltPath, cheaper: &[AltPath]) -> Result<Vec<NodeId>, PathError> {
    let mut keys = Vec::with_capacity(cheaper.len());
    for other in cheaper {
        if other.src() != path.src() || other.dst() != path.dst() {
            return Err(PathError::MismatchedEndpoints);
        }
        let common = path
            .nodes
            .iter()
            .zip(&other.nodes)
            .take_while(|(a, b)| a == b)
            .count();
        if common == path.nodes.len() && common == other.nodes.len() {
            return Err(PathError::IdenticalPath);
        }
        keys.push(path.nodes[common - 1]);
    }
    keys.sort_unstable();
    keys.dedup();
    Ok(keys)
}

/// Ordered paths of one unordered node pair, oriented from the lower id.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPaths {
    src: NodeId,
    dst: NodeId,
    paths: Vec<AltPath>,
    truncated: bool,
}

impl PairPaths {
    pub fn src(&self) -> NodeId {
        self.src
    }

    pub fn dst(&self) -> NodeId {
        self.dst
    }

    /// Cheapest first; index 0 is the least-cost path.
    pub fn paths(&self) -> &[AltPath] {
        &self.paths
    }

    pub fn least_cost(&self) -> &AltPath {
        &self.paths[0]
    }

    pub fn alternatives(&self) -> &[AltPath] {
        &self.paths[1..]
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Nodes that have migrated to SDN.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MigratedSet {
    member: Vec<bool>,
    len: usize,
}

impl MigratedSet {
    pub fn empty(node_count: usize) -> Self {
        MigratedSet {
            member: vec![false; node_count],
            len: 0,
        }
    }

    pub fn all(node_count: usize) -> Self {
        MigratedSet {
            member: vec![true; node_count],
            len: node_count,
        }
    }

    pub fn from_nodes(node_count: usize, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut set = Self::empty(node_count);
        for n in nodes {
            set.insert(n);
        }
        set
    }

    /// Returns false if the node was already present.
    pub fn insert(&mut self, node: NodeId) -> bool {
        let fresh = !core::mem::replace(&mut self.member[node.0], true);
        self.len += usize::from(fresh);
        fresh
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.member.get(node.0).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn node_count(&self) -> usize {
        self.member.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| NodeId(i))
    }
}

/// Per-pair path lists plus the global alternative-path index.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCatalog {
    node_names: Vec<String>,
    link_count: usize,
    pairs: Vec<PairPaths>,
    alt: Vec<(usize, usize)>,
    by_key_node: Vec<Vec<PathId>>,
}

/// Enumerates every pair (capped at `cap` paths each) and assigns key-nodes
/// against the cheaper prefix of each pair's sorted list.
pub fn build_catalog(wtopo: &WeightedTopology, cap: usize) -> PathCatalog {
    let topo = wtopo.topology();
    let n = topo.node_count();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut alt = Vec::new();
    let mut by_key_node = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let Enumeration {
                mut paths,
                truncated,
            } = enumerate_equal_hop_paths(wtopo, NodeId(i), NodeId(j), cap)
                .expect("pair endpoints are valid and distinct");
            let pair_idx = pairs.len();
            for k in 1..paths.len() {
                let (cheaper, rest) = paths.split_at_mut(k);
                let p = &mut rest[0];
                p.key_nodes = compute_key_nodes(p, cheaper).expect("same-pair paths are distinct");
                let id = PathId(alt.len());
                p.id = Some(id);
                for &key in &p.key_nodes {
                    by_key_node[key.0].push(id);
                }
                alt.push((pair_idx, k));
            }
            pairs.push(PairPaths {
                src: NodeId(i),
                dst: NodeId(j),
                paths,
                truncated,
            });
        }
    }
    PathCatalog {
        node_names: topo.names().to_vec(),
        link_count: topo.link_count(),
        pairs,
        alt,
        by_key_node,
    }
}

impl PathCatalog {
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn node_name(&self, node: NodeId) -> &str {
        &self.node_names[node.0]
    }

    pub fn link_count(&self) -> usize {
        self.link_count
    }

    /// Pairs ordered by `(src, dst)` with `src < dst`.
    pub fn pairs(&self) -> &[PairPaths] {
        &self.pairs
    }

    fn pair_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        let n = self.node_count();
        let (i, j) = if a < b { (a.0, b.0) } else { (b.0, a.0) };
        (i != j && j < n).then(|| i * (2 * n - i - 1) / 2 + (j - i - 1))
    }

    /// Paths of the unordered pair `{a, b}`, in either orientation.
    pub fn pair(&self, a: NodeId, b: NodeId) -> Option<&PairPaths> {
        self.pair_index(a, b).map(|i| &self.pairs[i])
    }

    /// Number of alternative paths (alpha >= 1).
    pub fn alt_count(&self) -> usize {
        self.alt.len()
    }

    pub fn alt_path(&self, id: PathId) -> &AltPath {
        let (pair, pos) = self.alt[id.0];
        &self.pairs[pair].paths[pos]
    }

    pub fn alt_paths(&self) -> impl Iterator<Item = &AltPath> + '_ {
        self.alt
            .iter()
            .map(|&(pair, pos)| &self.pairs[pair].paths[pos])
    }

    /// Alternative paths having `node` as a key-node.
    pub fn paths_keyed_by(&self, node: NodeId) -> &[PathId] {
        &self.by_key_node[node.0]
    }

    /// Membership predicate: is `node` a key-node of `path`?
    pub fn is_key_node(&self, node: NodeId, path: PathId) -> bool {
        self.alt_path(path).key_nodes.binary_search(&node).is_ok()
    }

    /// Pairs whose enumeration hit the cap.
    pub fn truncated_pairs(&self) -> impl Iterator<Item = &PairPaths> + '_ {
        self.pairs.iter().filter(|p| p.truncated)
    }

    /// Alternative paths whose key-nodes have all migrated, ascending id.
    pub fn available_alt_paths(&self, migrated: &MigratedSet) -> Vec<PathId> {
        (0..self.alt.len())
            .map(PathId)
            .filter(|&id| self.is_available(id, migrated))
            .collect()
    }

    pub fn available_count(&self, migrated: &MigratedSet) -> usize {
        (0..self.alt.len())
            .filter(|&i| self.is_available(PathId(i), migrated))
            .count()
    }

    pub fn is_available(&self, id: PathId, migrated: &MigratedSet) -> bool {
        self.alt_path(id)
            .key_nodes
            .iter()
            .all(|&k| migrated.contains(k))
    }

    /// Extra alternative paths unlocked by migrating `node` on top of
    /// `migrated`.
    pub fn marginal_gain(&self, migrated: &MigratedSet, node: NodeId) -> Result<usize, PathError> {
        if node.0 >= self.node_count() {
            return Err(PathError::UnknownNode(node));
        }
        if migrated.contains(node) {
            return Err(PathError::AlreadyMigrated(node));
        }
        Ok(self.by_key_node[node.0]
            .iter()
            .filter(|&&id| {
                self.alt_path(id)
                    .key_nodes
                    .iter()
                    .all(|&k| k == node || migrated.contains(k))
            })
            .count())
    }
}

/// Incremental availability bookkeeping for step-wise migration.
///
/// Keeps, per alternative path, the number of key-nodes still on legacy
/// routing and, per node, how many paths it alone still blocks.
#[derive(Debug, Clone)]
pub struct AvailabilityTracker<'a> {
    catalog: &'a PathCatalog,
    missing: Vec<usize>,
    gains: Vec<usize>,
    migrated: MigratedSet,
    available: usize,
}

impl<'a> AvailabilityTracker<'a> {
    pub fn new(catalog: &'a PathCatalog) -> Self {
        let mut gains = vec![0; catalog.node_count()];
        let missing: Vec<usize> = catalog
            .alt_paths()
            .map(|p| {
                if let [only] = p.key_nodes[..] {
                    gains[only.0] += 1;
                }
                p.alpha()
            })
            .collect();
        AvailabilityTracker {
            catalog,
            missing,
            gains,
            migrated: MigratedSet::empty(catalog.node_count()),
            available: 0,
        }
    }

    pub fn migrated(&self) -> &MigratedSet {
        &self.migrated
    }

    pub fn available(&self) -> usize {
        self.available
    }

    /// Marginal gain of an unmigrated node; zero once migrated.
    pub fn gain(&self, node: NodeId) -> usize {
        if self.migrated.contains(node) {
            0
        } else {
            self.gains[node.0]
        }
    }

    pub fn migrate(&mut self, node: NodeId) {
        if !self.migrated.insert(node) {
            return;
        }
        for &id in self.catalog.paths_keyed_by(node) {
            let left = &mut self.missing[id.0];
            *left -= 1;
            match *left {
                0 => self.available += 1,
                1 => {
                    let path = self.catalog.alt_path(id);
                    if let Some(&last) =
                        path.key_nodes.iter().find(|&&k| !self.migrated.contains(k))
                    {
                        self.gains[last.0] += 1;
                    }
                }
                _ => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::topology::Topology;

    fn ids(w: &WeightedTopology, names: &[&str]) -> Vec<NodeId> {
        names
            .iter()
            .map(|n| w.topology().node_id(n).unwrap())
            .collect()
    }

    fn labels(w: &WeightedTopology, nodes: &[NodeId]) -> Vec<String> {
        nodes
            .iter()
            .map(|&n| String::from(w.topology().name(n)))
            .collect()
    }

    #[test]
    fn fig2_s_to_d() {
        let w = fixtures::fig2();
        let [s, d, b] = [ids(&w, &["s"])[0], ids(&w, &["d"])[0], ids(&w, &["b"])[0]];
        let e = enumerate_equal_hop_paths(&w, s, d, DEFAULT_PATH_CAP).unwrap();
        assert!(!e.truncated);
        let got: Vec<_> = e.paths.iter().map(|p| labels(&w, p.nodes())).collect();
        assert_eq!(
            got,
            [
                ["s", "a", "b", "d"],
                ["s", "c", "e", "d"],
                ["s", "c", "h", "d"]
            ]
        );
        let costs: Vec<f64> = e.paths.iter().map(AltPath::cost).collect();
        for (c, want) in costs.iter().zip([3.00, 3.30, 3.45]) {
            assert!((c - want).abs() < 1e-12);
        }
        let e = enumerate_equal_hop_paths(&w, s, b, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(e.paths.len(), 1);
        assert_eq!(labels(&w, e.paths[0].nodes()), ["s", "a", "b"]);
    }

    #[test]
    fn enumeration_cap_is_flagged() {
        let w = fixtures::fig2();
        let [s, d] = [ids(&w, &["s"])[0], ids(&w, &["d"])[0]];
        let e = enumerate_equal_hop_paths(&w, s, d, 2).unwrap();
        assert!(e.truncated);
        assert_eq!(e.paths.len(), 2);
        assert_eq!(
            enumerate_equal_hop_paths(&w, s, s, 5).unwrap_err(),
            PathError::SameEndpoints(s)
        );
    }

    #[test]
    fn key_nodes_of_fig2() {
        let w = fixtures::fig2();
        let p = |names: &[&str]| AltPath::from_nodes(&w, ids(&w, names)).unwrap();
        let least = p(&["s", "a", "b", "d"]);
        let mid = p(&["s", "c", "e", "d"]);
        let last = p(&["s", "c", "h", "d"]);
        assert_eq!(compute_key_nodes(&least, &[]).unwrap(), []);
        assert_eq!(
            compute_key_nodes(&mid, core::slice::from_ref(&least)).unwrap(),
            ids(&w, &["s"])
        );
        assert_eq!(
            compute_key_nodes(&last, &[least.clone(), mid]).unwrap(),
            ids(&w, &["s", "c"])
        );
        let other_pair = p(&["s", "a", "b"]);
        assert_eq!(
            compute_key_nodes(&last, &[other_pair]).unwrap_err(),
            PathError::MismatchedEndpoints
        );
        assert_eq!(
            compute_key_nodes(&least, core::slice::from_ref(&least)).unwrap_err(),
            PathError::IdenticalPath
        );
    }

    #[test]
    fn path_validation() {
        let w = fixtures::fig2();
        assert_eq!(
            AltPath::from_nodes(&w, ids(&w, &["s", "b"])).unwrap_err(),
            PathError::NotAdjacent(NodeId(0), NodeId(2))
        );
        assert!(matches!(
            AltPath::from_nodes(&w, ids(&w, &["s", "a", "s"])),
            Err(PathError::RepeatedNode(_))
        ));
        assert_eq!(
            AltPath::from_nodes(&w, ids(&w, &["s"])).unwrap_err(),
            PathError::TooShort
        );
    }

    #[test]
    fn fig2_catalog() {
        let w = fixtures::fig2();
        let cat = build_catalog(&w, DEFAULT_PATH_CAP);
        assert_eq!(cat.alt_count(), 7);
        assert_eq!(cat.pairs().len(), 21);
        let mut got: Vec<(String, String, Vec<String>)> = cat
            .alt_paths()
            .map(|p| {
                (
                    String::from(w.topology().name(p.src())),
                    String::from(w.topology().name(p.dst())),
                    labels(&w, p.key_nodes()),
                )
            })
            .collect();
        got.sort();
        let s = |x: &str| String::from(x);
        let mut want = vec![
            (s("s"), s("d"), vec![s("s")]),
            (s("s"), s("d"), vec![s("c"), s("s")]),
            (s("a"), s("e"), vec![s("a")]),
            (s("a"), s("h"), vec![s("a")]),
            (s("b"), s("c"), vec![s("b")]),
            (s("b"), s("c"), vec![s("b"), s("d")]),
            (s("c"), s("d"), vec![s("c")]),
        ];
        // key sets are reported in id order: s=0, c=3
        want[1].2 = vec![s("s"), s("c")];
        want.sort();
        assert_eq!(got, want);
        for pair in cat.pairs() {
            assert_eq!(pair.least_cost().alpha(), 0);
            assert!(pair.alternatives().iter().all(|p| p.alpha() >= 1));
        }
    }

    #[test]
    fn triangle_and_square() {
        let tri =
            Topology::from_names(["x", "y", "z"], [("x", "y"), ("y", "z"), ("x", "z")]).unwrap();
        let tri = WeightedTopology::new(tri, vec![1.0, 1.1, 1.2]).unwrap();
        assert_eq!(build_catalog(&tri, 10).alt_count(), 0);

        let sq = Topology::from_names(
            ["p", "q", "r", "t"],
            [("p", "q"), ("q", "r"), ("r", "t"), ("t", "p")],
        )
        .unwrap();
        let sq = WeightedTopology::new(sq, vec![1.0, 1.01, 1.02, 1.03]).unwrap();
        let cat = build_catalog(&sq, 10);
        assert_eq!(cat.alt_count(), 2);
        for p in cat.alt_paths() {
            assert_eq!(p.key_nodes(), [p.src()]);
            assert_eq!(cat.pair(p.src(), p.dst()).unwrap().paths().len(), 2);
        }
    }

    #[test]
    fn availability_and_gain() {
        let w = fixtures::fig2();
        let cat = build_catalog(&w, DEFAULT_PATH_CAP);
        let n = cat.node_count();
        let node = |x: &str| w.topology().node_id(x).unwrap();
        assert!(cat.available_alt_paths(&MigratedSet::empty(n)).is_empty());

        let only_s = MigratedSet::from_nodes(n, [node("s")]);
        let avail = cat.available_alt_paths(&only_s);
        assert_eq!(avail.len(), 1);
        assert_eq!(
            labels(&w, cat.alt_path(avail[0]).nodes()),
            ["s", "c", "e", "d"]
        );
        assert_eq!(cat.available_alt_paths(&MigratedSet::all(n)).len(), 7);

        assert_eq!(
            cat.marginal_gain(&MigratedSet::empty(n), node("a"))
                .unwrap(),
            2
        );
        assert_eq!(cat.marginal_gain(&only_s, node("c")).unwrap(), 2);
        assert_eq!(
            cat.marginal_gain(&only_s, node("s")).unwrap_err(),
            PathError::AlreadyMigrated(node("s"))
        );
        let mut all_but_d = MigratedSet::all(n);
        all_but_d.member[node("d").0] = false;
        all_but_d.len -= 1;
        let before = cat.available_count(&all_but_d);
        assert_eq!(
            cat.marginal_gain(&all_but_d, node("d")).unwrap(),
            7 - before
        );
    }

    #[test]
    fn tracker_matches_direct_queries() {
        let w = fixtures::fig2();
        let cat = build_catalog(&w, DEFAULT_PATH_CAP);
        let mut tracker = AvailabilityTracker::new(&cat);
        for step in [4usize, 0, 6, 3, 1, 2, 5] {
            for u in 0..cat.node_count() {
                let u = NodeId(u);
                let want = cat.marginal_gain(tracker.migrated(), u).unwrap_or(0);
                assert_eq!(tracker.gain(u), want);
            }
            tracker.migrate(NodeId(step));
            assert_eq!(tracker.available(), cat.available_count(tracker.migrated()));
        }
        assert_eq!(tracker.available(), 7);
    }
}
