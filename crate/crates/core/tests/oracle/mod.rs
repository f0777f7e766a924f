//! Independent brute-force oracles. Nothing here calls into the catalog,
//! scheduler or exact-search code paths it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use sdnmig_core::tesim::{FlowAssignment, Route};
use sdnmig_core::{
    generate_ospf_weights, NodeId, PathCatalog, SimConfig, Topology, TrafficMatrix,
    WeightedTopology,
};

pub fn random_instance(nodes: usize, extra_links: usize, seed: u64) -> WeightedTopology {
    let max = nodes * (nodes - 1) / 2;
    let links = (nodes - 1 + extra_links).min(max);
    let topo = Topology::random_connected(nodes, links, seed).unwrap();
    generate_ospf_weights(&topo, seed ^ 0xA5A5)
}

/// One oracle path: node sequence and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePath {
    pub nodes: Vec<usize>,
    pub cost: f64,
    pub keys: BTreeSet<usize>,
}

fn weight(w: &WeightedTopology, a: usize, b: usize) -> f64 {
    let t = w.topology();
    w.weight(t.link_between(NodeId(a), NodeId(b)).unwrap())
}

/// Every simple path `s -> d` of any length, by plain DFS.
pub fn all_simple_paths(w: &WeightedTopology, s: usize, d: usize) -> Vec<Vec<usize>> {
    fn go(w: &WeightedTopology, d: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let here = *stack.last().unwrap();
        if here == d {
            out.push(stack.clone());
            return;
        }
        for &nb in w.topology().neighbors(NodeId(here)) {
            if !stack.contains(&nb.0) {
                stack.push(nb.0);
                go(w, d, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(w, d, &mut vec![s], &mut out);
    out
}

/// Min-hop paths of a pair with key-nodes assigned by re-running the fork
/// rule against every path ranked before.
pub fn pair_paths(w: &WeightedTopology, s: usize, d: usize) -> Vec<OraclePath> {
    let all = all_simple_paths(w, s, d);
    let min_len = all.iter().map(Vec::len).min().unwrap();
    let mut paths: Vec<OraclePath> = all
        .into_iter()
        .filter(|p| p.len() == min_len)
        .map(|nodes| {
            let cost = nodes.windows(2).map(|x| weight(w, x[0], x[1])).sum();
            OraclePath {
                nodes,
                cost,
                keys: BTreeSet::new(),
            }
        })
        .collect();
    paths.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.nodes.cmp(&b.nodes)));
    for i in 0..paths.len() {
        let mut keys = BTreeSet::new();
        for j in 0..i {
            let mut fork = 0;
            while paths[i].nodes[fork + 1] == paths[j].nodes[fork + 1] {
                fork += 1;
            }
            keys.insert(paths[i].nodes[fork]);
        }
        paths[i].keys = keys;
    }
    paths
}

/// All alternative paths (non-empty key sets) of all pairs `s < d`.
pub fn alternative_paths(w: &WeightedTopology) -> Vec<OraclePath> {
    let n = w.topology().node_count();
    let mut out = Vec::new();
    for s in 0..n {
        for d in s + 1..n {
            out.extend(
                pair_paths(w, s, d)
                    .into_iter()
                    .filter(|p| !p.keys.is_empty()),
            );
        }
    }
    out
}

pub fn available(alts: &[OraclePath], migrated: &BTreeSet<usize>) -> Vec<Vec<usize>> {
    alts.iter()
        .filter(|p| p.keys.is_subset(migrated))
        .map(|p| p.nodes.clone())
        .collect()
}

/// Dijkstra from `src`: (min cost, hop count of the min-cost path) per node,
/// hop ties broken toward fewer hops.
pub fn dijkstra_hops(w: &WeightedTopology, src: usize) -> Vec<(f64, usize)> {
    #[derive(PartialEq)]
    struct Item(f64, usize, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    let n = w.topology().node_count();
    let mut best = vec![(f64::INFINITY, usize::MAX); n];
    let mut heap = BinaryHeap::new();
    best[src] = (0.0, 0);
    heap.push(Item(0.0, 0, src));
    while let Some(Item(c, h, u)) = heap.pop() {
        if (c, h) != best[u] {
            continue;
        }
        for &v in w.topology().neighbors(NodeId(u)) {
            let nc = c + weight(w, u, v.0);
            let cand = (nc, h + 1);
            if nc < best[v.0].0 || (nc == best[v.0].0 && h + 1 < best[v.0].1) {
                best[v.0] = cand;
                heap.push(Item(nc, h + 1, v.0));
            }
        }
    }
    best
}

/// BFS hop distances from `src`.
pub fn bfs_hops(w: &WeightedTopology, src: usize) -> Vec<usize> {
    let n = w.topology().node_count();
    let mut dist = vec![usize::MAX; n];
    dist[src] = 0;
    let mut frontier = vec![src];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for u in frontier {
            for &v in w.topology().neighbors(NodeId(u)) {
                if dist[v.0] == usize::MAX {
                    dist[v.0] = dist[u] + 1;
                    next.push(v.0);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Step rule for the brute-force enumerator.
pub enum StepRule<'a> {
    /// Step `t` holds exactly `min(per_step, remaining)` nodes.
    Fixed { per_step: usize },
    /// Cumulative cost by step `t` at most `t * C / T` (last step: `C`).
    Budget { costs: &'a [f64] },
}

/// Visits every assignment node -> step (`steps^n`) that satisfies `rule`,
/// calling `f` with the per-step node lists.
pub fn for_each_partition(
    n: usize,
    steps: usize,
    rule: &StepRule,
    mut f: impl FnMut(&[Vec<usize>]),
) {
    let mut assign = vec![0usize; n];
    loop {
        let mut parts = vec![Vec::new(); steps];
        for (node, &s) in assign.iter().enumerate() {
            parts[s].push(node);
        }
        if admissible(&parts, n, rule) {
            f(&parts);
        }
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            assign[i] += 1;
            if assign[i] < steps {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

fn admissible(parts: &[Vec<usize>], n: usize, rule: &StepRule) -> bool {
    let steps = parts.len();
    match rule {
        StepRule::Fixed { per_step } => {
            let mut left = n;
            for p in parts {
                let want = (*per_step).min(left);
                if p.len() != want {
                    return false;
                }
                left -= want;
            }
            true
        }
        StepRule::Budget { costs } => {
            let total: f64 = costs.iter().sum();
            let mut spent = 0.0;
            for (t, p) in parts.iter().enumerate() {
                spent += p.iter().map(|&i| costs[i]).sum::<f64>();
                let cap = if t + 1 == steps {
                    total
                } else {
                    total * (t + 1) as f64 / steps as f64
                };
                if spent > cap + 1e-9 * total.max(1.0) {
                    return false;
                }
            }
            true
        }
    }
}

/// Best cumulative availability over all admissible partitions.
pub fn best_objective(alts: &[OraclePath], n: usize, steps: usize, rule: &StepRule) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_partition(n, steps, rule, |parts| {
        let mut migrated = BTreeSet::new();
        let mut value = 0.0;
        for p in parts {
            migrated.extend(p.iter().copied());
            value += available(alts, &migrated).len() as f64;
        }
        best = best.max(value);
    });
    best
}

/// Number of partitions with `ceil(N/T)`-sized leading steps.
pub fn count_partitions(n: usize, steps: usize) -> u64 {
    let per = n.div_ceil(steps);
    let mut count = 0;
    // the formula's last block takes the remainder, so require exact sizes
    let rule = StepRule::Fixed { per_step: per };
    for_each_partition(n, steps, &rule, |_| count += 1);
    count
}

/// Exhaustive minimum of the provisioned capacity over the product of
/// per-flow candidate routes, computed from scratch for every combination.
pub fn exhaustive_te_minimum(
    catalog: &PathCatalog,
    available: &[sdnmig_core::PathId],
    tm: &TrafficMatrix,
    cfg: &SimConfig,
) -> f64 {
    let n = tm.node_count();
    let mut per_pair: BTreeMap<(usize, usize), Vec<sdnmig_core::PathId>> = BTreeMap::new();
    for &id in available {
        let p = catalog.alt_path(id);
        per_pair.entry((p.src().0, p.dst().0)).or_default().push(id);
    }
    let flows: Vec<(NodeId, NodeId, Vec<Route>)> = tm
        .flows()
        .filter(|f| f.2 > 0.0)
        .filter_map(|(s, d, _)| {
            let key = (s.0.min(d.0), s.0.max(d.0));
            per_pair.get(&key).map(|ids| {
                let mut r = vec![Route::LeastCost];
                r.extend(ids.iter().map(|&i| Route::Alt(i)));
                (s, d, r)
            })
        })
        .collect();
    let mut idx = vec![0usize; flows.len()];
    let mut best = f64::INFINITY;
    loop {
        let mut a = FlowAssignment::ospf(n);
        for (f, &i) in flows.iter().zip(&idx) {
            a.set_route(f.0, f.1, f.2[i].clone());
        }
        let mut loads = vec![0.0; catalog.link_count()];
        for (s, d, dem) in tm.flows() {
            for l in a.path(catalog, s, d).links() {
                loads[l.0] += dem;
            }
        }
        let total: f64 = loads.iter().map(|&l| oracle_capacity(l, cfg)).sum();
        best = best.min(total);
        let mut i = 0;
        loop {
            if i == flows.len() {
                return best;
            }
            idx[i] += 1;
            if idx[i] < flows[i].2.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Module rule restated: smallest size with load <= headroom * size,
/// otherwise ceil(load / (headroom * largest)) largest modules.
pub fn oracle_capacity(load_mbps: f64, cfg: &SimConfig) -> f64 {
    if load_mbps <= 0.0 {
        return 0.0;
    }
    for &g in &cfg.granularities_gbps {
        if load_mbps <= cfg.headroom * g * 1000.0 {
            return g;
        }
    }
    let g = *cfg.granularities_gbps.last().unwrap();
    (load_mbps / (cfg.headroom * g * 1000.0)).ceil() * g
}
