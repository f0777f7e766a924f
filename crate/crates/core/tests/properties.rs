mod oracle;

use proptest::prelude::*;
use sdnmig_core::pathcat::DEFAULT_PATH_CAP;
use sdnmig_core::scheduler::GainVector;
use sdnmig_core::tesim::assignment_capacity;
use sdnmig_core::{
    availability_curve, build_catalog, cumulative_objective, generate_traffic, greedy_schedule,
    migration_costs, provision, random_schedule, route_ospf, select_by_budget, select_by_count,
    te_assign, te_assign_exact, BudgetLedger, CostModel, MigratedSet, Mode, NodeId, PathCatalog,
    PriorityMap, ScheduleConstraints, SimConfig, TrafficMatrix,
};

fn granted(total: f64, step: usize, steps: usize) -> f64 {
    if step == steps {
        total
    } else {
        total * step as f64 / steps as f64
    }
}

fn instance() -> impl Strategy<Value = (usize, usize, u64)> {
    (5usize..10, 0usize..6, any::<u64>())
}

fn catalog_for(n: usize, extra: usize, seed: u64) -> (sdnmig_core::WeightedTopology, PathCatalog) {
    let w = oracle::random_instance(n, extra, seed);
    let cat = build_catalog(&w, DEFAULT_PATH_CAP);
    (w, cat)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_hop_consistent((n, extra, seed) in (4usize..14, 0usize..12, any::<u64>())) {
        let w = oracle::random_instance(n, extra, seed);
        for s in 0..n {
            let dij = oracle::dijkstra_hops(&w, s);
            let bfs = oracle::bfs_hops(&w, s);
            for d in 0..n {
                prop_assert_eq!(dij[d].1, bfs[d]);
            }
        }
    }

    #[test]
    fn availability_is_monotone((n, extra, seed) in instance(), a in any::<u32>(), b in any::<u32>()) {
        let (_, cat) = catalog_for(n, extra, seed);
        let small = MigratedSet::from_nodes(n, (0..n).filter(|i| a >> i & 1 == 1).map(NodeId));
        let large = MigratedSet::from_nodes(n, (0..n).filter(|i| (a | b) >> i & 1 == 1).map(NodeId));
        let lo = cat.available_alt_paths(&small);
        let hi = cat.available_alt_paths(&large);
        prop_assert!(lo.iter().all(|id| hi.contains(id)));
        prop_assert_eq!(cat.available_count(&MigratedSet::all(n)), cat.alt_count());
    }

    #[test]
    fn singleton_gains_bounded((n, extra, seed) in instance()) {
        let (_, cat) = catalog_for(n, extra, seed);
        let empty = MigratedSet::empty(n);
        let sum: usize = (0..n).map(|u| cat.marginal_gain(&empty, NodeId(u)).unwrap()).sum();
        prop_assert!(sum <= cat.alt_count());
    }

    #[test]
    fn schedules_are_complete_and_safe((n, extra, seed) in instance(), steps in 1usize..5, unit in 0.5f64..3.0) {
        let (w, cat) = catalog_for(n, extra, seed);
        let costs = migration_costs(w.topology(), unit).unwrap();
        let total = costs.total();
        let modes = [
            ScheduleConstraints::count(n, steps).unwrap(),
            ScheduleConstraints::budget(steps, costs).unwrap(),
        ];
        for cons in &modes {
            for sched in [greedy_schedule(&cat, cons).unwrap(), random_schedule(n, cons, seed).unwrap()] {
                prop_assert!(sched.validate(n).is_ok());
                prop_assert_eq!(sched.horizon(), steps);
                let curve = availability_curve(&cat, &sched);
                prop_assert!(curve.windows(2).all(|x| x[0] <= x[1]));
                prop_assert_eq!(*curve.last().unwrap(), cat.alt_count());
                if let Mode::Budget { costs } = cons.mode() {
                    let mut spent = 0.0;
                    for (t, step) in sched.steps().iter().enumerate() {
                        spent += step.iter().map(|&u| costs.cost(u)).sum::<f64>();
                        prop_assert!(spent <= granted(total, t + 1, steps) + 1e-9 * total.max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn objective_is_linear_in_priorities((n, extra, seed) in instance(), k in 0.5f64..4.0) {
        let (_, cat) = catalog_for(n, extra, seed);
        let cons = ScheduleConstraints::count(n, 3).unwrap();
        let sched = greedy_schedule(&cat, &cons).unwrap();
        let one = cumulative_objective(&cat, &sched, &PriorityMap::uniform(&cat));
        let scaled = PriorityMap::from_weights(&cat, vec![k; cat.alt_count()]);
        if let Ok(scaled) = scaled {
            let got = cumulative_objective(&cat, &sched, &scaled);
            prop_assert!((got - k * one).abs() <= 1e-9 * (1.0 + got.abs()));
        }
        let curve_sum: usize = availability_curve(&cat, &sched).iter().sum();
        prop_assert_eq!(one, curve_sum as f64);
    }

    #[test]
    fn selection_is_order_independent(
        gains in prop::collection::vec(0usize..6, 1..10),
        costs in prop::collection::vec(1u32..12, 10),
        shuffle in any::<u64>(),
        m in 1usize..6,
        budget in 0u32..40,
    ) {
        let vector: GainVector = gains.iter().enumerate().map(|(i, &g)| (NodeId(i), g)).collect();
        let mut permuted = vector.clone();
        let len = permuted.len();
        for i in 0..len {
            permuted.swap(i, (shuffle as usize).wrapping_mul(i + 7) % len);
        }
        let sorted = |mut v: Vec<NodeId>| { v.sort(); v };
        prop_assert_eq!(sorted(select_by_count(&vector, m)), sorted(select_by_count(&permuted, m)));

        let model = CostModel::from_costs(costs.iter().map(|&c| c as f64).collect()).unwrap();
        let mut l1 = BudgetLedger::with_available(budget as f64);
        let mut l2 = BudgetLedger::with_available(budget as f64);
        prop_assert_eq!(
            select_by_budget(&vector, &model, &mut l1),
            select_by_budget(&permuted, &model, &mut l2)
        );
        prop_assert_eq!(l1.available(), l2.available());
        prop_assert!(l1.spent() <= budget as f64);
    }

    #[test]
    fn provisioning_is_monotone(loads in prop::collection::vec(0.0f64..2.0e6, 1..12), bump in prop::collection::vec(0.0f64..1.0e5, 12)) {
        let cfg = SimConfig::default();
        let bigger: Vec<f64> = loads.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let a = provision(&loads, &cfg).unwrap().total_capacity_gbps;
        let b = provision(&bigger, &cfg).unwrap().total_capacity_gbps;
        prop_assert!(a <= b);
        for (&l, m) in loads.iter().zip(provision(&loads, &cfg).unwrap().modules) {
            if let Some((size, count)) = m {
                prop_assert!(l <= cfg.headroom * size * count as f64 * 1000.0);
            } else {
                prop_assert!(l <= 1e-6);
            }
        }
    }

    #[test]
    fn te_never_worse_than_ospf((n, extra, seed) in instance(), mask in any::<u32>()) {
        let (w, cat) = catalog_for(n, extra, seed);
        let cfg = SimConfig::default();
        let tm = generate_traffic(w.topology(), seed);
        let migrated = MigratedSet::from_nodes(n, (0..n).filter(|i| mask >> i & 1 == 1).map(NodeId));
        let avail = cat.available_alt_paths(&migrated);
        let ospf = provision(&route_ospf(&cat, &tm), &cfg).unwrap().total_capacity_gbps;
        let te = assignment_capacity(&cat, &tm, &te_assign(&cat, &avail, &tm, &cfg).unwrap(), &cfg);
        prop_assert!(te <= ospf);
    }

    #[test]
    fn exact_te_monotone_in_available_set((extra, seed) in (0usize..4, any::<u64>()), a in any::<u32>(), b in any::<u32>()) {
        let (w, cat) = catalog_for(5, extra, seed);
        let cfg = SimConfig::default();
        let full = generate_traffic(w.topology(), seed);
        let mut tm = TrafficMatrix::zeros(5);
        for (s, d, x) in full.flows().filter(|&(s, d, _)| s < d).take(6) {
            tm.set(s, d, x * 3.0);
        }
        let small = MigratedSet::from_nodes(5, (0..5).filter(|i| a >> i & 1 == 1).map(NodeId));
        let large = MigratedSet::from_nodes(5, (0..5).filter(|i| (a | b) >> i & 1 == 1).map(NodeId));
        let cap = |m: &MigratedSet| {
            let av = cat.available_alt_paths(m);
            te_assign_exact(&cat, &av, &tm, &cfg, 1 << 16)
                .map(|x| assignment_capacity(&cat, &tm, &x, &cfg))
        };
        if let (Ok(lo), Ok(hi)) = (cap(&small), cap(&large)) {
            prop_assert!(hi <= lo);
        }
    }

    #[test]
    fn loads_conserve_flow((n, extra, seed) in instance()) {
        let (w, cat) = catalog_for(n, extra, seed);
        let tm = generate_traffic(w.topology(), seed);
        let loads = route_ospf(&cat, &tm);
        let expected: f64 = tm
            .flows()
            .map(|(s, d, x)| x * cat.pair(s, d).unwrap().least_cost().hop_len() as f64)
            .sum();
        let got: f64 = loads.iter().sum();
        prop_assert!((got - expected).abs() <= 1e-6 * expected.max(1.0));
    }
}
