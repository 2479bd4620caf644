use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qnetopt::classical::{
    chemotaxis_step, merge_states, network_cost, two_point_estimate, Interaction, SystemState,
    Uncertain,
};
use qnetopt::generate::{generate_network, GenParams};
use qnetopt::metrics::{
    j_star_from_x, pareto_distance, restriction_value, solution_ratio, step_size, CurveParams,
    DistanceParams,
};
use qnetopt::model::{
    build_memory_utilization_graph, edge_cost, hop_distance, EntangledLink, NetworkBuilder, NodeId,
    QuantumNetwork,
};
use qnetopt::oracle::{exact_min_weighted_coloring, EnumerationBudget};
use qnetopt::quantum::{dominates, Objectives, ParetoArchive, Solution};
use qnetopt::schedule::{assignment_cycle, weighted_coloring, ConflictGraph};
use qnetopt::tree::{
    build_tree, selection_probability, utility_update, BuildParams, NodeSets, ThroughputTree,
    Utilities,
};

fn objectives() -> impl Strategy<Value = Objectives> {
    (0u32..6, 0u32..6, 1u32..5).prop_map(|(t, b, p)| Objectives::new(t as f64 * 0.5, b as f64, p))
}

fn solution(o: Objectives) -> Solution {
    Solution {
        decision: vec![],
        objectives: o,
        tree: ThroughputTree {
            nodes: vec![],
            edges: vec![],
            root_set: vec![],
            reached: vec![],
            complete: true,
        },
    }
}

fn conflict_graph(max_vertices: usize, max_weight: u32) -> impl Strategy<Value = ConflictGraph> {
    (1..=max_vertices)
        .prop_flat_map(move |n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect();
            let m = pairs.len();
            (
                prop::collection::vec(1..=max_weight, n),
                prop::collection::vec(any::<bool>(), m),
                Just(pairs),
            )
        })
        .prop_map(|(w, keep, pairs)| {
            let edges: Vec<_> = pairs
                .into_iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(e, _)| e)
                .collect();
            ConflictGraph::new(w, edges).unwrap()
        })
}

fn generated() -> impl Strategy<Value = QuantumNetwork> {
    (2usize..9, 0usize..3, 1u32..4, any::<u64>()).prop_map(|(n, s, levels, seed)| {
        generate_network(
            &GenParams {
                nodes: n,
                switchers: s.min(n),
                levels,
                ..Default::default()
            },
            seed,
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn dominance_is_a_strict_partial_order(a in objectives(), b in objectives(), c in objectives()) {
        prop_assert!(!dominates(&a, &a));
        prop_assert!(!(dominates(&a, &b) && dominates(&b, &a)));
        if dominates(&a, &b) && dominates(&b, &c) {
            prop_assert!(dominates(&a, &c));
        }
    }

    #[test]
    fn archive_stays_nondominated(seq in prop::collection::vec(objectives(), 1..12)) {
        let mut archive = ParetoArchive::new();
        for o in seq {
            let again = solution(o);
            archive.update(solution(o));
            prop_assert!(archive.is_nondominated());
            prop_assert!(!archive.update(again));
        }
    }
}

proptest! {
    #[test]
    fn hop_distance_doubles(level in 1u32..60) {
        prop_assert_eq!(hop_distance(level + 1).unwrap(), 2 * hop_distance(level).unwrap());
    }

    #[test]
    fn edge_cost_decreases_in_storage_cost(b in 0.1f64..100.0, z in 0.0f64..10.0, dz in 0.001f64..5.0) {
        let net = |zeta: f64| NetworkBuilder::new()
            .node(0, "A", 0.0)
            .node(1, "B", zeta)
            .link(EntangledLink::new(NodeId(0), NodeId(1)).throughput(b))
            .build()
            .unwrap();
        let lo = edge_cost(&net(z).links()[0]).unwrap();
        let hi = edge_cost(&net(z + dz).links()[0]).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn memory_graph_counts_and_round_trips(net in generated()) {
        let g = build_memory_utilization_graph(&net);
        let expected: usize = net.modes().iter().map(|m| m.active_links.len()).sum();
        prop_assert_eq!(g.edges().len(), expected);
        for e in g.edges() {
            let l = &net.links()[e.link];
            prop_assert_eq!((l.source, l.target), (e.tx, e.rx));
        }
        let back = QuantumNetwork::from_json_str(&net.to_json_string().unwrap()).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn utility_update_contracts(lambda in 1e-6f64..1e3, b in 1e-6f64..1e3, d in 1e-6f64..10.0) {
        let u = utility_update(lambda, b).unwrap();
        prop_assert!(u < lambda);
        prop_assert!(utility_update(lambda + d, b).unwrap() > u);
    }

    #[test]
    fn selection_probabilities_are_a_distribution(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let links: Vec<(f64, f64, f64)> = (0..k)
            .map(|_| (rng.gen_range(0.1..10.0), rng.gen_range(0.1..1.0), rng.gen_range(0.1..2.0)))
            .collect();
        let build = |order: &[usize]| {
            let mut b = NetworkBuilder::new().node(0, "hub", 0.1);
            for i in 0..k {
                b = b.node(i as u32 + 1, &format!("n{i}"), 0.1 * i as f64);
            }
            for &i in order {
                let (t, f, u) = links[i];
                b = b.link(EntangledLink::new(NodeId(0), NodeId(i as u32 + 1)).throughput(t).fidelity(f).utility(u));
            }
            b.build().unwrap()
        };
        let forward: Vec<usize> = (0..k).collect();
        let reverse: Vec<usize> = (0..k).rev().collect();
        let feasible: BTreeSet<NodeId> = (1..=k as u32).map(NodeId).collect();
        let params = BuildParams::default();
        let probs = |order: &[usize]| -> Vec<f64> {
            let g = build_memory_utilization_graph(&build(order));
            let u = Utilities::from_graph(&g).unwrap();
            feasible.iter().map(|&to| selection_probability(&g, &u, NodeId(0), to, &feasible, &params).unwrap()).collect()
        };
        let a = probs(&forward);
        let b = probs(&reverse);
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn built_trees_use_graph_edges_and_stay_connected(net in generated(), seed in any::<u64>()) {
        let g = build_memory_utilization_graph(&net);
        let last = net.nodes().last().unwrap().id;
        let sets = NodeSets::single(net.nodes()[0].id, last);
        let tree = build_tree(&g, &sets, &BuildParams::default(), seed).unwrap();
        let pairs: BTreeSet<(NodeId, NodeId)> = g.pairs(None).into_iter().map(|(s, t, _)| (s, t)).collect();
        for e in &tree.edges {
            prop_assert!(pairs.contains(&(e.source, e.target)));
        }
        for &d in &tree.reached {
            prop_assert_eq!(tree.root_of(d), sets.initial.iter().next().copied().unwrap());
        }
    }

    #[test]
    fn coloring_is_valid_and_bounded(graph in conflict_graph(20, 4)) {
        let c = weighted_coloring(&graph).unwrap();
        c.validate(&graph).unwrap();
        let cycle = assignment_cycle(&c, 1.0).unwrap();
        prop_assert!(cycle.respects_conflicts(&graph));
    }

    #[test]
    fn greedy_never_beats_exact(graph in conflict_graph(8, 3)) {
        let exact = exact_min_weighted_coloring(&graph, &EnumerationBudget::default()).unwrap();
        prop_assert!(weighted_coloring(&graph).unwrap().palette >= exact);
    }

    #[test]
    fn network_cost_ignores_member_order(
        theta in prop::collection::vec(-5.0f64..5.0, 3),
        pop in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..6),
    ) {
        let k = Interaction { a: 0.7, r_a: 0.3, nu: 0.2, r_nu: 1.1, m: 0.0 };
        let mut rev = pop.clone();
        rev.reverse();
        let a = network_cost(&theta, &pop, &k).unwrap();
        let b = network_cost(&theta, &rev, &k).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert_eq!(network_cost(&pop[0], &vec![pop[0].clone(); pop.len()], &k).unwrap(), 0.0);
    }

    #[test]
    fn merge_is_affine(
        a in prop::collection::vec(-5.0f64..5.0, 3),
        b in prop::collection::vec(-5.0f64..5.0, 3),
        c in prop::collection::vec(-5.0f64..5.0, 3),
        v in prop::collection::vec(-5.0f64..5.0, 3),
        phi in 0.0f64..=1.0,
    ) {
        let st = |x: &[f64]| SystemState::new(0, x.to_vec());
        let shift = |x: &[f64]| x.iter().zip(&v).map(|(p, q)| p + q).collect::<Vec<_>>();
        let base = merge_states(&st(&a), &st(&b), &st(&c), phi).unwrap();
        let moved = merge_states(&st(&shift(&a)), &st(&shift(&b)), &st(&shift(&c)), phi).unwrap();
        for (m, (x, s)) in moved.theta.iter().zip(base.theta.iter().zip(&v)) {
            prop_assert!((m - (x + s)).abs() < 1e-12);
        }
    }

    #[test]
    fn chemotaxis_keeps_step_length(theta in prop::collection::vec(-5.0f64..5.0, 1..6), c in 0.0f64..3.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SystemState::new(0, theta.clone());
        let n = chemotaxis_step(&s, c, &mut rng).unwrap();
        let d = n.theta.iter().zip(&theta).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!((d - c).abs() <= 1e-12);
    }

    #[test]
    fn two_point_is_exact_for_affine(
        coeffs in prop::collection::vec(-3.0f64..3.0, 1..6),
        means in prop::collection::vec(-3.0f64..3.0, 5),
        stds in prop::collection::vec(0.01f64..2.0, 5),
        offset in -10.0f64..10.0,
    ) {
        let z = coeffs.len();
        let u: Vec<Uncertain> = (0..z).map(|i| Uncertain { mean: means[i], std: stds[i] }).collect();
        let f = |_: &[f64], w: &[f64]| offset + coeffs.iter().zip(w).map(|(a, x)| a * x).sum::<f64>();
        let e = two_point_estimate(f, &[], &u).unwrap();
        let mean = offset + (0..z).map(|i| coeffs[i] * means[i]).sum::<f64>();
        let std = (0..z).map(|i| (coeffs[i] * stds[i]).powi(2)).sum::<f64>().sqrt();
        prop_assert!((e.mean - mean).abs() <= 1e-9 * mean.abs().max(1e-300) + 1e-12);
        prop_assert!((e.std - std).abs() <= 1e-9 * std.max(1e-300));
    }

    #[test]
    fn step_size_bounded_and_monotone(f in 0.0f64..1e3, df in 0.0f64..10.0, j in 1u64..100, lo in 0.0f64..1.0, span in 0.0f64..10.0) {
        let p = CurveParams { phi_min: lo, phi_max: lo + span, omega: 1.0, j_p: 1.0 };
        let s = step_size(f, j, &p).unwrap();
        prop_assert!(s >= p.phi_min && s <= p.phi_max);
        prop_assert!(step_size(f + df, j, &p).unwrap() >= s);
        prop_assert!(step_size(f, j + 1, &p).unwrap() <= s);
    }

    #[test]
    fn restriction_inverts_j_star(x in -1e3f64..1e3, jp in 1e-3f64..1e3, w in 1e-3f64..1e3) {
        let r = restriction_value(j_star_from_x(x, jp, w).unwrap(), jp, w).unwrap();
        prop_assert!((r - x * x).abs() <= 1e-12 * (x * x).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn distance_and_ratio_ranges(a in objectives(), b in objectives(), chi in 0.1f64..10.0) {
        let r = Objectives::new(b.storage_time + 0.5, b.throughput + 1.0, b.path_length);
        let p = DistanceParams::new(chi).unwrap();
        prop_assert_eq!(pareto_distance(&r, &r, &p).unwrap(), 0.0);
        let d = pareto_distance(&a, &r, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        let small = solution_ratio(&[a, r], &[r]).unwrap();
        let large = solution_ratio(&[a, r], &[r, a]).unwrap();
        prop_assert!((0.0..=1.0).contains(&small) && large >= small && large == 1.0);
    }
}
