//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnetopt::classical::{two_point_estimate, ClassicalConfig, Uncertain};
use qnetopt::generate::{generate_network, GenParams};
use qnetopt::metrics::{
    emit_curves, mean_front_distance, solution_ratio, step_size, CurveGrid, CurveParams,
    DistanceParams,
};
use qnetopt::model::{build_memory_utilization_graph, hop_distance, NodeId, QuantumNetwork};
use qnetopt::oracle::{
    enumerate_trees, exact_min_weighted_coloring, exact_pareto_front, EnumerationBudget,
};
use qnetopt::quantum::{
    dominates, optimize_quantum_layer, Objectives, ParetoArchive, QuantumConfig, Solution,
};
use qnetopt::schedule::{weighted_coloring, ConflictGraph};
use qnetopt::topologies;
use qnetopt::tree::{NodeSets, ThroughputTree};

// curves
const CURVE_PHI_MAX_ABS: f64 = 1e-6;
const CURVE_KAPPA_FAR: f64 = 700.0;
const J_STAR_REL: f64 = 1e-12;
const CURVE_RUNTIME: Duration = Duration::from_secs(1);
// trend
const TREND_SEED: u64 = 42;
const TREND_BUDGETS: [usize; 3] = [50, 200, 1000];
const TREND_REFERENCE: usize = 100_000;
const TREND_MIN_RATIO: f64 = 0.9;
const TREND_CHI: f64 = 3.0;
const TREND_RUNTIME: Duration = Duration::from_secs(60);
// oracle front
const FRONT_MIN_FIXTURES: usize = 20;
const FRONT_ITERATIONS: usize = 10_000;
const FRONT_SEED: u64 = 7;
const FRONT_MIN_COVERAGE: f64 = 0.9;
const FRONT_RUNTIME: Duration = Duration::from_secs(120);
// scheduling
const SCHED_GRAPHS: usize = 1000;
const SCHED_MAX_VERTICES: usize = 20;
const SCHED_MAX_WEIGHT: u32 = 4;
const SCHED_ORACLE_VERTICES: usize = 8;
const SCHED_RUNTIME: Duration = Duration::from_secs(30);
// classical
const CLASSICAL_SEEDS: u64 = 10;
const CLASSICAL_POPULATION: usize = 5;
const CLASSICAL_RADIUS: f64 = 0.1;
const CLASSICAL_MIN_HITS: usize = 9;
const CLASSICAL_RUNTIME: Duration = Duration::from_secs(10);
// two-point
const TWO_POINT_CASES: usize = 100;
const TWO_POINT_MAX_Z: usize = 5;
const TWO_POINT_REL: f64 = 1e-9;
const TWO_POINT_RUNTIME: Duration = Duration::from_secs(1);
// property cases
const PROPERTY_CASES: usize = 100_000;

type Check = Box<dyn FnOnce() -> Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > limit {
        o.pass = false;
    }
    o.detail = format!(
        "{} [{:.2}s, limit {}s]",
        o.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    o
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn curves() -> Outcome {
    let rows = emit_curves(1.0, 1.0, &CurveGrid::default()).unwrap();
    let mut by_phi: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        by_phi.entry(r.phi_min.to_bits()).or_default().push(r.phi_s);
        if r.kappa == 0.0 && r.phi_s != r.phi_min {
            return outcome(
                false,
                format!("phi_s {} != phi_min {} at kappa 0", r.phi_s, r.phi_min),
            );
        }
        if !rel_close(r.j_star, r.kappa * r.kappa, J_STAR_REL) {
            return outcome(false, format!("J* {} at x {}", r.j_star, r.kappa));
        }
    }
    if !by_phi.values().all(|v| v.windows(2).all(|w| w[1] >= w[0])) {
        return outcome(false, "phi_s not monotone in kappa");
    }
    let mut far_gap: f64 = 0.0;
    for bits in by_phi.keys() {
        let phi_min = f64::from_bits(*bits);
        let p = CurveParams {
            phi_min,
            phi_max: 500.0 * phi_min,
            omega: 1.0,
            j_p: 1.0,
        };
        far_gap = far_gap.max((step_size(CURVE_KAPPA_FAR, 1, &p).unwrap() - p.phi_max).abs());
    }
    if far_gap > CURVE_PHI_MAX_ABS {
        return outcome(
            false,
            format!("phi_s misses phi_max by {far_gap:e} at kappa {CURVE_KAPPA_FAR}"),
        );
    }
    let example = qnetopt::metrics::j_star_from_x(10.0, 1.0, 100.0).unwrap();
    let ok = rel_close(example, 1.0, J_STAR_REL);
    outcome(
        ok,
        format!(
            "{} rows, far gap {far_gap:e}, J*(10, 1, 100) = {example}",
            rows.len()
        ),
    )
}

fn search(
    net: &QuantumNetwork,
    s: NodeId,
    d: NodeId,
    iterations: usize,
    seed: u64,
) -> Vec<Objectives> {
    let graph = build_memory_utilization_graph(net);
    let config = QuantumConfig {
        iterations,
        seed,
        ..QuantumConfig::default()
    };
    optimize_quantum_layer(&graph, net, &NodeSets::single(s, d), d, &config)
        .unwrap()
        .archive
        .objectives()
}

fn trend() -> Outcome {
    let net = generate_network(&GenParams::default(), TREND_SEED).unwrap();
    let (s, d) = (NodeId(0), NodeId(6));
    let reference = search(&net, s, d, TREND_REFERENCE, TREND_SEED);
    let params = DistanceParams::new(TREND_CHI).unwrap();
    let mut dist = Vec::new();
    let mut ratio = Vec::new();
    for n in TREND_BUDGETS {
        let found = search(&net, s, d, n, TREND_SEED);
        dist.push(mean_front_distance(&found, &reference, &params).unwrap());
        ratio.push(solution_ratio(&found, &reference).unwrap());
    }
    let ok = dist.windows(2).all(|w| w[1] <= w[0])
        && ratio.windows(2).all(|w| w[1] >= w[0])
        && ratio[2] >= TREND_MIN_RATIO;
    outcome(
        ok,
        format!(
            "|ref| = {}, D = {dist:?}, zeta = {ratio:?}",
            reference.len()
        ),
    )
}

fn front_fixtures() -> Vec<(String, QuantumNetwork, NodeId, NodeId)> {
    let mut out = vec![
        ("line".to_string(), topologies::line(), NodeId(0), NodeId(2)),
        (
            "diamond".to_string(),
            topologies::diamond(),
            NodeId(0),
            NodeId(3),
        ),
        (
            "fig1".to_string(),
            topologies::switcher_example(),
            NodeId(0),
            NodeId(5),
        ),
    ];
    for (n, s) in [(4, 0), (5, 0), (6, 0), (4, 1), (5, 1), (7, 0)] {
        for seed in 0..8 {
            let net = generate_network(
                &GenParams {
                    nodes: n,
                    switchers: s,
                    ..Default::default()
                },
                seed,
            )
            .unwrap();
            if build_memory_utilization_graph(&net).edges().len()
                <= EnumerationBudget::default().max_gm_edges
            {
                out.push((
                    format!("gen-n{n}-s{s}-{seed}"),
                    net,
                    NodeId(0),
                    NodeId(n as u32 - 1),
                ));
            }
        }
    }
    out
}

fn oracle_front() -> Outcome {
    let fixtures = front_fixtures();
    let mut failures = Vec::new();
    let mut worst: f64 = 1.0;
    for (name, net, s, d) in &fixtures {
        let graph = build_memory_utilization_graph(net);
        let sets = NodeSets::single(*s, *d);
        let trees = enumerate_trees(&graph, &sets, &EnumerationBudget::default()).unwrap();
        let exact: Vec<Objectives> = exact_pareto_front(&trees, &graph, net, *s, *d, 1.0)
            .unwrap()
            .iter()
            .map(|m| m.objectives)
            .collect();
        let found = search(net, *s, *d, FRONT_ITERATIONS, FRONT_SEED);
        let subset = found.iter().all(|f| exact.iter().any(|e| e.same_as(f)));
        let covered = exact
            .iter()
            .filter(|e| found.iter().any(|f| f.same_as(e)))
            .count();
        let coverage = if exact.is_empty() {
            1.0
        } else {
            covered as f64 / exact.len() as f64
        };
        worst = worst.min(coverage);
        if !subset || coverage < FRONT_MIN_COVERAGE {
            failures.push(format!("{name} (subset {subset}, coverage {coverage:.2})"));
        }
    }
    let ok = fixtures.len() >= FRONT_MIN_FIXTURES && failures.is_empty();
    outcome(
        ok,
        format!(
            "{} fixtures, worst coverage {worst:.2}, failures {failures:?}",
            fixtures.len()
        ),
    )
}

fn random_conflict_graph(rng: &mut ChaCha8Rng) -> ConflictGraph {
    let n = rng.gen_range(1..=SCHED_MAX_VERTICES);
    let weights: Vec<u32> = (0..n)
        .map(|_| rng.gen_range(1..=SCHED_MAX_WEIGHT))
        .collect();
    let density: f64 = rng.gen_range(0.0..=1.0);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    ConflictGraph::new(weights, edges).unwrap()
}

fn scheduling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let budget = EnumerationBudget {
        max_weight: SCHED_MAX_WEIGHT,
        ..EnumerationBudget::default()
    };
    let mut invalid = 0;
    let mut below_optimum = 0;
    let mut gaps: BTreeMap<u32, usize> = BTreeMap::new();
    for _ in 0..SCHED_GRAPHS {
        let g = random_conflict_graph(&mut rng);
        let c = weighted_coloring(&g).unwrap();
        if c.validate(&g).is_err() {
            invalid += 1;
        }
        if g.len() <= SCHED_ORACLE_VERTICES {
            let exact = exact_min_weighted_coloring(&g, &budget).unwrap();
            if c.palette < exact {
                below_optimum += 1;
            }
            *gaps.entry(c.palette.saturating_sub(exact)).or_default() += 1;
        }
    }
    let histogram: Vec<String> = gaps.iter().map(|(g, n)| format!("gap {g}: {n}")).collect();
    println!("    optimality gap histogram: {}", histogram.join(", "));
    outcome(
        invalid == 0 && below_optimum == 0,
        format!(
            "{SCHED_GRAPHS} graphs, {invalid} invalid, {} checked against oracle",
            gaps.values().sum::<usize>()
        ),
    )
}

fn classical() -> Outcome {
    let mut summary = Vec::new();
    let mut ok = true;
    for p in 1..=3usize {
        let center: Vec<f64> = (0..p).map(|i| 1.5 - 0.75 * i as f64).collect();
        let json =
            serde_json::json!({"p": p, "S": CLASSICAL_POPULATION, "quadratic": {"center": center}});
        let config = ClassicalConfig::from_json_str(&json.to_string()).unwrap();
        let mut hits = 0;
        let mut monotone = true;
        for seed in 0..CLASSICAL_SEEDS {
            let run = config.run(seed).unwrap();
            if let Some(best) = &run.best {
                let d = best
                    .theta
                    .iter()
                    .zip(&center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d <= CLASSICAL_RADIUS {
                    hits += 1;
                }
            }
            let mut last: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
            for r in &run.trace {
                let key = (r.state_index, r.k, r.l);
                if last.get(&key).is_some_and(|prev| r.f_cost > *prev) {
                    monotone = false;
                }
                last.insert(key, r.f_cost);
            }
        }
        ok &= hits >= CLASSICAL_MIN_HITS && monotone;
        summary.push(format!(
            "p={p}: {hits}/{CLASSICAL_SEEDS} within {CLASSICAL_RADIUS}, monotone {monotone}"
        ));
    }
    outcome(ok, summary.join("; "))
}

fn two_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..TWO_POINT_CASES {
        let z = rng.gen_range(1..=TWO_POINT_MAX_Z);
        let offset: f64 = rng.gen_range(-10.0..10.0);
        let coeffs: Vec<f64> = (0..z).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let vars: Vec<Uncertain> = (0..z)
            .map(|_| Uncertain {
                mean: rng.gen_range(-5.0..5.0),
                std: rng.gen_range(0.01..3.0),
            })
            .collect();
        let f =
            |_: &[f64], w: &[f64]| offset + coeffs.iter().zip(w).map(|(a, x)| a * x).sum::<f64>();
        let e = two_point_estimate(f, &[], &vars).unwrap();
        let mean = offset
            + coeffs
                .iter()
                .zip(&vars)
                .map(|(a, v)| a * v.mean)
                .sum::<f64>();
        let std = coeffs
            .iter()
            .zip(&vars)
            .map(|(a, v)| (a * v.std).powi(2))
            .sum::<f64>()
            .sqrt();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel(e.mean, mean)).max(rel(e.std, std));
    }
    outcome(
        worst <= TWO_POINT_REL,
        format!("{TWO_POINT_CASES} cases, worst relative error {worst:e}"),
    )
}

fn random_objectives(rng: &mut ChaCha8Rng) -> Objectives {
    Objectives::new(
        rng.gen_range(0..6) as f64 * 0.5,
        rng.gen_range(0..6) as f64,
        rng.gen_range(1..5),
    )
}

fn bare(o: Objectives) -> Solution {
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

fn unit_level() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    for _ in 0..PROPERTY_CASES {
        let (a, b, c) = (
            random_objectives(&mut rng),
            random_objectives(&mut rng),
            random_objectives(&mut rng),
        );
        if dominates(&a, &a) || (dominates(&a, &b) && dominates(&b, &a)) {
            violations += 1;
        }
        if dominates(&a, &b) && dominates(&b, &c) && !dominates(&a, &c) {
            violations += 1;
        }
    }
    let mut archive = ParetoArchive::new();
    for i in 0..PROPERTY_CASES {
        if i % 16 == 0 {
            archive = ParetoArchive::new();
        }
        archive.update(bare(random_objectives(&mut rng)));
        if !archive.is_nondominated() {
            violations += 1;
        }
    }
    let spot = hop_distance(3).unwrap() == 4
        && qnetopt::metrics::j_star_from_x(10.0, 1.0, 100.0).unwrap() == 1.0
        && {
            let e = two_point_estimate(
                |_, w| 2.0 * w[0],
                &[],
                &[Uncertain {
                    mean: 1.0,
                    std: 0.5,
                }],
            )
            .unwrap();
            (e.mean, e.std) == (2.0, 1.0)
        };
    outcome(
        violations == 0 && spot,
        format!("{PROPERTY_CASES} dominance and {PROPERTY_CASES} archive cases, {violations} violations; formula unit tests run with `cargo test`"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("fig1.json"),
        topologies::switcher_example().to_json_string().unwrap(),
    )
    .unwrap();
    fs::write(
        p.join("diamond.json"),
        topologies::diamond().to_json_string().unwrap(),
    )
    .unwrap();
    fs::write(
        p.join("classical.json"),
        r#"{"p": 2, "S": 5, "quadratic": {"center": [1.0, -0.5]}}"#,
    )
    .unwrap();
    let run = |args: &[&str], out: &str| -> Vec<u8> {
        let status = Command::new(env!("CARGO_BIN_EXE_qnetopt"))
            .current_dir(p)
            .args(["--seed", "11", "-o", out])
            .args(args)
            .status()
            .unwrap();
        assert!(status.success(), "{args:?}");
        let path = p.join(out);
        if path.is_dir() {
            let mut names: Vec<_> = fs::read_dir(&path)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            names.sort();
            names.iter().flat_map(|f| fs::read(f).unwrap()).collect()
        } else {
            fs::read(path).unwrap()
        }
    };
    run(
        &[
            "quantum",
            "--net",
            "fig1.json",
            "--source",
            "0",
            "--dest",
            "5",
            "--iters",
            "300",
        ],
        "front.json",
    );
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("gen", vec!["gen"]),
        (
            "quantum",
            vec![
                "quantum",
                "--net",
                "fig1.json",
                "--source",
                "0",
                "--dest",
                "5",
                "--iters",
                "300",
            ],
        ),
        (
            "schedule",
            vec!["schedule", "--net", "fig1.json", "--front", "front.json"],
        ),
        ("classical", vec!["classical", "--config", "classical.json"]),
        (
            "metrics",
            vec![
                "metrics",
                "--found",
                "front.json",
                "--reference",
                "front.json",
            ],
        ),
        ("curves", vec!["curves"]),
        (
            "oracle front",
            vec![
                "oracle",
                "front",
                "--net",
                "diamond.json",
                "--source",
                "0",
                "--dest",
                "3",
            ],
        ),
        (
            "pipeline",
            vec![
                "pipeline",
                "--net",
                "fig1.json",
                "--source",
                "0",
                "--dest",
                "5",
                "--iters",
                "200",
            ],
        ),
    ];
    let mut differing = Vec::new();
    for (name, args) in &cases {
        if run(args, "a.out") != run(args, "b.out") {
            differing.push(*name);
        }
        for out in ["a.out", "b.out"] {
            let path = p.join(out);
            let _ = if path.is_dir() {
                fs::remove_dir_all(path)
            } else {
                fs::remove_file(path)
            };
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} subcommands, differing {differing:?}", cases.len()),
    )
}

fn main() {
    let criteria: Vec<(&str, Check)> = vec![
        (
            "1 analytic curves",
            Box::new(|| timed(CURVE_RUNTIME, curves)),
        ),
        (
            "2 convergence trend",
            Box::new(|| timed(TREND_RUNTIME, trend)),
        ),
        (
            "3 oracle pareto equivalence",
            Box::new(|| timed(FRONT_RUNTIME, oracle_front)),
        ),
        (
            "4 scheduling validity",
            Box::new(|| timed(SCHED_RUNTIME, scheduling)),
        ),
        (
            "5 classical convergence",
            Box::new(|| timed(CLASSICAL_RUNTIME, classical)),
        ),
        (
            "6 two-point exactness",
            Box::new(|| timed(TWO_POINT_RUNTIME, two_point)),
        ),
        ("7 unit-level properties", Box::new(unit_level)),
        ("8 determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
