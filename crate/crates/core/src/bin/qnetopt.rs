use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use qnetopt::classical::{ClassicalConfig, ClassicalRun, CostArrays, NodeCost};
use qnetopt::generate::{generate_network, GenParams};
use qnetopt::metrics::{
    emit_curves, mean_front_distance, pareto_distance_raw, solution_ratio, write_curves_csv,
    CurveGrid, DistanceParams,
};
use qnetopt::model::{
    build_memory_utilization_graph, link_cost, NetworkFile, NodeId, QuantumNetwork,
};
use qnetopt::oracle::{
    enumerate_trees, exact_min_weighted_coloring, exact_pareto_front, EnumerationBudget,
};
use qnetopt::output::{
    load_network, parse_maybe_enveloped, read_input, resolve_node, write_csv_meta, Envelope, Meta,
};
use qnetopt::quantum::{
    optimize_replicated, sorted_records, AggregateWeights, FrontReport, Objectives, QuantumConfig,
    SolutionRecord,
};
use qnetopt::schedule::{
    physical_map, schedule_tree, ConflictGraph, ConflictRecord, ScheduleRecord,
};
use qnetopt::tree::{BuildParams, NodeSets, ThroughputTree};
use qnetopt::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "qnetopt",
    version,
    about = "Multilayer optimization for quantum repeater networks"
)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (directory for `pipeline`); stdout when omitted.
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Cross-check results against the exhaustive oracle.
    #[arg(long, global = true)]
    oracle: bool,
    /// Independent seeds to run concurrently and merge.
    #[arg(long, global = true, default_value_t = 1)]
    replicas: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random chain network.
    Gen(GenArgs),
    /// Search the quantum layer for a Pareto front.
    Quantum(QuantumArgs),
    /// Schedule one front member or tree.
    Schedule(ScheduleArgs),
    /// Run the classical-layer optimizer.
    Classical(ClassicalArgs),
    /// Compare a found front with a reference front.
    Metrics(MetricsArgs),
    /// Sample the step-size and cost curves.
    Curves(CurvesArgs),
    /// Exhaustive references.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Quantum search, scheduling, classical optimization and metrics in one go.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long, default_value_t = 7)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    switchers: usize,
    #[arg(long, default_value_t = 3)]
    levels: u32,
    #[arg(long, default_value_t = 0.7)]
    fidelity_min: f64,
    #[arg(long, default_value_t = 1.0)]
    fidelity_max: f64,
    #[arg(long, default_value_t = 1.0)]
    throughput_min: f64,
    #[arg(long, default_value_t = 10.0)]
    throughput_max: f64,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long)]
    source: String,
    #[arg(long)]
    dest: String,
    /// Restrict the search to one switcher mode.
    #[arg(long)]
    mode: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    varsigma: f64,
    #[arg(long, default_value_t = 1.0)]
    upsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_star: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    phi: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    slot_duration: f64,
}

#[derive(Args, Debug)]
struct QuantumArgs {
    #[arg(long)]
    net: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    #[arg(long)]
    net: PathBuf,
    /// Output of `quantum` or `oracle front`.
    #[arg(long, conflicts_with = "tree", required_unless_present = "tree")]
    front: Option<PathBuf>,
    /// A bare tree record.
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value_t = 1.0)]
    slot_duration: f64,
}

#[derive(Args, Debug)]
struct ClassicalArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long)]
    found: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    chi: f64,
}

#[derive(Args, Debug, Serialize)]
struct CurvesArgs {
    /// Upper end of the phi_min range; the range starts at 0.
    #[arg(long, default_value_t = 2e-3)]
    phi_min: f64,
    #[arg(long, default_value_t = 21)]
    phi_min_points: usize,
    #[arg(long, default_value_t = 500.0)]
    phi_max_mult: f64,
    #[arg(long, default_value_t = 10.0)]
    kappa_max: f64,
    #[arg(long, default_value_t = 101)]
    kappa_points: usize,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    jp: f64,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Exact Pareto front by tree enumeration.
    Front {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        dest: String,
        #[arg(long)]
        mode: Option<u32>,
        #[arg(long, default_value_t = 1.0)]
        slot_duration: f64,
    },
    /// Minimum palette of a weighted conflict graph.
    Coloring {
        #[arg(long)]
        conflicts: PathBuf,
    },
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    net: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Classical config; derived from the best front member when omitted.
    #[arg(long)]
    classical_config: Option<PathBuf>,
    /// Reference run length as a multiple of --iters.
    #[arg(long, default_value_t = 100)]
    reference_mult: usize,
    #[arg(long, default_value_t = 3.0)]
    chi: f64,
}

fn main() -> ExitCode {
    let env = env_logger::Env::new().filter_or("QNETOPT_LOG", "error");
    env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            report(&Error::Usage(
                text.trim().trim_start_matches("error: ").to_string(),
            ));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(if matches!(e, Error::Usage(_)) { 2 } else { 1 })
        }
    }
}

fn report(e: &Error) {
    let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
    eprintln!("{body}");
}

fn run(cli: &Cli) -> Result<()> {
    if cli.replicas == 0 {
        return Err(Error::Usage("--replicas must be at least 1".into()));
    }
    match &cli.command {
        Command::Gen(a) => gen(cli, a),
        Command::Quantum(a) => quantum(cli, a),
        Command::Schedule(a) => schedule(cli, a),
        Command::Classical(a) => classical(cli, a),
        Command::Metrics(a) => metrics(cli, a),
        Command::Curves(a) => curves(cli, a),
        Command::Oracle(OracleCommand::Front {
            net,
            source,
            dest,
            mode,
            slot_duration,
        }) => oracle_front(cli, net, source, dest, *mode, *slot_duration),
        Command::Oracle(OracleCommand::Coloring { conflicts }) => oracle_coloring(cli, conflicts),
        Command::Pipeline(a) => pipeline(cli, a),
    }
}

fn emit(out: Option<&Path>, text: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(cli: &Cli, config: Value, data: T) -> Result<()> {
    emit(
        cli.out.as_deref(),
        Envelope::new(cli.seed, config, data).to_json()?.as_bytes(),
    )
}

/// Content digest used in config echoes so that identical inputs hash the
/// same regardless of where they live.
fn input_digest(path: &Path) -> Result<String> {
    let digest = Sha256::digest(read_input(path)?.as_bytes());
    Ok(format!(
        "sha256:{}",
        digest
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()
    ))
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<()> {
    let params = GenParams {
        nodes: a.nodes,
        switchers: a.switchers,
        levels: a.levels,
        fidelity: [a.fidelity_min, a.fidelity_max],
        throughput: [a.throughput_min, a.throughput_max],
        ..GenParams::default()
    };
    let net = generate_network(&params, cli.seed)?;
    log::info!(
        "generated {} nodes, {} links",
        net.nodes().len(),
        net.links().len()
    );
    emit_json(
        cli,
        json!({"command": "gen", "params": params}),
        NetworkFile::from(&net),
    )
}

struct Search {
    network: QuantumNetwork,
    sets: NodeSets,
    source: NodeId,
    dest: NodeId,
    config: QuantumConfig,
}

fn prepare_search(cli: &Cli, net: &Path, s: &SearchArgs) -> Result<Search> {
    let network = load_network(net)?;
    let source = resolve_node(&network, &s.source)?;
    let dest = resolve_node(&network, &s.dest)?;
    let mut sets = NodeSets::single(source, dest);
    sets.mode = s.mode;
    let config = QuantumConfig {
        build: BuildParams {
            omega_star: s.omega_star,
            delta: s.delta,
            phi: s.phi,
            exploration_threshold: s.threshold,
            ..BuildParams::default()
        },
        weights: AggregateWeights {
            rho: s.rho,
            varsigma: s.varsigma,
            upsilon: s.upsilon,
        },
        iterations: s.iters,
        seed: cli.seed,
        unit_slot_duration: s.slot_duration,
    };
    Ok(Search {
        network,
        sets,
        source,
        dest,
        config,
    })
}

#[derive(Serialize, Deserialize)]
struct OracleCheck {
    front: Vec<SolutionRecord>,
    equal: bool,
}

fn same_front(a: &[Objectives], b: &[Objectives]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| y.same_as(x)))
}

fn oracle_records(search: &Search) -> Result<Vec<SolutionRecord>> {
    let graph = build_memory_utilization_graph(&search.network);
    let trees = enumerate_trees(&graph, &search.sets, &EnumerationBudget::default())?;
    let front = exact_pareto_front(
        &trees,
        &graph,
        &search.network,
        search.source,
        search.dest,
        search.config.unit_slot_duration,
    )?;
    Ok(sorted_records(&front))
}

#[derive(Serialize, Deserialize)]
struct QuantumData {
    #[serde(flatten)]
    report: FrontReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleCheck>,
}

fn run_search(replicas: usize, with_oracle: bool, search: &Search) -> Result<QuantumData> {
    let graph = build_memory_utilization_graph(&search.network);
    let run = optimize_replicated(
        &graph,
        &search.network,
        &search.sets,
        search.dest,
        &search.config,
        replicas,
    )?;
    log::info!(
        "{} iterations, {} front members, {} archive changes",
        run.iterations,
        run.archive.len(),
        run.archive_changes
    );
    let report = run.report(search.source, search.dest);
    let oracle = if with_oracle {
        let front = oracle_records(search)?;
        let found: Vec<Objectives> = report
            .front
            .iter()
            .map(SolutionRecord::objectives)
            .collect();
        let exact: Vec<Objectives> = front.iter().map(SolutionRecord::objectives).collect();
        let equal = same_front(&found, &exact);
        if !equal {
            log::warn!("front differs from the oracle front");
        }
        Some(OracleCheck { front, equal })
    } else {
        None
    };
    Ok(QuantumData { report, oracle })
}

fn search_config(cli: &Cli, command: &str, net: &Path, s: &SearchArgs) -> Result<Value> {
    Ok(json!({
        "command": command,
        "net": input_digest(net)?,
        "search": s,
        "replicas": cli.replicas,
        "oracle": cli.oracle,
    }))
}

fn quantum(cli: &Cli, a: &QuantumArgs) -> Result<()> {
    let search = prepare_search(cli, &a.net, &a.search)?;
    let data = run_search(cli.replicas, cli.oracle, &search)?;
    emit_json(cli, search_config(cli, "quantum", &a.net, &a.search)?, data)
}

fn load_front(path: &Path) -> Result<Vec<SolutionRecord>> {
    #[derive(Deserialize)]
    struct Front {
        front: Vec<SolutionRecord>,
    }
    let text = read_input(path)?;
    let env: Envelope<Value> = serde_json::from_str(&text)?;
    let front: Front = serde_json::from_value(env.data)?;
    Ok(front.front)
}

#[derive(Serialize)]
struct ScheduleData {
    conflicts: ConflictRecord,
    palette: u32,
    schedule: ScheduleRecord,
}

fn schedule_data(
    network: &QuantumNetwork,
    tree: &ThroughputTree,
    slot_duration: f64,
) -> Result<ScheduleData> {
    let map = physical_map(network)?;
    let s = schedule_tree(tree, network, &map, slot_duration)?;
    Ok(ScheduleData {
        conflicts: s.conflicts.to_record(),
        palette: s.coloring.palette,
        schedule: ScheduleRecord::new(tree, &s.cycle),
    })
}

fn schedule(cli: &Cli, a: &ScheduleArgs) -> Result<()> {
    let network = load_network(&a.net)?;
    let (record, source) = match (&a.front, &a.tree) {
        (Some(front), _) => {
            let members = load_front(front)?;
            let m = members.get(a.index).ok_or_else(|| {
                Error::Usage(format!(
                    "front has {} members, index {} requested",
                    members.len(),
                    a.index
                ))
            })?;
            (m.tree.clone(), input_digest(front)?)
        }
        (None, Some(tree)) => (
            parse_maybe_enveloped(&read_input(tree)?)?,
            input_digest(tree)?,
        ),
        (None, None) => return Err(Error::Usage("one of --front or --tree is required".into())),
    };
    let tree = ThroughputTree::from_record(&record, &network)?;
    let data = schedule_data(&network, &tree, a.slot_duration)?;
    let config = json!({
        "command": "schedule",
        "net": input_digest(&a.net)?,
        "input": source,
        "index": a.index,
        "slot_duration": a.slot_duration,
    });
    emit_json(cli, config, data)
}

fn trace_csv(run: &ClassicalRun, meta: &Meta) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let best = run
        .best
        .as_ref()
        .map(|b| serde_json::to_string(&b.theta))
        .transpose()?
        .unwrap_or_else(|| "none".into());
    write_csv_meta(
        &mut buf,
        meta,
        &[
            ("minimized_cost", format!("{}", run.minimized_cost)),
            ("removed", run.removed.to_string()),
            ("surviving", run.surviving.len().to_string()),
            ("best_theta", best),
        ],
    )?;
    let mut w = csv::Writer::from_writer(&mut buf);
    for row in &run.trace {
        w.serialize(row)?;
    }
    w.flush()?;
    drop(w);
    Ok(buf)
}

fn classical(cli: &Cli, a: &ClassicalArgs) -> Result<()> {
    let config = ClassicalConfig::from_json_str(&read_input(&a.config)?)?;
    let run = config.run(cli.seed)?;
    log::info!(
        "classical run: cost {}, {} removed",
        run.minimized_cost,
        run.removed
    );
    let echo = json!({"command": "classical", "config": config});
    emit(
        cli.out.as_deref(),
        &trace_csv(&run, &Meta::new(cli.seed, &echo))?,
    )
}

fn metrics_csv(
    found: &[Objectives],
    reference: &[Objectives],
    chi: f64,
    meta: &Meta,
) -> Result<Vec<u8>> {
    let params = DistanceParams::new(chi)?;
    let mean = mean_front_distance(found, reference, &params)?;
    let zeta = solution_ratio(found, reference)?;
    let mut buf = Vec::new();
    write_csv_meta(
        &mut buf,
        meta,
        &[
            ("mean_distance", format!("{mean}")),
            ("solution_ratio", format!("{zeta}")),
            ("chi", format!("{chi}")),
        ],
    )?;
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record([
        "solution",
        "t_s",
        "b_f",
        "path_len",
        "distance",
        "raw_distance",
        "clamped",
        "in_reference",
    ])?;
    for (i, f) in found.iter().enumerate() {
        let mut best: Option<qnetopt::metrics::Distance> = None;
        for r in reference {
            let d = pareto_distance_raw(f, r, &params)?;
            if best.is_none_or(|b| d.raw < b.raw) {
                best = Some(d);
            }
        }
        let best = best.expect("reference is non-empty");
        let hit = reference.iter().any(|r| r.same_as(f));
        w.write_record([
            i.to_string(),
            f.storage_time.to_string(),
            f.throughput.to_string(),
            f.path_length.to_string(),
            best.value.to_string(),
            best.raw.to_string(),
            best.clamped.to_string(),
            hit.to_string(),
        ])?;
    }
    w.flush()?;
    drop(w);
    Ok(buf)
}

fn metrics(cli: &Cli, a: &MetricsArgs) -> Result<()> {
    let objectives = |p: &Path| -> Result<Vec<Objectives>> {
        Ok(load_front(p)?
            .iter()
            .map(SolutionRecord::objectives)
            .collect())
    };
    let found = objectives(&a.found)?;
    let reference = objectives(&a.reference)?;
    let echo = json!({
        "command": "metrics",
        "found": input_digest(&a.found)?,
        "reference": input_digest(&a.reference)?,
        "chi": a.chi,
    });
    emit(
        cli.out.as_deref(),
        &metrics_csv(&found, &reference, a.chi, &Meta::new(cli.seed, &echo))?,
    )
}

fn curves(cli: &Cli, a: &CurvesArgs) -> Result<()> {
    let grid = CurveGrid {
        phi_min_lo: 0.0,
        phi_min_hi: a.phi_min,
        phi_min_points: a.phi_min_points,
        phi_max_mult: a.phi_max_mult,
        kappa_max: a.kappa_max,
        kappa_points: a.kappa_points,
    };
    let rows = emit_curves(a.omega, a.jp, &grid)?;
    let echo = json!({"command": "curves", "args": a});
    let mut buf = Vec::new();
    write_csv_meta(&mut buf, &Meta::new(cli.seed, &echo), &[])?;
    write_curves_csv(&rows, &mut buf)?;
    emit(cli.out.as_deref(), &buf)
}

fn oracle_front(
    cli: &Cli,
    net: &Path,
    source: &str,
    dest: &str,
    mode: Option<u32>,
    slot: f64,
) -> Result<()> {
    let network = load_network(net)?;
    let s = resolve_node(&network, source)?;
    let d = resolve_node(&network, dest)?;
    let mut sets = NodeSets::single(s, d);
    sets.mode = mode;
    let search = Search {
        network,
        sets,
        source: s,
        dest: d,
        config: QuantumConfig {
            unit_slot_duration: slot,
            ..Default::default()
        },
    };
    let front = oracle_records(&search)?;
    let report = FrontReport {
        source: s,
        destination: d,
        iterations: 0,
        unreachable: 0,
        archive_changes: 0,
        front,
    };
    let echo = json!({"command": "oracle front", "net": input_digest(net)?, "mode": mode, "slot_duration": slot});
    emit_json(cli, echo, report)
}

fn oracle_coloring(cli: &Cli, path: &Path) -> Result<()> {
    let text = read_input(path)?;
    let record: ConflictRecord = match parse_maybe_enveloped(&text) {
        Ok(r) => r,
        Err(_) => {
            // a `schedule` output carries the graph under data.conflicts
            let env: Envelope<Value> = serde_json::from_str(&text)?;
            serde_json::from_value(env.data.get("conflicts").cloned().unwrap_or(Value::Null))?
        }
    };
    let graph = ConflictGraph::try_from(record)?;
    let exact = exact_min_weighted_coloring(&graph, &EnumerationBudget::default())?;
    let greedy = qnetopt::schedule::weighted_coloring(&graph)?.palette;
    let echo = json!({"command": "oracle coloring", "conflicts": input_digest(path)?});
    emit_json(
        cli,
        echo,
        json!({"exact_palette": exact, "greedy_palette": greedy, "gap": greedy - exact}),
    )
}

/// Classical cost arrays derived from the path of a front member: one node
/// per path edge in each group, with slopes on the first three components.
fn derived_classical_config(
    network: &QuantumNetwork,
    best: &SolutionRecord,
    slots: &ScheduleRecord,
) -> Result<ClassicalConfig> {
    let mut arrays = CostArrays::default();
    let tree = ThroughputTree::from_record(&best.tree, network)?;
    let path = tree
        .path_to(tree.reached.first().copied().unwrap_or(NodeId(0)))
        .unwrap_or_default();
    for e in path {
        let link = &network.links()[e.link];
        let cost = link_cost(link)?;
        let used = slots
            .assignments
            .iter()
            .find(|a| a.edge == [e.source, e.target])
            .map_or(1, |a| a.slots.len() as u32);
        arrays.t_s.push(NodeCost {
            steps: used,
            link_cost: cost,
            component: Some(0),
            slope: 0.1,
        });
        arrays.b_f.push(NodeCost {
            steps: 1,
            link_cost: cost,
            component: Some(1),
            slope: 0.1,
        });
        arrays.path_len.push(NodeCost {
            steps: link.level,
            link_cost: 0.0,
            component: Some(2),
            slope: 0.1,
        });
    }
    let mut config = ClassicalConfig::from_json_str(r#"{"p": 3, "S": 5}"#)?;
    config.cost_arrays = arrays;
    Ok(config)
}

fn pipeline(cli: &Cli, a: &PipelineArgs) -> Result<()> {
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("qnetopt-out"));
    fs::create_dir_all(&dir)?;
    let search = prepare_search(cli, &a.net, &a.search)?;
    let mut echo = search_config(cli, "pipeline", &a.net, &a.search)?;
    echo["reference_mult"] = json!(a.reference_mult);
    echo["chi"] = json!(a.chi);
    let classical_config = match &a.classical_config {
        Some(p) => {
            echo["classical_config"] = json!(input_digest(p)?);
            Some(ClassicalConfig::from_json_str(&read_input(p)?)?)
        }
        None => None,
    };
    let meta = Meta::new(cli.seed, &echo);
    let write_json = |name: &str, data: Value| -> Result<()> {
        let env = Envelope {
            meta: meta.clone(),
            config: echo.clone(),
            data,
        };
        fs::write(dir.join(name), env.to_json()?)?;
        Ok(())
    };

    let data = run_search(cli.replicas, cli.oracle, &search)?;
    let front = data.report.front.clone();
    write_json("front.json", serde_json::to_value(&data)?)?;
    let best = front
        .first()
        .ok_or_else(|| Error::Unreachable(format!("no tree reached {}", search.dest)))?;

    let tree = ThroughputTree::from_record(&best.tree, &search.network)?;
    let sched = schedule_data(&search.network, &tree, a.search.slot_duration)?;
    write_json("schedule.json", serde_json::to_value(&sched)?)?;

    let classical_config = match classical_config {
        Some(c) => c,
        None => derived_classical_config(&search.network, best, &sched.schedule)?,
    };
    let run = classical_config.run(cli.seed)?;
    fs::write(dir.join("classical_trace.csv"), trace_csv(&run, &meta)?)?;

    let reference: Vec<Objectives> = match &data.oracle {
        Some(o) => o.front.iter().map(SolutionRecord::objectives).collect(),
        None => {
            let mut long = Search {
                config: search.config,
                ..search
            };
            long.config.iterations = a.search.iters.saturating_mul(a.reference_mult.max(1));
            run_search(cli.replicas, false, &long)?
                .report
                .front
                .iter()
                .map(SolutionRecord::objectives)
                .collect()
        }
    };
    let found: Vec<Objectives> = front.iter().map(SolutionRecord::objectives).collect();
    fs::write(
        dir.join("metrics.csv"),
        metrics_csv(&found, &reference, a.chi, &meta)?,
    )?;
    log::info!("pipeline artifacts written to {}", dir.display());
    Ok(())
}
