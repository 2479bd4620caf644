//! Pareto optimization of the quantum layer.
//!
//! Each iteration grows a throughput tree, scores it on storage time
//! (minimize), bottleneck throughput (maximize) and path length (minimize),
//! and offers it to a nondominated archive. A changed archive resets the
//! link utilities to their baseline; a stationary archive reinforces them
//! with the weighted score of every archive member.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{MemoryUtilizationGraph, NodeId, QuantumNetwork};
use crate::schedule::{physical_map, schedule_tree, PhysicalMap};
use crate::tree::{
    build_tree_with, distribution, BuildParams, NodeSets, ThroughputTree, TreeRecord, Utilities,
};

/// Relative tolerance for treating two continuous objectives as equal.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    pub storage_time: f64,
    pub throughput: f64,
    pub path_length: u32,
}

impl Objectives {
    pub fn new(storage_time: f64, throughput: f64, path_length: u32) -> Self {
        Self {
            storage_time,
            throughput,
            path_length,
        }
    }

    /// Equal within [`OBJECTIVE_TOLERANCE`] on the continuous objectives and
    /// exactly on path length.
    pub fn same_as(&self, other: &Objectives) -> bool {
        rel_eq(self.storage_time, other.storage_time)
            && rel_eq(self.throughput, other.throughput)
            && self.path_length == other.path_length
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= OBJECTIVE_TOLERANCE * a.abs().max(b.abs())
}

/// `a` dominates `b`: no worse on every objective and strictly better on one.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    let no_worse = a.storage_time <= b.storage_time
        && a.throughput >= b.throughput
        && a.path_length <= b.path_length;
    let strictly = a.storage_time < b.storage_time
        || a.throughput > b.throughput
        || a.path_length < b.path_length;
    no_worse && strictly
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// One bit per memory-utilization edge, in canonical edge order.
    pub decision: Vec<bool>,
    pub objectives: Objectives,
    pub tree: ThroughputTree,
}

impl Solution {
    pub fn dominates(&self, other: &Solution) -> bool {
        dominates(&self.objectives, &other.objectives)
    }

    pub fn to_record(&self) -> SolutionRecord {
        SolutionRecord {
            decision_bits: self
                .decision
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect(),
            t_s: self.objectives.storage_time,
            b_f: self.objectives.throughput,
            path_len: self.objectives.path_length,
            tree: self.tree.to_record(),
        }
    }
}

/// JSON form of a front member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRecord {
    pub decision_bits: String,
    pub t_s: f64,
    pub b_f: f64,
    pub path_len: u32,
    pub tree: TreeRecord,
}

impl SolutionRecord {
    pub fn objectives(&self) -> Objectives {
        Objectives::new(self.t_s, self.b_f, self.path_len)
    }
}

/// Mutually nondominated solutions, in insertion order. Solutions with
/// objectives equal to a member's are not admitted twice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    members: Vec<Solution>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Inserts `candidate` unless a member dominates or duplicates it, and
    /// evicts every member it dominates. Returns whether the archive changed.
    pub fn update(&mut self, candidate: Solution) -> bool {
        if self
            .members
            .iter()
            .any(|m| m.dominates(&candidate) || m.objectives.same_as(&candidate.objectives))
        {
            return false;
        }
        self.members.retain(|m| !candidate.dominates(m));
        self.members.push(candidate);
        true
    }

    /// Folds another archive into this one.
    pub fn merge(&mut self, other: ParetoArchive) {
        for s in other.members {
            self.update(s);
        }
    }

    pub fn is_nondominated(&self) -> bool {
        self.members.iter().enumerate().all(|(i, a)| {
            self.members
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !a.dominates(b))
        })
    }

    pub fn objectives(&self) -> Vec<Objectives> {
        self.members.iter().map(|m| m.objectives).collect()
    }
}

/// Functional form of [`ParetoArchive::update`].
pub fn archive_update(mut archive: ParetoArchive, candidate: Solution) -> (ParetoArchive, bool) {
    let changed = archive.update(candidate);
    (archive, changed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateWeights {
    pub rho: f64,
    pub varsigma: f64,
    pub upsilon: f64,
}

impl Default for AggregateWeights {
    fn default() -> Self {
        Self {
            rho: 1.0,
            varsigma: 1.0,
            upsilon: 1.0,
        }
    }
}

pub fn aggregate_score(objectives: &Objectives, weights: &AggregateWeights) -> f64 {
    weights.rho * objectives.storage_time
        + weights.varsigma * objectives.throughput
        + weights.upsilon * objectives.path_length as f64
}

/// Convex move of `lambda_prime` toward `pi` by `pr`.
pub fn reinforce_utility(lambda_prime: f64, pr: f64, pi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pr) {
        return Err(domain(format!("probability {pr} outside [0, 1]")));
    }
    Ok((1.0 - pr) * lambda_prime + pr * pi)
}

/// Objectives of a tree with respect to `source` and `destination`.
pub fn evaluate_tree(
    tree: &ThroughputTree,
    network: &QuantumNetwork,
    map: &PhysicalMap,
    source: NodeId,
    destination: NodeId,
    unit_slot_duration: f64,
) -> Result<Objectives> {
    let path = tree
        .path_to(destination)
        .ok_or_else(|| Error::Unreachable(format!("destination {destination} not in tree")))?;
    if path.is_empty() {
        return Err(Error::Unreachable(format!(
            "destination {destination} is a root; no path to evaluate"
        )));
    }
    if path[0].source != source {
        return Err(Error::Unreachable(format!(
            "path to {destination} starts at {}, not {source}",
            path[0].source
        )));
    }
    let throughput = path
        .iter()
        .map(|e| e.throughput)
        .fold(f64::INFINITY, f64::min);
    let schedule = schedule_tree(tree, network, map, unit_slot_duration)?;
    Ok(Objectives {
        storage_time: schedule.cycle.total_storage_time,
        throughput,
        path_length: path.len() as u32,
    })
}

/// Decision bits: an edge is selected when the tree holds its (tx, rx) pair.
pub fn decision_vector(tree: &ThroughputTree, graph: &MemoryUtilizationGraph) -> Vec<bool> {
    graph
        .edges()
        .iter()
        .map(|e| tree.contains_edge(e.tx, e.rx))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumConfig {
    pub build: BuildParams,
    pub weights: AggregateWeights,
    pub iterations: usize,
    pub seed: u64,
    pub unit_slot_duration: f64,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            build: BuildParams::default(),
            weights: AggregateWeights::default(),
            iterations: 1000,
            seed: 0,
            unit_slot_duration: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRun {
    pub archive: ParetoArchive,
    pub iterations: usize,
    /// Iterations whose tree missed the primary destination.
    pub unreachable: usize,
    /// Iterations that changed the archive.
    pub archive_changes: usize,
}

/// Runs the archive-driven tree search for `config.iterations` iterations.
pub fn optimize_quantum_layer(
    graph: &MemoryUtilizationGraph,
    network: &QuantumNetwork,
    sets: &NodeSets,
    primary_destination: NodeId,
    config: &QuantumConfig,
) -> Result<QuantumRun> {
    config.build.validate()?;
    if !sets.destinations.contains(&primary_destination) {
        return Err(domain(format!(
            "primary destination {primary_destination} is not a destination"
        )));
    }
    if sets.initial.len() != 1 {
        return Err(domain("path objectives need exactly one source node"));
    }
    let source = *sets.initial.iter().next().unwrap();
    if source == primary_destination {
        return Err(domain("source and destination coincide"));
    }
    let map = physical_map(network)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut utilities = Utilities::from_graph(graph)?;
    let mut archive = ParetoArchive::new();
    let mut unreachable = 0;
    let mut archive_changes = 0;

    for _ in 0..config.iterations {
        let tree = build_tree_with(graph, sets, &config.build, &mut utilities, &mut rng)?;
        if !tree.reached.contains(&primary_destination) {
            unreachable += 1;
            continue;
        }
        let objectives = evaluate_tree(
            &tree,
            network,
            &map,
            source,
            primary_destination,
            config.unit_slot_duration,
        )?;
        let candidate = Solution {
            decision: decision_vector(&tree, graph),
            objectives,
            tree,
        };
        if archive.update(candidate) {
            archive_changes += 1;
            utilities.reset();
        } else {
            reinforce(graph, &mut utilities, &archive, config)?;
        }
        debug_assert!(archive.is_nondominated());
    }
    if archive.is_empty() && config.iterations > 0 {
        log::warn!("no iteration reached destination {primary_destination}; archive is empty");
    }

    Ok(QuantumRun {
        archive,
        iterations: config.iterations,
        unreachable,
        archive_changes,
    })
}

/// Serializable summary of a run; the front is sorted by storage time,
/// then throughput (descending), then path length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontReport {
    pub source: NodeId,
    pub destination: NodeId,
    pub iterations: usize,
    pub unreachable: usize,
    pub archive_changes: usize,
    pub front: Vec<SolutionRecord>,
}

/// Front members in presentation order.
pub fn sorted_records(members: &[Solution]) -> Vec<SolutionRecord> {
    let mut records: Vec<SolutionRecord> = members.iter().map(Solution::to_record).collect();
    records.sort_by(|a, b| {
        a.t_s
            .total_cmp(&b.t_s)
            .then(b.b_f.total_cmp(&a.b_f))
            .then(a.path_len.cmp(&b.path_len))
            .then(a.decision_bits.cmp(&b.decision_bits))
    });
    records
}

impl FrontReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl QuantumRun {
    pub fn report(&self, source: NodeId, destination: NodeId) -> FrontReport {
        FrontReport {
            source,
            destination,
            iterations: self.iterations,
            unreachable: self.unreachable,
            archive_changes: self.archive_changes,
            front: sorted_records(self.archive.members()),
        }
    }
}

/// Pulls every link utility toward each member's aggregate score, in
/// proportion to the link's selection probability among all out-links of
/// its transmitter.
fn reinforce(
    graph: &MemoryUtilizationGraph,
    utilities: &mut Utilities,
    archive: &ParetoArchive,
    config: &QuantumConfig,
) -> Result<()> {
    for member in archive.members() {
        let pi = aggregate_score(&member.objectives, &config.weights);
        let mut pr = vec![0.0; graph.links().len()];
        for node in 0..graph.node_count() {
            let links: Vec<usize> = graph.successors(node).iter().map(|s| s.link).collect();
            if links.is_empty() {
                continue;
            }
            for (l, p) in links
                .iter()
                .zip(distribution(graph, utilities, &links, &config.build)?)
            {
                pr[*l] = p;
            }
        }
        for (l, p) in pr.into_iter().enumerate() {
            utilities.current[l] = reinforce_utility(utilities.current[l], p.clamp(0.0, 1.0), pi)?;
        }
    }
    Ok(())
}

/// Runs `replicas` seeds (`seed`, `seed + 1`, ...) on separate threads and
/// merges their archives in seed order.
pub fn optimize_replicated(
    graph: &MemoryUtilizationGraph,
    network: &QuantumNetwork,
    sets: &NodeSets,
    primary_destination: NodeId,
    config: &QuantumConfig,
    replicas: usize,
) -> Result<QuantumRun> {
    let replicas = replicas.max(1);
    let runs: Vec<Result<QuantumRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..replicas)
            .map(|r| {
                let cfg = QuantumConfig {
                    seed: config.seed.wrapping_add(r as u64),
                    ..*config
                };
                scope.spawn(move || {
                    optimize_quantum_layer(graph, network, sets, primary_destination, &cfg)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("replica thread panicked"))
            .collect()
    });
    let mut merged = QuantumRun {
        archive: ParetoArchive::new(),
        iterations: 0,
        unreachable: 0,
        archive_changes: 0,
    };
    for run in runs {
        let run = run?;
        merged.iterations += run.iterations;
        merged.unreachable += run.unreachable;
        merged.archive_changes += run.archive_changes;
        merged.archive.merge(run.archive);
    }
    Ok(merged)
}
