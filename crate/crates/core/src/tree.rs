//! Stochastic construction of entanglement-throughput trees over the
//! memory-utilization graph.
//!
//! Growth proceeds from a frontier of already-visited nodes. Each step picks
//! a frontier node, computes the utility/cost weighted distribution over its
//! unvisited neighbors and either exploits (most probable neighbor) or
//! explores (uniform neighbor). The finished tree is pruned down to the
//! edges that lead to a reached destination.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{edge_cost, MemoryUtilizationGraph, ModeId, NodeId, QuantumNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    /// Utility exponent.
    pub omega_star: f64,
    /// Cost exponent.
    pub delta: f64,
    /// Evaporation rate pulling utilities back toward their initial value.
    pub phi: f64,
    /// Draws above this value exploit, draws at or below it explore.
    pub exploration_threshold: f64,
    pub max_steps: usize,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            omega_star: 1.0,
            delta: 1.0,
            phi: 0.1,
            exploration_threshold: 0.5,
            max_steps: 1_000_000,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(domain(format!("phi {} outside [0, 1]", self.phi)));
        }
        if !(self.exploration_threshold > 0.0 && self.exploration_threshold < 1.0) {
            return Err(domain(format!(
                "exploration threshold {} outside (0, 1)",
                self.exploration_threshold
            )));
        }
        if !(self.omega_star >= 0.0 && self.delta >= 0.0) {
            return Err(domain("omega_star and delta must be non-negative"));
        }
        if self.max_steps == 0 {
            return Err(domain("max_steps must be positive"));
        }
        Ok(())
    }
}

/// Roots and destinations of one tree construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSets {
    pub initial: BTreeSet<NodeId>,
    pub destinations: BTreeSet<NodeId>,
    /// Restrict growth to edges active in this mode; `None` uses every mode.
    pub mode: Option<ModeId>,
}

impl NodeSets {
    pub fn new(
        initial: impl IntoIterator<Item = NodeId>,
        destinations: impl IntoIterator<Item = NodeId>,
    ) -> Self {
        Self {
            initial: initial.into_iter().collect(),
            destinations: destinations.into_iter().collect(),
            mode: None,
        }
    }

    pub fn single(source: NodeId, destination: NodeId) -> Self {
        Self::new([source], [destination])
    }
}

/// Per-link utilities: the baseline each run starts from and the current,
/// mutable values.
#[derive(Debug, Clone, PartialEq)]
pub struct Utilities {
    pub initial: Vec<f64>,
    pub current: Vec<f64>,
}

impl Utilities {
    /// Baseline utilities from the links' raw utility and throughput.
    pub fn from_graph(graph: &MemoryUtilizationGraph) -> Result<Self> {
        let initial = graph
            .links()
            .iter()
            .map(|l| utility_update(l.utility, l.throughput))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            current: initial.clone(),
            initial,
        })
    }

    pub fn reset(&mut self) {
        self.current.copy_from_slice(&self.initial);
    }
}

/// Throughput-adjusted utility `lambda / (1 + B_F * lambda)`.
pub fn utility_update(lambda: f64, throughput: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(domain(format!(
            "utility {lambda} must be a non-negative finite number"
        )));
    }
    if !(throughput > 0.0) {
        return Err(domain(format!("throughput {throughput} must be positive")));
    }
    Ok(lambda / (1.0 + throughput * lambda))
}

/// Convex pull of `current` toward `initial` by `phi`.
pub fn evaporate_utility(current: f64, initial: f64, phi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(domain(format!("phi {phi} outside [0, 1]")));
    }
    Ok((1.0 - phi) * current + phi * initial)
}

fn weight(
    graph: &MemoryUtilizationGraph,
    utilities: &Utilities,
    link: usize,
    params: &BuildParams,
) -> Result<f64> {
    let lambda = utilities.current[link];
    let omega = edge_cost(graph.link(link))?;
    let w = lambda.powf(params.omega_star) * omega.powf(params.delta);
    if !w.is_finite() || w < 0.0 {
        return Err(domain(format!(
            "selection weight {w} of link {link} is not finite"
        )));
    }
    Ok(w)
}

/// Normalized selection distribution over the given candidate links.
/// Falls back to uniform when every weight is zero.
pub(crate) fn distribution(
    graph: &MemoryUtilizationGraph,
    utilities: &Utilities,
    links: &[usize],
    params: &BuildParams,
) -> Result<Vec<f64>> {
    let weights = links
        .iter()
        .map(|&l| weight(graph, utilities, l, params))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        Ok(weights.into_iter().map(|w| w / total).collect())
    } else {
        Ok(vec![1.0 / links.len() as f64; links.len()])
    }
}

/// Probability that `from` selects `to` among the `feasible` neighbors.
/// Zero when `to` is not feasible.
pub fn selection_probability(
    graph: &MemoryUtilizationGraph,
    utilities: &Utilities,
    from: NodeId,
    to: NodeId,
    feasible: &BTreeSet<NodeId>,
    params: &BuildParams,
) -> Result<f64> {
    if feasible.is_empty() {
        return Err(Error::EmptyFeasibleSet(from.0));
    }
    if !feasible.contains(&to) {
        return Ok(0.0);
    }
    let pos = graph
        .position(from)
        .ok_or_else(|| domain(format!("unknown node {from}")))?;
    let mut links = Vec::with_capacity(feasible.len());
    let mut at = None;
    for &x in feasible {
        let xp = graph
            .position(x)
            .ok_or_else(|| domain(format!("unknown node {x}")))?;
        let succ = graph
            .successors(pos)
            .iter()
            .find(|s| s.target == xp)
            .ok_or_else(|| domain(format!("{x} is not a neighbor of {from}")))?;
        if x == to {
            at = Some(links.len());
        }
        links.push(succ.link);
    }
    let probs = distribution(graph, utilities, &links, params)?;
    Ok(probs[at.expect("to is feasible")])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub source: NodeId,
    pub target: NodeId,
    /// Index into the network's (and graph's) link list.
    pub link: usize,
    pub throughput: f64,
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputTree {
    pub nodes: Vec<NodeId>,
    /// Sorted by (source, target).
    pub edges: Vec<TreeEdge>,
    pub root_set: Vec<NodeId>,
    pub reached: Vec<NodeId>,
    /// True when every destination was reached.
    pub complete: bool,
}

impl ThroughputTree {
    fn parent_of(&self, node: NodeId) -> Option<&TreeEdge> {
        self.edges.iter().find(|e| e.target == node)
    }

    /// Edges from a root down to `dest`, in path order.
    pub fn path_to(&self, dest: NodeId) -> Option<Vec<&TreeEdge>> {
        if !self.nodes.contains(&dest) {
            return None;
        }
        let mut path = Vec::new();
        let mut at = dest;
        while let Some(e) = self.parent_of(at) {
            path.push(e);
            at = e.source;
            if path.len() > self.edges.len() {
                return None;
            }
        }
        path.reverse();
        Some(path)
    }

    pub fn root_of(&self, node: NodeId) -> NodeId {
        let mut at = node;
        let mut hops = 0;
        while let Some(e) = self.parent_of(at) {
            at = e.source;
            hops += 1;
            if hops > self.edges.len() {
                break;
            }
        }
        at
    }

    pub fn contains_edge(&self, source: NodeId, target: NodeId) -> bool {
        self.edges
            .iter()
            .any(|e| e.source == source && e.target == target)
    }

    pub fn to_record(&self) -> TreeRecord {
        TreeRecord {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| TreeEdgeRecord {
                    source: e.source,
                    target: e.target,
                    throughput: e.throughput,
                    level: e.level,
                })
                .collect(),
            reached: self.reached.clone(),
        }
    }

    /// Rebuilds a tree from its JSON record, resolving links against `network`.
    pub fn from_record(record: &TreeRecord, network: &QuantumNetwork) -> Result<Self> {
        let mut edges = Vec::with_capacity(record.edges.len());
        for e in &record.edges {
            let link = network.link_index(e.source, e.target).ok_or_else(|| {
                Error::InvalidNetwork(format!(
                    "tree edge {} -> {} has no link",
                    e.source, e.target
                ))
            })?;
            let l = &network.links()[link];
            edges.push(TreeEdge {
                source: e.source,
                target: e.target,
                link,
                throughput: l.throughput,
                level: l.level,
            });
        }
        edges.sort_by_key(|e| (e.source, e.target));
        let targets: BTreeSet<NodeId> = edges.iter().map(|e| e.target).collect();
        let mut nodes: BTreeSet<NodeId> = record.nodes.iter().copied().collect();
        nodes.extend(record.reached.iter().copied());
        let root_set = nodes
            .iter()
            .copied()
            .filter(|n| !targets.contains(n))
            .collect();
        Ok(Self {
            nodes: nodes.into_iter().collect(),
            edges,
            root_set,
            reached: record.reached.clone(),
            complete: true,
        })
    }
}

/// JSON form of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRecord {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<TreeEdgeRecord>,
    pub reached: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEdgeRecord {
    pub source: NodeId,
    pub target: NodeId,
    pub throughput: f64,
    pub level: u32,
}

/// Collapses parallel edges between the same (source, target) pair, keeping
/// the one with the higher throughput.
pub fn merge_parallel_edges(edges: Vec<TreeEdge>) -> Vec<TreeEdge> {
    let mut best: BTreeMap<(NodeId, NodeId), TreeEdge> = BTreeMap::new();
    for e in edges {
        match best.get(&(e.source, e.target)) {
            Some(prev) if prev.throughput >= e.throughput => {}
            _ => {
                best.insert((e.source, e.target), e);
            }
        }
    }
    best.into_values().collect()
}

/// Builds one tree with fresh baseline utilities and its own RNG.
pub fn build_tree(
    graph: &MemoryUtilizationGraph,
    sets: &NodeSets,
    params: &BuildParams,
    rng_seed: u64,
) -> Result<ThroughputTree> {
    let mut utilities = Utilities::from_graph(graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    build_tree_with(graph, sets, params, &mut utilities, &mut rng)
}

/// Builds one tree, evaporating the caller's utilities along the chosen links.
pub fn build_tree_with<R: Rng + ?Sized>(
    graph: &MemoryUtilizationGraph,
    sets: &NodeSets,
    params: &BuildParams,
    utilities: &mut Utilities,
    rng: &mut R,
) -> Result<ThroughputTree> {
    params.validate()?;
    if sets.initial.is_empty() {
        return Err(domain("initial node set is empty"));
    }
    if sets.destinations.is_empty() {
        return Err(domain("destination set is empty"));
    }
    if utilities.current.len() != graph.links().len() {
        return Err(Error::DimensionMismatch {
            expected: graph.links().len(),
            found: utilities.current.len(),
        });
    }
    let resolve = |id: &NodeId| {
        graph
            .position(*id)
            .ok_or_else(|| domain(format!("node {id} is not in the graph")))
    };
    let roots = sets
        .initial
        .iter()
        .map(resolve)
        .collect::<Result<Vec<_>>>()?;
    let is_dest = {
        let mut v = vec![false; graph.node_count()];
        for d in &sets.destinations {
            v[resolve(d)?] = true;
        }
        v
    };

    let n = graph.node_count();
    let mut visited = vec![false; n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut reached = BTreeSet::new();
    for &r in &roots {
        visited[r] = true;
        if is_dest[r] {
            reached.insert(r);
        }
    }
    let mut frontier = roots.clone();
    let mut grown: Vec<TreeEdge> = Vec::new();
    let mut steps = 0usize;
    let mut feasible: Vec<(usize, usize)> = Vec::new();
    let mut links: Vec<usize> = Vec::new();

    while !frontier.is_empty() && reached.len() < sets.destinations.len() {
        steps += 1;
        if steps > params.max_steps {
            return Err(Error::Truncated(params.max_steps));
        }
        let slot = rng.gen_range(0..frontier.len());
        let from = frontier[slot];

        feasible.clear();
        feasible.extend(
            graph
                .successors(from)
                .iter()
                .filter(|s| !visited[s.target] && sets.mode.is_none_or(|m| s.modes.contains(&m)))
                .map(|s| (s.target, s.link)),
        );
        if feasible.is_empty() {
            frontier.swap_remove(slot);
            continue;
        }

        links.clear();
        links.extend(feasible.iter().map(|&(_, l)| l));
        let probs = distribution(graph, utilities, &links, params)?;

        // x drawn from (0, 1]
        let x = 1.0 - rng.gen::<f64>();
        let pick = if x > params.exploration_threshold {
            // successors are sorted by target, so the first maximum is the lowest id
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate() {
                if p > probs[best] {
                    best = i;
                }
            }
            best
        } else {
            rng.gen_range(0..feasible.len())
        };
        let (to, link) = feasible[pick];

        visited[to] = true;
        parent[to] = Some((from, link));
        frontier.push(to);
        if is_dest[to] {
            reached.insert(to);
        }
        let l = graph.link(link);
        grown.push(TreeEdge {
            source: graph.node_id(from),
            target: graph.node_id(to),
            link,
            throughput: l.throughput,
            level: l.level,
        });
        utilities.current[link] =
            evaporate_utility(utilities.current[link], utilities.initial[link], params.phi)?;
    }

    // Keep only the edges on root -> reached destination paths.
    let mut keep = BTreeSet::new();
    let mut nodes = BTreeSet::new();
    for &d in &reached {
        nodes.insert(graph.node_id(d));
        let mut at = d;
        while let Some((p, _)) = parent[at] {
            keep.insert((graph.node_id(p), graph.node_id(at)));
            nodes.insert(graph.node_id(p));
            at = p;
        }
    }
    let edges = merge_parallel_edges(
        grown
            .into_iter()
            .filter(|e| keep.contains(&(e.source, e.target)))
            .collect(),
    );

    Ok(ThroughputTree {
        nodes: nodes.into_iter().collect(),
        edges,
        root_set: sets.initial.iter().copied().collect(),
        complete: reached.len() == sets.destinations.len(),
        reached: reached.into_iter().map(|p| graph.node_id(p)).collect(),
    })
}
