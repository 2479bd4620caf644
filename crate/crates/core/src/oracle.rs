//! Brute-force references for small instances: every feasible tree, the
//! exact Pareto front over them, and the minimum weighted-coloring palette.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{MemoryUtilizationGraph, NodeId, QuantumNetwork};
use crate::quantum::{decision_vector, dominates, evaluate_tree, Solution};
use crate::schedule::{expand, physical_map, weighted_coloring, ConflictGraph};
use crate::tree::{NodeSets, ThroughputTree, TreeEdge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_gm_edges: usize,
    pub max_conflict_vertices: usize,
    pub max_weight: u32,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_gm_edges: 12,
            max_conflict_vertices: 8,
            max_weight: 3,
        }
    }
}

/// Every minimal edge subset that connects the initial nodes to all
/// reachable destinations as a forest, in subset-bitmask order.
pub fn enumerate_trees(
    graph: &MemoryUtilizationGraph,
    sets: &NodeSets,
    budget: &EnumerationBudget,
) -> Result<Vec<ThroughputTree>> {
    if graph.edges().len() > budget.max_gm_edges {
        return Err(Error::BudgetExceeded(format!(
            "{} memory-utilization edges exceed the enumeration budget of {}",
            graph.edges().len(),
            budget.max_gm_edges
        )));
    }
    if sets.initial.is_empty() || sets.destinations.is_empty() {
        return Err(domain("initial and destination sets must be non-empty"));
    }
    for id in sets.initial.iter().chain(&sets.destinations) {
        if graph.position(*id).is_none() {
            return Err(domain(format!("node {id} is not in the graph")));
        }
    }

    let pairs = graph.pairs(sets.mode);
    let reachable = reachable_from(&sets.initial, pairs.iter().map(|&(s, t, _)| (s, t)));
    let targets: BTreeSet<NodeId> = sets
        .destinations
        .intersection(&reachable)
        .copied()
        .collect();
    if targets.is_empty() {
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let chosen: Vec<(NodeId, NodeId, usize)> = (0..pairs.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| pairs[i])
            .collect();
        if let Some(tree) = as_tree(graph, sets, &targets, &chosen) {
            out.push(tree);
        }
    }
    Ok(out)
}

fn reachable_from(
    roots: &BTreeSet<NodeId>,
    edges: impl Iterator<Item = (NodeId, NodeId)> + Clone,
) -> BTreeSet<NodeId> {
    let mut seen = roots.clone();
    loop {
        let before = seen.len();
        for (s, t) in edges.clone() {
            if seen.contains(&s) {
                seen.insert(t);
            }
        }
        if seen.len() == before {
            return seen;
        }
    }
}

fn as_tree(
    graph: &MemoryUtilizationGraph,
    sets: &NodeSets,
    targets: &BTreeSet<NodeId>,
    chosen: &[(NodeId, NodeId, usize)],
) -> Option<ThroughputTree> {
    let mut has_parent = BTreeSet::new();
    for &(_, t, _) in chosen {
        if sets.initial.contains(&t) || !has_parent.insert(t) {
            return None;
        }
    }
    let reach = reachable_from(&sets.initial, chosen.iter().map(|&(s, t, _)| (s, t)));
    if !targets.is_subset(&reach) || chosen.iter().any(|(s, _, _)| !reach.contains(s)) {
        return None;
    }
    // minimal: every leaf is a destination
    let sources: BTreeSet<NodeId> = chosen.iter().map(|&(s, _, _)| s).collect();
    if chosen
        .iter()
        .any(|(_, t, _)| !sources.contains(t) && !targets.contains(t))
    {
        return None;
    }

    let mut nodes: BTreeSet<NodeId> = chosen.iter().flat_map(|&(s, t, _)| [s, t]).collect();
    nodes.extend(targets.iter().copied());
    let mut edges: Vec<TreeEdge> = chosen
        .iter()
        .map(|&(s, t, link)| {
            let l = graph.link(link);
            TreeEdge {
                source: s,
                target: t,
                link,
                throughput: l.throughput,
                level: l.level,
            }
        })
        .collect();
    edges.sort_by_key(|e| (e.source, e.target));
    Some(ThroughputTree {
        nodes: nodes.into_iter().collect(),
        edges,
        root_set: sets.initial.iter().copied().collect(),
        reached: targets.iter().copied().collect(),
        complete: targets.len() == sets.destinations.len(),
    })
}

/// Evaluates every tree and keeps the nondominated ones. Trees with equal
/// objective triples collapse to the first.
pub fn exact_pareto_front(
    trees: &[ThroughputTree],
    graph: &MemoryUtilizationGraph,
    network: &QuantumNetwork,
    source: NodeId,
    destination: NodeId,
    unit_slot_duration: f64,
) -> Result<Vec<Solution>> {
    let map = physical_map(network)?;
    let mut all = Vec::with_capacity(trees.len());
    for tree in trees {
        if tree.path_to(destination).is_none_or(|p| p.is_empty()) {
            continue;
        }
        let objectives =
            evaluate_tree(tree, network, &map, source, destination, unit_slot_duration)?;
        all.push(Solution {
            decision: decision_vector(tree, graph),
            objectives,
            tree: tree.clone(),
        });
    }
    let mut front: Vec<Solution> = Vec::new();
    for (i, s) in all.iter().enumerate() {
        if all.iter().any(|o| dominates(&o.objectives, &s.objectives)) {
            continue;
        }
        if all[..i].iter().any(|o| o.objectives.same_as(&s.objectives)) {
            continue;
        }
        front.push(s.clone());
    }
    Ok(front)
}

/// Smallest palette that gives every vertex `w(n)` distinct colors with
/// conflicting vertices disjoint.
pub fn exact_min_weighted_coloring(
    graph: &ConflictGraph,
    budget: &EnumerationBudget,
) -> Result<u32> {
    if graph.len() > budget.max_conflict_vertices {
        return Err(Error::BudgetExceeded(format!(
            "{} conflict vertices exceed the budget of {}",
            graph.len(),
            budget.max_conflict_vertices
        )));
    }
    if let Some(&w) = graph.weights().iter().find(|&&w| w > budget.max_weight) {
        return Err(Error::BudgetExceeded(format!(
            "weight {w} exceeds the budget of {}",
            budget.max_weight
        )));
    }
    if graph.is_empty() {
        return Ok(0);
    }
    let upper = weighted_coloring(graph)?.palette;
    let lower = graph.weights().iter().copied().max().unwrap_or(0);
    let ex = expand(graph);
    for k in lower..upper {
        let mut colors = vec![u32::MAX; ex.owner.len()];
        if color_with(&ex.adjacency, &ex.owner, &ex.offsets, k, 0, 0, &mut colors) {
            return Ok(k);
        }
    }
    Ok(upper)
}

/// Backtracking k-coloring of the expanded graph. Copies of one vertex take
/// increasing colors, and a fresh color is at most one above those used.
fn color_with(
    adjacency: &[Vec<usize>],
    owner: &[usize],
    offsets: &[usize],
    k: u32,
    v: usize,
    used: u32,
    colors: &mut [u32],
) -> bool {
    if v == adjacency.len() {
        return true;
    }
    let first_copy = offsets[owner[v]] == v;
    let start = if first_copy { 0 } else { colors[v - 1] + 1 };
    let stop = k.min(used + 1);
    for c in start..stop {
        if adjacency[v].iter().any(|&u| colors[u] == c) {
            continue;
        }
        colors[v] = c;
        if color_with(adjacency, owner, offsets, k, v + 1, used.max(c + 1), colors) {
            return true;
        }
    }
    colors[v] = u32::MAX;
    false
}
