//! Conflict graphs, weighted coloring and periodic assignment cycles.
//!
//! Tree edges that ride on a common physical link conflict. Each edge needs
//! as many time units as its fidelity weight demands; the weighted coloring
//! expands every vertex into a clique of that many copies and colors the
//! expansion greedily. Colors are time units of the resulting cycle.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{hop_distance, NodeId, QuantumNetwork};
use crate::tree::ThroughputTree;

/// Time units a connection of fidelity `fidelity` needs per cycle:
/// 1 at `f_max`, otherwise `ceil(f_max / fidelity)`.
pub fn link_weight(fidelity: f64, f_max: f64) -> Result<u32> {
    if !(f_max > 0.0 && f_max <= 1.0) {
        return Err(domain(format!("f_max {f_max} outside (0, 1]")));
    }
    if !(fidelity > 0.0) || fidelity > f_max {
        return Err(domain(format!("fidelity {fidelity} outside (0, {f_max}]")));
    }
    if fidelity == f_max {
        return Ok(1);
    }
    Ok((f_max / fidelity).ceil() as u32)
}

/// Physical links carried by each network link, keyed by (source, target).
pub type PhysicalMap = BTreeMap<(NodeId, NodeId), BTreeSet<u64>>;

/// Explicit ids live above the segment id space.
const EXPLICIT_ID_BASE: u64 = 1 << 32;

/// Default physical mapping. A link of level `l` rides on the `2^(l-1)`
/// consecutive L1 segments starting at its lower endpoint, where nodes sit
/// on a chain in id order and segment `k` joins chain positions `k` and
/// `k + 1`. A link with an explicit `physical_link` maps to that id alone.
pub fn physical_map(network: &QuantumNetwork) -> Result<PhysicalMap> {
    let segments = network.nodes().len().saturating_sub(1) as u64;
    let mut map = PhysicalMap::new();
    for link in network.links() {
        let ids: BTreeSet<u64> = match link.physical_link {
            Some(id) => [EXPLICIT_ID_BASE + id].into(),
            None => {
                let a = network.position(link.source).unwrap() as u64;
                let b = network.position(link.target).unwrap() as u64;
                let start = a.min(b);
                let end = (start + hop_distance(link.level)?).min(segments.max(start + 1));
                (start..end).collect()
            }
        };
        map.insert((link.source, link.target), ids);
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    weights: Vec<u32>,
    /// Normalized (low, high) pairs, sorted and unique.
    conflicts: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn new(
        weights: Vec<u32>,
        conflicts: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = weights.len();
        if let Some(w) = weights.iter().find(|&&w| w == 0) {
            return Err(domain(format!("vertex weight {w} must be at least 1")));
        }
        let mut set = BTreeSet::new();
        for (a, b) in conflicts {
            if a == b {
                return Err(domain(format!("conflict edge ({a}, {b}) is a self-loop")));
            }
            if a >= n || b >= n {
                return Err(domain(format!(
                    "conflict edge ({a}, {b}) outside {n} vertices"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let conflicts: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &conflicts {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Ok(Self {
            weights,
            conflicts,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn conflicts(&self) -> &[(usize, usize)] {
        &self.conflicts
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn to_record(&self) -> ConflictRecord {
        ConflictRecord {
            weights: self.weights.clone(),
            edges: self.conflicts.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

/// JSON form of a conflict graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConflictRecord {
    pub weights: Vec<u32>,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<ConflictRecord> for ConflictGraph {
    type Error = Error;

    fn try_from(r: ConflictRecord) -> Result<Self> {
        ConflictGraph::new(r.weights, r.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

/// One vertex per tree edge (in tree edge order); two vertices conflict when
/// their physical link sets intersect.
pub fn build_conflict_graph(
    tree: &ThroughputTree,
    network: &QuantumNetwork,
    map: &PhysicalMap,
) -> Result<ConflictGraph> {
    let mut phys = Vec::with_capacity(tree.edges.len());
    let mut weights = Vec::with_capacity(tree.edges.len());
    for e in &tree.edges {
        let ids = map.get(&(e.source, e.target)).ok_or_else(|| {
            Error::Mapping(format!("no physical link for {} -> {}", e.source, e.target))
        })?;
        phys.push(ids);
        let link = network.links().get(e.link).ok_or_else(|| {
            Error::Mapping(format!("tree edge references unknown link {}", e.link))
        })?;
        weights.push(link_weight(link.fidelity, network.f_max())?);
    }
    let mut conflicts = Vec::new();
    for i in 0..phys.len() {
        for j in i + 1..phys.len() {
            if !phys[i].is_disjoint(phys[j]) {
                conflicts.push((i, j));
            }
        }
    }
    ConflictGraph::new(weights, conflicts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedColoring {
    /// Sorted colors per vertex.
    pub colors: Vec<Vec<u32>>,
    /// Number of distinct colors, which are exactly `0..palette`.
    pub palette: u32,
}

impl WeightedColoring {
    /// Every vertex holds exactly `w(n)` distinct colors and conflicting
    /// vertices share none.
    pub fn validate(&self, graph: &ConflictGraph) -> Result<()> {
        if self.colors.len() != graph.len() {
            return Err(Error::Internal(format!(
                "coloring covers {} of {} vertices",
                self.colors.len(),
                graph.len()
            )));
        }
        for (v, cs) in self.colors.iter().enumerate() {
            let distinct: BTreeSet<_> = cs.iter().collect();
            if distinct.len() != graph.weights()[v] as usize || cs.len() != distinct.len() {
                return Err(Error::Internal(format!(
                    "vertex {v} has {} colors, weight {}",
                    cs.len(),
                    graph.weights()[v]
                )));
            }
            if cs.iter().any(|&c| c >= self.palette) {
                return Err(Error::Internal(format!(
                    "vertex {v} uses a color outside the palette"
                )));
            }
        }
        for &(a, b) in graph.conflicts() {
            if self.colors[a].iter().any(|c| self.colors[b].contains(c)) {
                return Err(Error::Internal(format!(
                    "conflicting vertices {a} and {b} share a color"
                )));
            }
        }
        Ok(())
    }
}

/// Vertex-expanded graph: copy `k` of vertex `n` sits at `offsets[n] + k`.
pub(crate) struct Expanded {
    pub offsets: Vec<usize>,
    pub owner: Vec<usize>,
    pub adjacency: Vec<Vec<usize>>,
}

pub(crate) fn expand(graph: &ConflictGraph) -> Expanded {
    let mut offsets = Vec::with_capacity(graph.len());
    let mut owner = Vec::new();
    for (v, &w) in graph.weights().iter().enumerate() {
        offsets.push(owner.len());
        owner.extend(std::iter::repeat_n(v, w as usize));
    }
    let mut adjacency = vec![Vec::new(); owner.len()];
    for (x, adj) in adjacency.iter_mut().enumerate() {
        let v = owner[x];
        let copies = |u: usize| offsets[u]..offsets[u] + graph.weights()[u] as usize;
        adj.extend(copies(v).filter(|&y| y != x));
        for &u in graph.neighbors(v) {
            adj.extend(copies(u));
        }
        adj.sort_unstable();
    }
    Expanded {
        offsets,
        owner,
        adjacency,
    }
}

/// Weighted coloring by vertex expansion and greedy coloring of the
/// expansion (decreasing degree, lowest free color first).
pub fn weighted_coloring(graph: &ConflictGraph) -> Result<WeightedColoring> {
    let ex = expand(graph);
    let m = ex.owner.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        ex.adjacency[b]
            .len()
            .cmp(&ex.adjacency[a].len())
            .then(a.cmp(&b))
    });

    let mut color: Vec<Option<u32>> = vec![None; m];
    let mut taken = Vec::new();
    for &x in &order {
        taken.clear();
        taken.extend(ex.adjacency[x].iter().filter_map(|&y| color[y]));
        taken.sort_unstable();
        taken.dedup();
        let mut c = 0u32;
        for &t in &taken {
            if t == c {
                c += 1;
            } else if t > c {
                break;
            }
        }
        color[x] = Some(c);
    }

    let palette = color.iter().flatten().map(|&c| c + 1).max().unwrap_or(0);
    let max_degree = ex.adjacency.iter().map(Vec::len).max().unwrap_or(0);
    if m > 0 && palette as usize > max_degree + 1 {
        return Err(Error::Internal(format!(
            "greedy palette {palette} exceeds degree bound {}",
            max_degree + 1
        )));
    }
    let colors = (0..graph.len())
        .map(|v| {
            let start = ex.offsets[v];
            let mut cs: Vec<u32> = (start..start + graph.weights()[v] as usize)
                .map(|x| color[x].unwrap())
                .collect();
            cs.sort_unstable();
            cs
        })
        .collect();
    let coloring = WeightedColoring { colors, palette };
    coloring.validate(graph)?;
    Ok(coloring)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentCycle {
    /// Time units per period.
    pub period: u32,
    pub unit_slot_duration: f64,
    /// Time units (within one period) assigned to each connection.
    pub slots: Vec<Vec<u32>>,
    pub total_storage_time: f64,
}

impl AssignmentCycle {
    /// Whether connection `n` transmits at absolute time unit `t`; periodic in `t`.
    pub fn is_scheduled(&self, n: usize, t: u64) -> bool {
        if self.period == 0 {
            return false;
        }
        let r = (t % self.period as u64) as u32;
        self.slots[n].binary_search(&r).is_ok()
    }

    /// No two conflicting connections share a time unit.
    pub fn respects_conflicts(&self, graph: &ConflictGraph) -> bool {
        (0..self.period as u64).all(|t| {
            graph.conflicts().iter().all(|&(a, b)| {
                u8::from(self.is_scheduled(a, t)) + u8::from(self.is_scheduled(b, t)) <= 1
            })
        })
    }
}

/// Turns a coloring into a cycle: colors become time units and the total
/// storage time is the period times the slot duration.
pub fn assignment_cycle(
    coloring: &WeightedColoring,
    unit_slot_duration: f64,
) -> Result<AssignmentCycle> {
    if !(unit_slot_duration > 0.0) || !unit_slot_duration.is_finite() {
        return Err(domain(format!(
            "slot duration {unit_slot_duration} must be positive"
        )));
    }
    Ok(AssignmentCycle {
        period: coloring.palette,
        unit_slot_duration,
        slots: coloring.colors.clone(),
        total_storage_time: coloring.palette as f64 * unit_slot_duration,
    })
}

/// Conflict graph, coloring and cycle of one tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSchedule {
    pub conflicts: ConflictGraph,
    pub coloring: WeightedColoring,
    pub cycle: AssignmentCycle,
}

pub fn schedule_tree(
    tree: &ThroughputTree,
    network: &QuantumNetwork,
    map: &PhysicalMap,
    unit_slot_duration: f64,
) -> Result<TreeSchedule> {
    let conflicts = build_conflict_graph(tree, network, map)?;
    let coloring = weighted_coloring(&conflicts)?;
    let cycle = assignment_cycle(&coloring, unit_slot_duration)?;
    Ok(TreeSchedule {
        conflicts,
        coloring,
        cycle,
    })
}

/// JSON form of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub period: u32,
    pub unit_slot_duration: f64,
    pub assignments: Vec<AssignmentRecord>,
    pub total_storage_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub edge: [NodeId; 2],
    pub slots: Vec<u32>,
}

impl ScheduleRecord {
    pub fn new(tree: &ThroughputTree, cycle: &AssignmentCycle) -> Self {
        Self {
            period: cycle.period,
            unit_slot_duration: cycle.unit_slot_duration,
            assignments: tree
                .edges
                .iter()
                .zip(&cycle.slots)
                .map(|(e, s)| AssignmentRecord {
                    edge: [e.source, e.target],
                    slots: s.clone(),
                })
                .collect(),
            total_storage_time: cycle.total_storage_time,
        }
    }
}
