//! Network model: nodes, leveled entangled links, switcher modes and the
//! memory-utilization graph derived from them.
//!
//! A [`QuantumNetwork`] is validated once at construction and is immutable
//! afterwards. The [`MemoryUtilizationGraph`] splits every node into an
//! abstract transmitter and receiver copy and holds one directed edge per
//! (link, mode) pair in which the link is active.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable ordinal of a node within a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type ModeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    /// Quantum storage cost at this node.
    pub storage_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntangledLink {
    pub source: NodeId,
    pub target: NodeId,
    pub level: u32,
    pub fidelity: f64,
    /// Entangled states per second at `fidelity`.
    pub throughput: f64,
    pub utility: f64,
    pub existence_probability: f64,
    /// Explicit physical-link id; when absent the id is derived from the
    /// L1 segments the link spans.
    pub physical_link: Option<u64>,
    /// Copied from the target node's storage cost when the network is built.
    pub storage_cost_at_target: f64,
}

impl EntangledLink {
    /// Link with the given endpoints and defaults everywhere else
    /// (level 1, fidelity 1, throughput 1, utility 1).
    pub fn new(source: NodeId, target: NodeId) -> Self {
        Self {
            source,
            target,
            level: 1,
            fidelity: 1.0,
            throughput: 1.0,
            utility: 1.0,
            existence_probability: 1.0,
            physical_link: None,
            storage_cost_at_target: 0.0,
        }
    }

    pub fn level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }

    pub fn fidelity(mut self, fidelity: f64) -> Self {
        self.fidelity = fidelity;
        self
    }

    pub fn throughput(mut self, throughput: f64) -> Self {
        self.throughput = throughput;
        self
    }

    pub fn utility(mut self, utility: f64) -> Self {
        self.utility = utility;
        self
    }

    pub fn physical_link(mut self, id: u64) -> Self {
        self.physical_link = Some(id);
        self
    }

    pub fn existence_probability(mut self, p: f64) -> Self {
        self.existence_probability = p;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitcherMode {
    pub mode_id: ModeId,
    pub active_links: BTreeSet<(NodeId, NodeId)>,
}

/// Hop distance spanned by a link of the given level: `2^(level-1)`.
pub fn hop_distance(level: u32) -> Result<u64> {
    if level == 0 || level > 64 {
        return Err(Error::InvalidLevel(level));
    }
    Ok(1u64 << (level - 1))
}

/// Cost of an entangled link, the reciprocal of its throughput.
pub fn link_cost(link: &EntangledLink) -> Result<f64> {
    if !(link.throughput > 0.0) || !link.throughput.is_finite() {
        return Err(Error::InvalidLink(format!(
            "throughput must be positive and finite, got {}",
            link.throughput
        )));
    }
    Ok(1.0 / link.throughput)
}

/// Selection weight of moving across `link`: `1 / (1/B_F + zeta_target)`.
pub fn edge_cost(link: &EntangledLink) -> Result<f64> {
    Ok(1.0 / (link_cost(link)? + link.storage_cost_at_target))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumNetwork {
    nodes: Vec<Node>,
    switchers: BTreeSet<NodeId>,
    links: Vec<EntangledLink>,
    modes: Vec<SwitcherMode>,
    f_max: f64,
}

impl QuantumNetwork {
    /// Validates and assembles a network. An empty `modes` list yields a
    /// single default mode 0 with every link active.
    pub fn new(
        mut nodes: Vec<Node>,
        switchers: BTreeSet<NodeId>,
        mut links: Vec<EntangledLink>,
        mut modes: Vec<SwitcherMode>,
    ) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        let mut labels = BTreeSet::new();
        for (i, node) in nodes.iter().enumerate() {
            if i > 0 && nodes[i - 1].id == node.id {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate node id {}",
                    node.id
                )));
            }
            if !labels.insert(node.label.as_str()) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate node label {:?}",
                    node.label
                )));
            }
            if !(node.storage_cost >= 0.0) || !node.storage_cost.is_finite() {
                return Err(Error::InvalidNetwork(format!(
                    "node {} has invalid storage cost {}",
                    node.label, node.storage_cost
                )));
            }
        }
        let index: BTreeMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();

        for s in &switchers {
            if !index.contains_key(s) {
                return Err(Error::InvalidNetwork(format!("switcher {s} is not a node")));
            }
        }

        let mut pairs = BTreeSet::new();
        for link in links.iter_mut() {
            let Some(&t) = index.get(&link.target) else {
                return Err(Error::InvalidNetwork(format!(
                    "link target {} is not a node",
                    link.target
                )));
            };
            if !index.contains_key(&link.source) {
                return Err(Error::InvalidNetwork(format!(
                    "link source {} is not a node",
                    link.source
                )));
            }
            if link.source == link.target {
                return Err(Error::InvalidLink(format!(
                    "self-loop at node {}",
                    link.source
                )));
            }
            if !pairs.insert((link.source, link.target)) {
                return Err(Error::InvalidLink(format!(
                    "duplicate link {} -> {}",
                    link.source, link.target
                )));
            }
            hop_distance(link.level)?;
            link_cost(link)?;
            if !(link.fidelity > 0.0 && link.fidelity <= 1.0) {
                return Err(Error::InvalidLink(format!(
                    "fidelity {} outside (0, 1]",
                    link.fidelity
                )));
            }
            if !(link.utility >= 0.0) || !link.utility.is_finite() {
                return Err(Error::InvalidLink(format!(
                    "utility {} must be >= 0",
                    link.utility
                )));
            }
            if !(0.0..=1.0).contains(&link.existence_probability) {
                return Err(Error::InvalidLink(format!(
                    "existence probability {} outside [0, 1]",
                    link.existence_probability
                )));
            }
            link.storage_cost_at_target = nodes[t].storage_cost;
        }

        if modes.is_empty() {
            modes.push(SwitcherMode {
                mode_id: 0,
                active_links: pairs.clone(),
            });
        }
        modes.sort_by_key(|m| m.mode_id);
        for (i, mode) in modes.iter().enumerate() {
            if i > 0 && modes[i - 1].mode_id == mode.mode_id {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate mode id {}",
                    mode.mode_id
                )));
            }
            for (s, t) in &mode.active_links {
                if !index.contains_key(s) || !index.contains_key(t) {
                    return Err(Error::InvalidNetwork(format!(
                        "mode {} references unknown node in ({s}, {t})",
                        mode.mode_id
                    )));
                }
                if !pairs.contains(&(*s, *t)) {
                    return Err(Error::InvalidNetwork(format!(
                        "mode {} activates ({s}, {t}) but no such link exists",
                        mode.mode_id
                    )));
                }
            }
        }

        let f_max = links.iter().map(|l| l.fidelity).fold(f64::NAN, f64::max);
        let f_max = if f_max.is_nan() { 1.0 } else { f_max };

        Ok(Self {
            nodes,
            switchers,
            links,
            modes,
            f_max,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn switchers(&self) -> &BTreeSet<NodeId> {
        &self.switchers
    }

    pub fn links(&self) -> &[EntangledLink] {
        &self.links
    }

    pub fn modes(&self) -> &[SwitcherMode] {
        &self.modes
    }

    /// Largest fidelity over all links (1.0 for a link-less network).
    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    /// Position of a node in id order. Doubles as its place on the
    /// physical chain.
    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.position(id).map(|i| &self.nodes[i])
    }

    pub fn node_by_label(&self, label: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn link_index(&self, source: NodeId, target: NodeId) -> Option<usize> {
        self.links
            .iter()
            .position(|l| l.source == source && l.target == target)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkFile::from(self))?)
    }
}

/// Builder used by tests, fixtures and the generator.
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    switchers: BTreeSet<NodeId>,
    links: Vec<EntangledLink>,
    modes: Vec<SwitcherMode>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, id: u32, label: &str, storage_cost: f64) -> Self {
        self.nodes.push(Node {
            id: NodeId(id),
            label: label.to_string(),
            storage_cost,
        });
        self
    }

    pub fn switcher(mut self, id: u32) -> Self {
        self.switchers.insert(NodeId(id));
        self
    }

    pub fn link(mut self, link: EntangledLink) -> Self {
        self.links.push(link);
        self
    }

    pub fn mode(mut self, mode_id: ModeId, active: &[(u32, u32)]) -> Self {
        self.modes.push(SwitcherMode {
            mode_id,
            active_links: active
                .iter()
                .map(|&(s, t)| (NodeId(s), NodeId(t)))
                .collect(),
        });
        self
    }

    pub fn build(self) -> Result<QuantumNetwork> {
        QuantumNetwork::new(self.nodes, self.switchers, self.links, self.modes)
    }
}

/// One directed transmitter → receiver edge of the memory-utilization graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MemoryEdge {
    pub mode: ModeId,
    pub tx: NodeId,
    pub rx: NodeId,
    /// Index of the underlying link in [`MemoryUtilizationGraph::links`].
    pub link: usize,
}

/// A transmitter → receiver pair active in at least one mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Successor {
    pub target: usize,
    pub link: usize,
    pub modes: Vec<ModeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryUtilizationGraph {
    tx_nodes: Vec<NodeId>,
    rx_nodes: Vec<NodeId>,
    /// Sorted by (mode, tx, rx); this is the canonical decision-vector order.
    edges: Vec<MemoryEdge>,
    links: Vec<EntangledLink>,
    node_ids: Vec<NodeId>,
    successors: Vec<Vec<Successor>>,
}

/// Builds the transmitter/receiver graph: one edge per link per mode in
/// which it is active.
pub fn build_memory_utilization_graph(network: &QuantumNetwork) -> MemoryUtilizationGraph {
    let node_ids: Vec<NodeId> = network.nodes().iter().map(|n| n.id).collect();
    let mut edges = Vec::new();
    for mode in network.modes() {
        for &(s, t) in &mode.active_links {
            let link = network.link_index(s, t).expect("validated at construction");
            edges.push(MemoryEdge {
                mode: mode.mode_id,
                tx: s,
                rx: t,
                link,
            });
        }
    }
    edges.sort();

    let mut successors: Vec<Vec<Successor>> = vec![Vec::new(); node_ids.len()];
    for e in &edges {
        let from = network.position(e.tx).unwrap();
        let to = network.position(e.rx).unwrap();
        match successors[from].iter_mut().find(|s| s.target == to) {
            Some(s) => s.modes.push(e.mode),
            None => successors[from].push(Successor {
                target: to,
                link: e.link,
                modes: vec![e.mode],
            }),
        }
    }
    for list in &mut successors {
        list.sort_by_key(|s| s.target);
    }

    MemoryUtilizationGraph {
        tx_nodes: node_ids.clone(),
        rx_nodes: node_ids.clone(),
        edges,
        links: network.links().to_vec(),
        node_ids,
        successors,
    }
}

impl MemoryUtilizationGraph {
    pub fn tx_nodes(&self) -> &[NodeId] {
        &self.tx_nodes
    }

    pub fn rx_nodes(&self) -> &[NodeId] {
        &self.rx_nodes
    }

    pub fn edges(&self) -> &[MemoryEdge] {
        &self.edges
    }

    pub fn links(&self) -> &[EntangledLink] {
        &self.links
    }

    pub fn link(&self, index: usize) -> &EntangledLink {
        &self.links[index]
    }

    pub(crate) fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub(crate) fn node_id(&self, pos: usize) -> NodeId {
        self.node_ids[pos]
    }

    pub(crate) fn position(&self, id: NodeId) -> Option<usize> {
        self.node_ids.binary_search(&id).ok()
    }

    pub(crate) fn successors(&self, pos: usize) -> &[Successor] {
        &self.successors[pos]
    }

    /// Distinct (tx, rx, link) pairs, optionally restricted to one mode.
    pub fn pairs(&self, mode: Option<ModeId>) -> Vec<(NodeId, NodeId, usize)> {
        let mut out = Vec::new();
        for (from, list) in self.successors.iter().enumerate() {
            for s in list {
                if mode.is_none_or(|m| s.modes.contains(&m)) {
                    out.push((self.node_ids[from], self.node_ids[s.target], s.link));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// JSON file schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub switchers: Vec<u32>,
    pub links: Vec<LinkRecord>,
    #[serde(default)]
    pub modes: Vec<ModeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: u32,
    pub label: String,
    pub storage_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub source: u32,
    pub target: u32,
    pub level: u32,
    pub fidelity: f64,
    pub throughput: f64,
    pub utility: f64,
    #[serde(default = "one")]
    pub existence_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical_link: Option<u64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRecord {
    pub mode_id: ModeId,
    pub active_links: Vec<[u32; 2]>,
}

impl TryFrom<NetworkFile> for QuantumNetwork {
    type Error = Error;

    fn try_from(file: NetworkFile) -> Result<Self> {
        let nodes = file
            .nodes
            .into_iter()
            .map(|n| Node {
                id: NodeId(n.id),
                label: n.label,
                storage_cost: n.storage_cost,
            })
            .collect();
        let switchers = file.switchers.into_iter().map(NodeId).collect();
        let links = file
            .links
            .into_iter()
            .map(|l| EntangledLink {
                source: NodeId(l.source),
                target: NodeId(l.target),
                level: l.level,
                fidelity: l.fidelity,
                throughput: l.throughput,
                utility: l.utility,
                existence_probability: l.existence_probability,
                physical_link: l.physical_link,
                storage_cost_at_target: 0.0,
            })
            .collect();
        let modes = file
            .modes
            .into_iter()
            .map(|m| SwitcherMode {
                mode_id: m.mode_id,
                active_links: m
                    .active_links
                    .iter()
                    .map(|&[s, t]| (NodeId(s), NodeId(t)))
                    .collect(),
            })
            .collect();
        QuantumNetwork::new(nodes, switchers, links, modes)
    }
}

impl From<&QuantumNetwork> for NetworkFile {
    fn from(net: &QuantumNetwork) -> Self {
        NetworkFile {
            nodes: net
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.0,
                    label: n.label.clone(),
                    storage_cost: n.storage_cost,
                })
                .collect(),
            switchers: net.switchers.iter().map(|s| s.0).collect(),
            links: net
                .links
                .iter()
                .map(|l| LinkRecord {
                    source: l.source.0,
                    target: l.target.0,
                    level: l.level,
                    fidelity: l.fidelity,
                    throughput: l.throughput,
                    utility: l.utility,
                    existence_probability: l.existence_probability,
                    physical_link: l.physical_link,
                })
                .collect(),
            modes: net
                .modes
                .iter()
                .map(|m| ModeRecord {
                    mode_id: m.mode_id,
                    active_links: m.active_links.iter().map(|(s, t)| [s.0, t.0]).collect(),
                })
                .collect(),
        }
    }
}
