//! Multilayer optimization of quantum repeater networks.
//!
//! The quantum layer searches throughput trees over the memory-utilization
//! graph and keeps a Pareto archive on storage time, throughput and path
//! length. The classical layer runs a chemotaxis-style population search over
//! control parameters. Small brute-force oracles check both.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod generate;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod output;
pub mod quantum;
pub mod schedule;
pub mod topologies;
pub mod tree;

pub use error::{Error, Result};
pub use model::{
    build_memory_utilization_graph, EntangledLink, MemoryUtilizationGraph, NetworkBuilder, NodeId,
    QuantumNetwork,
};
pub use quantum::{optimize_quantum_layer, Objectives, ParetoArchive, QuantumConfig, Solution};
pub use tree::{build_tree, BuildParams, NodeSets, ThroughputTree};
