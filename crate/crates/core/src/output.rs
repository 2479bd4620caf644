//! Output envelopes and input loading shared by the command-line tool.
//!
//! JSON artifacts are wrapped as `{meta, config, data}`; CSV artifacts start
//! with `#`-prefixed metadata lines followed by a normal header row.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{NetworkFile, NodeId, QuantumNetwork};

pub const TOOL_VERSION: &str = concat!("qnetopt ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Meta {
    pub fn new(seed: u64, config: &Value) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            seed,
            config_hash: config_hash(config),
        }
    }
}

/// SHA-256 of the compact JSON form of `config`.
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("json values always serialize");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<T> {
    pub meta: Meta,
    pub config: Value,
    pub data: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(seed: u64, config: Value, data: T) -> Self {
        Self {
            meta: Meta::new(seed, &config),
            config,
            data,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `#`-prefixed metadata lines for a CSV file.
pub fn write_csv_meta<W: Write>(mut out: W, meta: &Meta, extra: &[(&str, String)]) -> Result<()> {
    writeln!(out, "# tool_version={}", meta.tool_version)?;
    writeln!(out, "# seed={}", meta.seed)?;
    writeln!(out, "# config_hash={}", meta.config_hash)?;
    for (k, v) in extra {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

/// Reads a file, mapping a missing path to a usage error.
pub fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            Error::Usage(format!("input file not found: {}", path.display()))
        }
        _ => Error::Io(e),
    })
}

/// Parses either a bare document or the `data` field of an envelope.
pub fn parse_maybe_enveloped<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    match serde_json::from_str::<T>(text) {
        Ok(v) => Ok(v),
        Err(bare) => match serde_json::from_str::<Envelope<T>>(text) {
            Ok(env) => Ok(env.data),
            Err(_) => Err(Error::Json(bare)),
        },
    }
}

/// Loads a network from a bare network file or a `gen` envelope.
pub fn load_network(path: &Path) -> Result<QuantumNetwork> {
    let file: NetworkFile = parse_maybe_enveloped(&read_input(path)?)?;
    file.try_into()
}

/// Resolves a node by numeric id or by label.
pub fn resolve_node(network: &QuantumNetwork, query: &str) -> Result<NodeId> {
    if let Ok(id) = query.parse::<u32>() {
        if network.node(NodeId(id)).is_some() {
            return Ok(NodeId(id));
        }
    }
    network
        .node_by_label(query)
        .map(|n| n.id)
        .ok_or_else(|| Error::Usage(format!("no node with id or label {query:?}")))
}
