//! Seeded random networks on a repeater chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hop_distance, EntangledLink, NetworkBuilder, NodeId, QuantumNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenParams {
    pub nodes: usize,
    pub switchers: usize,
    /// Highest link level; a level-l link spans 2^(l-1) chain hops.
    pub levels: u32,
    pub fidelity: [f64; 2],
    pub throughput: [f64; 2],
    pub storage_cost: [f64; 2],
    /// Lower bound of the existence probability drawn for links above level 1.
    pub min_existence: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            nodes: 7,
            switchers: 1,
            levels: 3,
            fidelity: [0.7, 1.0],
            throughput: [1.0, 10.0],
            storage_cost: [0.05, 0.5],
            min_existence: 0.3,
        }
    }
}

fn draw<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    let v = if range[0] == range[1] {
        range[0]
    } else {
        rng.gen_range(range[0]..=range[1])
    };
    (v * 1000.0).round() / 1000.0
}

fn check_range(name: &str, r: [f64; 2], lo: f64, hi: f64) -> Result<()> {
    if !(r[0] <= r[1] && r[0] >= lo && r[1] <= hi) {
        return Err(Error::Usage(format!(
            "{name} range {r:?} must be ordered within [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Nodes `0..n` sit on a chain with every level-1 link `i -> i+1` present.
/// Each higher level `l` proposes `i -> i + 2^(l-1)` and keeps it with its
/// drawn existence probability. With switchers there are `2^min(s, 3)` modes;
/// links touching a switcher are active in a random non-empty subset of
/// them, all other links in every mode.
pub fn generate_network(params: &GenParams, seed: u64) -> Result<QuantumNetwork> {
    let n = params.nodes;
    if n < 2 {
        return Err(Error::Usage(format!(
            "a network needs at least 2 nodes, got {n}"
        )));
    }
    if params.levels == 0 {
        return Err(Error::Usage("levels must be at least 1".into()));
    }
    if params.switchers > n {
        return Err(Error::Usage(format!(
            "{} switchers requested for {n} nodes",
            params.switchers
        )));
    }
    check_range("fidelity", params.fidelity, f64::MIN_POSITIVE, 1.0)?;
    check_range("throughput", params.throughput, f64::MIN_POSITIVE, f64::MAX)?;
    check_range("storage cost", params.storage_cost, 0.0, f64::MAX)?;
    check_range("existence", [params.min_existence, 1.0], 0.0, 1.0)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = NetworkBuilder::new();

    let mut switchers = rand::seq::index::sample(&mut rng, n, params.switchers).into_vec();
    switchers.sort_unstable();
    for i in 0..n {
        let is_switcher = switchers.contains(&i);
        let label = if is_switcher {
            format!("S{}", i + 1)
        } else {
            format!("R{}", i + 1)
        };
        builder = builder.node(i as u32, &label, draw(&mut rng, params.storage_cost));
        if is_switcher {
            builder = builder.switcher(i as u32);
        }
    }

    let mut pairs = Vec::new();
    for level in 1..=params.levels {
        let hop = hop_distance(level)? as usize;
        if hop >= n {
            break;
        }
        for i in 0..n - hop {
            let existence = if level == 1 {
                1.0
            } else {
                draw(&mut rng, [params.min_existence, 1.0])
            };
            let fidelity = draw(&mut rng, params.fidelity);
            let throughput = draw(&mut rng, params.throughput);
            if level > 1 && rng.gen::<f64>() >= existence {
                continue;
            }
            builder = builder.link(
                EntangledLink::new(NodeId(i as u32), NodeId((i + hop) as u32))
                    .level(level)
                    .fidelity(fidelity)
                    .throughput(throughput)
                    .existence_probability(existence),
            );
            pairs.push((i as u32, (i + hop) as u32));
        }
    }

    if !switchers.is_empty() {
        let modes = 1usize << params.switchers.min(3);
        let mut active: Vec<Vec<(u32, u32)>> = vec![Vec::new(); modes];
        for &(s, t) in &pairs {
            let touches = switchers.contains(&(s as usize)) || switchers.contains(&(t as usize));
            let mask = if touches {
                rng.gen_range(1..(1u32 << modes))
            } else {
                (1u32 << modes) - 1
            };
            for (m, list) in active.iter_mut().enumerate() {
                if mask & (1 << m) != 0 {
                    list.push((s, t));
                }
            }
        }
        for (m, list) in active.iter().enumerate() {
            builder = builder.mode(m as u32 + 1, list);
        }
    }
    builder.build()
}
