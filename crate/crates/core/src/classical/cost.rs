//! Classical-communication cost terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Any state-dependent, non-negative classical cost.
pub trait ClassicalCost {
    fn cost(&self, theta: &[f64]) -> Result<f64>;
}

impl<F: Fn(&[f64]) -> f64> ClassicalCost for F {
    fn cost(&self, theta: &[f64]) -> Result<f64> {
        let v = self(theta);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Model(format!("cost closure returned {v}")))
        }
    }
}

/// One node's contribution: `steps + link_cost + slope * |theta[component]|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeCost {
    pub steps: u32,
    pub link_cost: f64,
    #[serde(default)]
    pub component: Option<usize>,
    #[serde(default)]
    pub slope: f64,
}

impl NodeCost {
    pub fn constant(steps: u32, link_cost: f64) -> Self {
        Self {
            steps,
            link_cost,
            component: None,
            slope: 0.0,
        }
    }

    fn eval(&self, theta: &[f64]) -> Result<f64> {
        if self.link_cost < 0.0 || self.slope < 0.0 {
            return Err(Error::Model(
                "link costs and slopes must be non-negative".into(),
            ));
        }
        let varying = match self.component {
            Some(m) => {
                let t = theta.get(m).ok_or(Error::DimensionMismatch {
                    expected: m + 1,
                    found: theta.len(),
                })?;
                self.slope * t.abs()
            }
            None => 0.0,
        };
        Ok(self.steps as f64 + self.link_cost + varying)
    }
}

/// Per-node cost arrays for the storage-time, throughput and path-length
/// node groups.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostArrays {
    #[serde(default)]
    pub t_s: Vec<NodeCost>,
    #[serde(default)]
    pub b_f: Vec<NodeCost>,
    #[serde(default)]
    pub path_len: Vec<NodeCost>,
    /// Declared group sizes; checked against the array lengths when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_counts: Option<[usize; 3]>,
}

impl CostArrays {
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.node_counts {
            let have = [self.t_s.len(), self.b_f.len(), self.path_len.len()];
            if n != have {
                return Err(Error::Model(format!(
                    "node counts {n:?} do not match array lengths {have:?}"
                )));
            }
        }
        Ok(())
    }
}

impl ClassicalCost for CostArrays {
    fn cost(&self, theta: &[f64]) -> Result<f64> {
        self.validate()?;
        let mut total = 0.0;
        for group in [&self.t_s, &self.b_f, &self.path_len] {
            for node in group {
                total += node.eval(theta)?;
            }
        }
        Ok(total)
    }
}

/// `scale * |theta - center|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticCost {
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl ClassicalCost for QuadraticCost {
    fn cost(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                found: theta.len(),
            });
        }
        if self.scale < 0.0 {
            return Err(Error::Model("quadratic scale must be non-negative".into()));
        }
        Ok(self.scale
            * theta
                .iter()
                .zip(&self.center)
                .map(|(t, c)| (t - c) * (t - c))
                .sum::<f64>())
    }
}

/// Sum of the affine arrays and an optional quadratic bowl.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CombinedCost {
    pub arrays: CostArrays,
    pub quadratic: Option<QuadraticCost>,
}

impl ClassicalCost for CombinedCost {
    fn cost(&self, theta: &[f64]) -> Result<f64> {
        let q = match &self.quadratic {
            Some(q) => q.cost(theta)?,
            None => 0.0,
        };
        Ok(self.arrays.cost(theta)? + q)
    }
}

/// Interaction and tuning constants of the network and environment costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub a: f64,
    pub r_a: f64,
    pub nu: f64,
    pub r_nu: f64,
    pub m: f64,
}

impl Default for Interaction {
    fn default() -> Self {
        Self {
            a: 0.1,
            r_a: 1.0,
            nu: 0.1,
            r_nu: 0.5,
            m: 0.0,
        }
    }
}

pub fn classical_cost(theta: &[f64], model: &dyn ClassicalCost) -> Result<f64> {
    model.cost(theta)
}

/// Attraction and repulsion toward every population member.
pub fn network_cost(theta: &[f64], population: &[Vec<f64>], k: &Interaction) -> Result<f64> {
    let coeff = -k.a * (-k.r_a).exp() + k.nu * (-k.r_nu).exp();
    let mut total = 0.0;
    for other in population {
        if other.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                found: other.len(),
            });
        }
        let d2: f64 = theta
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        total += coeff * d2;
    }
    Ok(total)
}

pub fn environment_cost(cn: f64, f_value: f64, m_tuning: f64) -> Result<f64> {
    if cn == 0.0 {
        return Ok(0.0);
    }
    let v = cn * (m_tuning - f_value).exp();
    if !v.is_finite() {
        return Err(Error::Overflow(format!(
            "environment cost {cn} * exp({} - {f_value})",
            m_tuning
        )));
    }
    Ok(v)
}

pub fn total_cost(
    theta: &[f64],
    population: &[Vec<f64>],
    model: &dyn ClassicalCost,
    k: &Interaction,
) -> Result<f64> {
    let f = model.cost(theta)?;
    let cn = network_cost(theta, population, k)?;
    Ok(f + environment_cost(cn, f, k.m)?)
}
