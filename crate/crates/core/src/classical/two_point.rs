//! Two-point estimate of the mean and spread of a transfer function of
//! independent uncertain inputs.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertain {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std: f64,
}

/// Evaluates `transfer(q, w)` at `mu_i +- sqrt(z) sigma_i` for each uncertain
/// input with the others held at their means, weighting each point `1/(2z)`.
/// Exact in mean and standard deviation for affine transfers.
pub fn two_point_estimate<F>(
    transfer: F,
    certain: &[f64],
    uncertain: &[Uncertain],
) -> Result<Estimate>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if uncertain
        .iter()
        .any(|u| !(u.std >= 0.0) || !u.mean.is_finite())
    {
        return Err(domain(
            "uncertain inputs need finite means and non-negative spreads",
        ));
    }
    let mut w: Vec<f64> = uncertain.iter().map(|u| u.mean).collect();
    let z = uncertain.len();
    if z == 0 {
        return Ok(Estimate {
            mean: transfer(certain, &w),
            std: 0.0,
        });
    }
    let spread = (z as f64).sqrt();
    let weight = 1.0 / (2.0 * z as f64);
    let mut outputs = Vec::with_capacity(2 * z);
    for (i, u) in uncertain.iter().enumerate() {
        for sign in [1.0, -1.0] {
            w[i] = u.mean + sign * spread * u.std;
            outputs.push(transfer(certain, &w));
        }
        w[i] = u.mean;
    }
    let mean: f64 = outputs.iter().map(|o| weight * o).sum();
    let var: f64 = outputs
        .iter()
        .map(|o| weight * (o - mean) * (o - mean))
        .sum();
    if !mean.is_finite() || !var.is_finite() {
        return Err(domain("transfer function produced a non-finite value"));
    }
    Ok(Estimate {
        mean,
        std: var.max(0.0).sqrt(),
    })
}
