//! Convergence metrics for Pareto fronts and the analytic step-size and
//! cost curves.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quantum::Objectives;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceParams {
    pub chi: f64,
}

impl DistanceParams {
    pub fn new(chi: f64) -> Result<Self> {
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(domain(format!("chi must be positive, got {chi}")));
        }
        Ok(Self { chi })
    }
}

/// Distance before and after clamping to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
}

pub fn pareto_distance_raw(
    found: &Objectives,
    reference: &Objectives,
    params: &DistanceParams,
) -> Result<Distance> {
    DistanceParams::new(params.chi)?;
    if reference.storage_time == 0.0 || reference.throughput == 0.0 || reference.path_length == 0 {
        return Err(domain(
            "relative error undefined: reference objective is zero",
        ));
    }
    let a = (reference.storage_time - found.storage_time).abs() / reference.storage_time.abs();
    let b = (reference.throughput - found.throughput).abs() / reference.throughput.abs();
    let c = (reference.path_length as f64 - found.path_length as f64).abs()
        / reference.path_length as f64;
    let raw = (a + b + c) / params.chi;
    let value = raw.clamp(0.0, 1.0);
    Ok(Distance {
        value,
        raw,
        clamped: value != raw,
    })
}

/// Normalized distance of `found` from `reference`, clamped to [0, 1].
pub fn pareto_distance(
    found: &Objectives,
    reference: &Objectives,
    params: &DistanceParams,
) -> Result<f64> {
    Ok(pareto_distance_raw(found, reference, params)?.value)
}

/// Mean over `found` of the distance to the nearest reference member.
pub fn mean_front_distance(
    found: &[Objectives],
    reference: &[Objectives],
    params: &DistanceParams,
) -> Result<f64> {
    if found.is_empty() || reference.is_empty() {
        return Err(domain("mean front distance needs non-empty sets"));
    }
    let mut total = 0.0;
    for f in found {
        let mut best = f64::INFINITY;
        for r in reference {
            best = best.min(pareto_distance(f, r, params)?);
        }
        total += best;
    }
    Ok(total / found.len() as f64)
}

/// Fraction of `found` whose objectives appear in `reference`.
pub fn solution_ratio(found: &[Objectives], reference: &[Objectives]) -> Result<f64> {
    if found.is_empty() {
        return Err(domain("solution ratio undefined for an empty found set"));
    }
    let hits = found
        .iter()
        .filter(|f| reference.iter().any(|r| r.same_as(f)))
        .count();
    Ok(hits as f64 / found.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub phi_min: f64,
    pub phi_max: f64,
    pub omega: f64,
    pub j_p: f64,
}

impl CurveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi_min >= 0.0 && self.phi_max >= self.phi_min && self.phi_max.is_finite()) {
            return Err(domain(format!(
                "need 0 <= phi_min <= phi_max, got {} and {}",
                self.phi_min, self.phi_max
            )));
        }
        if !(self.omega > 0.0) || !(self.j_p > 0.0) {
            return Err(domain("omega and J_P must be positive"));
        }
        Ok(())
    }
}

pub fn step_size(f_value: f64, j: u64, params: &CurveParams) -> Result<f64> {
    if j == 0 {
        return Err(domain("step size undefined at j = 0"));
    }
    if !(f_value >= 0.0) {
        return Err(domain(format!("f must be non-negative, got {f_value}")));
    }
    let delta = params.phi_max - params.phi_min;
    // phi_max - delta * exp(-f/j), written to be exact at f = 0
    let s = params.phi_min - delta * (-f_value / j as f64).exp_m1();
    Ok(s.clamp(params.phi_min, params.phi_max))
}

pub fn restriction_value(j_star: f64, j_p: f64, omega: f64) -> Result<f64> {
    if j_p == 0.0 {
        return Err(domain("restriction value undefined at J_P = 0"));
    }
    Ok(omega * j_star / j_p)
}

pub fn j_star_from_x(x: f64, j_p: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(domain("J* undefined at omega = 0"));
    }
    Ok(x * x * j_p / omega)
}

/// J* recovered from an observed step size at ratio `x`.
pub fn j_star_log_form(phi_s: f64, x: f64, params: &CurveParams) -> Result<f64> {
    let delta = params.phi_max - params.phi_min;
    if delta <= 0.0 {
        return Err(domain("log form needs phi_max > phi_min"));
    }
    let r = (params.phi_max - phi_s) / delta;
    if !(r > 0.0 && r <= 1.0) {
        return Err(domain(format!(
            "step size {phi_s} outside (phi_min, phi_max]"
        )));
    }
    Ok(-r.ln() * x * params.j_p / params.omega)
}

/// Sampling grid for [`emit_curves`]: `phi_min` and `kappa` each sampled on
/// inclusive evenly spaced points; `phi_max = phi_max_mult * phi_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveGrid {
    pub phi_min_lo: f64,
    pub phi_min_hi: f64,
    pub phi_min_points: usize,
    pub phi_max_mult: f64,
    pub kappa_max: f64,
    pub kappa_points: usize,
}

impl Default for CurveGrid {
    fn default() -> Self {
        Self {
            phi_min_lo: 0.0,
            phi_min_hi: 2e-3,
            phi_min_points: 21,
            phi_max_mult: 500.0,
            kappa_max: 10.0,
            kappa_points: 101,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub kappa: f64,
    pub phi_min: f64,
    pub phi_s: f64,
    pub j_star: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

/// Samples the step size at `f = kappa` over `j = 1` and J* at `x = kappa`.
pub fn emit_curves(omega: f64, j_p: f64, grid: &CurveGrid) -> Result<Vec<CurveRow>> {
    if !(grid.phi_min_lo >= 0.0 && grid.phi_min_hi >= grid.phi_min_lo && grid.phi_max_mult >= 1.0) {
        return Err(domain(
            "curve grid needs 0 <= phi_min_lo <= phi_min_hi and phi_max_mult >= 1",
        ));
    }
    if !(grid.kappa_max >= 0.0) {
        return Err(domain("kappa_max must be non-negative"));
    }
    let mut rows = Vec::with_capacity(grid.phi_min_points * grid.kappa_points);
    for phi_min in linspace(grid.phi_min_lo, grid.phi_min_hi, grid.phi_min_points) {
        let params = CurveParams {
            phi_min,
            phi_max: grid.phi_max_mult * phi_min,
            omega,
            j_p,
        };
        params.validate()?;
        for kappa in linspace(0.0, grid.kappa_max, grid.kappa_points) {
            rows.push(CurveRow {
                kappa,
                phi_min,
                phi_s: step_size(kappa, 1, &params)?,
                j_star: j_star_from_x(kappa, j_p, omega)?,
            });
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with header `kappa,phi_min,phi_s,j_star`.
pub fn write_curves_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn o(t: f64, b: f64, p: u32) -> Objectives {
        Objectives::new(t, b, p)
    }

    #[test]
    fn distance_examples() {
        let p = DistanceParams::new(3.0).unwrap();
        assert_eq!(
            pareto_distance(&o(2.0, 4.0, 2), &o(2.0, 4.0, 2), &p).unwrap(),
            0.0
        );
        assert_relative_eq!(
            pareto_distance(&o(3.0, 2.0, 3), &o(2.0, 4.0, 2), &p).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let one = DistanceParams::new(1.0).unwrap();
        let d = pareto_distance_raw(&o(3.0, 2.0, 3), &o(2.0, 4.0, 2), &one).unwrap();
        assert_eq!((d.value, d.raw, d.clamped), (1.0, 1.5, true));
    }

    #[test]
    fn distance_rejects_bad_inputs() {
        let p = DistanceParams { chi: 1.0 };
        assert!(pareto_distance(&o(1.0, 1.0, 1), &o(0.0, 1.0, 1), &p).is_err());
        assert!(DistanceParams::new(0.0).is_err());
        assert!(pareto_distance(
            &o(1.0, 1.0, 1),
            &o(1.0, 1.0, 1),
            &DistanceParams { chi: -1.0 }
        )
        .is_err());
    }

    #[test]
    fn distance_decreases_in_chi() {
        let a = o(3.0, 2.0, 3);
        let z = o(2.0, 4.0, 2);
        let d = |chi| pareto_distance(&a, &z, &DistanceParams { chi }).unwrap();
        assert!(d(2.0) > d(3.0) && d(3.0) > d(4.0));
    }

    #[test]
    fn ratio_examples() {
        let a = o(1.0, 2.0, 3);
        let b = o(2.0, 3.0, 1);
        assert_eq!(solution_ratio(&[a, b], &[a, b]).unwrap(), 1.0);
        assert_eq!(solution_ratio(&[a], &[b]).unwrap(), 0.0);
        assert_eq!(solution_ratio(&[a, b], &[a]).unwrap(), 0.5);
        assert!(solution_ratio(&[], &[a]).is_err());
        let near = o(1.0 + 1e-12, 2.0, 3);
        assert_eq!(solution_ratio(&[near], &[a]).unwrap(), 1.0);
        assert_eq!(solution_ratio(&[o(1.0, 2.0, 4)], &[a]).unwrap(), 0.0);
    }

    #[test]
    fn mean_distance() {
        let p = DistanceParams { chi: 3.0 };
        let z = o(2.0, 4.0, 2);
        let m = mean_front_distance(&[z, o(3.0, 2.0, 3)], &[z], &p).unwrap();
        assert_relative_eq!(m, 0.25, epsilon = 1e-15);
    }

    fn unit_curve() -> CurveParams {
        CurveParams {
            phi_min: 0.0,
            phi_max: 1.0,
            omega: 1.0,
            j_p: 1.0,
        }
    }

    #[test]
    fn step_size_examples() {
        let p = CurveParams {
            phi_min: 0.1,
            phi_max: 50.0,
            omega: 1.0,
            j_p: 1.0,
        };
        assert_eq!(step_size(0.0, 1, &p).unwrap(), 0.1);
        assert!((step_size(700.0, 1, &p).unwrap() - 50.0).abs() < 1e-6);
        assert_relative_eq!(
            step_size(2f64.ln(), 1, &unit_curve()).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(step_size(1.0, 0, &p).is_err());
    }

    #[test]
    fn step_size_monotone() {
        let p = CurveParams {
            phi_min: 0.2,
            phi_max: 3.0,
            omega: 1.0,
            j_p: 1.0,
        };
        let mut prev = 0.0;
        for i in 0..100 {
            let s = step_size(i as f64 * 0.1, 1, &p).unwrap();
            assert!(s >= prev);
            prev = s;
        }
        assert!(step_size(1.0, 1, &p).unwrap() > step_size(1.0, 2, &p).unwrap());
    }

    #[test]
    fn restriction_examples() {
        assert_eq!(restriction_value(2.0, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(restriction_value(3.0, 2.0, 4.0).unwrap(), 6.0);
        assert_eq!(restriction_value(0.0, 2.0, 4.0).unwrap(), 0.0);
        assert!(restriction_value(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn j_star_examples() {
        assert_eq!(j_star_from_x(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(j_star_from_x(2.0, 1.0, 1.0).unwrap(), 4.0);
        assert_eq!(j_star_from_x(10.0, 1.0, 100.0).unwrap(), 1.0);
        assert!(j_star_from_x(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn restriction_inverts_j_star() {
        for &(x, jp, w) in &[
            (0.5, 1.0, 1.0),
            (3.0, 2.5, 7.0),
            (10.0, 1.0, 100.0),
            (1e3, 0.1, 3.0),
        ] {
            let r = restriction_value(j_star_from_x(x, jp, w).unwrap(), jp, w).unwrap();
            assert_relative_eq!(r, x * x, max_relative = 1e-12);
        }
    }

    #[test]
    fn log_form_agrees_with_direct_form() {
        let p = CurveParams {
            phi_min: 1e-3,
            phi_max: 0.5,
            omega: 100.0,
            j_p: 1.0,
        };
        for j in [1u64, 2, 3, 5, 10] {
            let x = j as f64;
            let phi_s = step_size(x * x, j, &p).unwrap();
            let log = j_star_log_form(phi_s, x, &p).unwrap();
            assert_relative_eq!(
                log,
                j_star_from_x(x, 1.0, 100.0).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn curves_grid() {
        let rows = emit_curves(1.0, 1.0, &CurveGrid::default()).unwrap();
        assert_eq!(rows.len(), 21 * 101);
        for r in &rows {
            assert!(r.phi_s >= r.phi_min && r.phi_s <= 500.0 * r.phi_min + 1e-18);
            assert_relative_eq!(r.j_star, r.kappa * r.kappa, max_relative = 1e-12);
        }
        let empty = CurveGrid {
            phi_min_points: 0,
            ..Default::default()
        };
        assert!(emit_curves(1.0, 1.0, &empty).unwrap().is_empty());
    }

    #[test]
    fn curves_csv_header() {
        let rows = emit_curves(
            1.0,
            1.0,
            &CurveGrid {
                phi_min_points: 1,
                kappa_points: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_curves_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kappa,phi_min,phi_s,j_star\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
