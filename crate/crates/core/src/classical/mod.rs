//! Classical-layer optimization: a population of parameter vectors takes
//! fixed-length random steps that are kept only when they lower the cost,
//! states whose accumulated cost crosses a threshold are removed, and
//! differential merging recombines the survivors between epochs.

pub mod cost;
pub mod two_point;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use cost::{
    classical_cost, environment_cost, network_cost, total_cost, ClassicalCost, CombinedCost,
    CostArrays, Interaction, NodeCost, QuadraticCost,
};
pub use two_point::{two_point_estimate, Estimate, Uncertain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// Stable index in the initial population.
    pub id: usize,
    pub theta: Vec<f64>,
    pub j: usize,
    pub k: usize,
    pub l: usize,
}

impl SystemState {
    pub fn new(id: usize, theta: Vec<f64>) -> Self {
        Self {
            id,
            theta,
            j: 0,
            k: 0,
            l: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub states: Vec<SystemState>,
}

impl Population {
    pub fn new(thetas: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(p) = thetas.first().map(Vec::len) {
            if p == 0 {
                return Err(domain("state dimension must be at least 1"));
            }
            if let Some(bad) = thetas.iter().find(|t| t.len() != p) {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: bad.len(),
                });
            }
        }
        if thetas.iter().flatten().any(|v| !v.is_finite()) {
            return Err(domain("state components must be finite"));
        }
        Ok(Self {
            states: thetas
                .into_iter()
                .enumerate()
                .map(|(i, t)| SystemState::new(i, t))
                .collect(),
        })
    }

    /// `s` states of dimension `p`, components uniform in `[-range, range]`.
    pub fn random<R: Rng + ?Sized>(p: usize, s: usize, range: f64, rng: &mut R) -> Result<Self> {
        if p == 0 || !(range >= 0.0) {
            return Err(domain("population needs p >= 1 and a non-negative range"));
        }
        Self::new(
            (0..s)
                .map(|_| (0..p).map(|_| rng.gen_range(-range..=range)).collect())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn thetas(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| s.theta.clone()).collect()
    }
}

/// Unit vector with components drawn uniformly from [-1, 1] before
/// normalization.
pub fn random_direction<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return d.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Moves `state` by `c` along the normalized `direction`.
pub fn step_along(state: &SystemState, c: f64, direction: &[f64]) -> Result<SystemState> {
    if direction.len() != state.theta.len() {
        return Err(Error::DimensionMismatch {
            expected: state.theta.len(),
            found: direction.len(),
        });
    }
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(domain("zero step direction"));
    }
    let theta = state
        .theta
        .iter()
        .zip(direction)
        .map(|(t, d)| t + c * d / norm)
        .collect();
    Ok(SystemState {
        theta,
        j: state.j + 1,
        ..state.clone()
    })
}

/// One random directional step of length `c`.
pub fn chemotaxis_step<R: Rng + ?Sized>(
    state: &SystemState,
    c: f64,
    rng: &mut R,
) -> Result<SystemState> {
    if !(c >= 0.0) {
        return Err(domain(format!("step length must be non-negative, got {c}")));
    }
    step_along(state, c, &random_direction(state.theta.len(), rng))
}

/// `a + phi * (b - c)`.
pub fn merge_states(
    a: &SystemState,
    b: &SystemState,
    c: &SystemState,
    phi_merge: f64,
) -> Result<SystemState> {
    if !(0.0..=1.0).contains(&phi_merge) {
        return Err(domain(format!("merging factor {phi_merge} outside [0, 1]")));
    }
    for other in [b, c] {
        if other.theta.len() != a.theta.len() {
            return Err(Error::DimensionMismatch {
                expected: a.theta.len(),
                found: other.theta.len(),
            });
        }
    }
    let theta = (0..a.theta.len())
        .map(|m| a.theta[m] + phi_merge * (b.theta[m] - c.theta[m]))
        .collect();
    Ok(SystemState { theta, ..a.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverDraws {
    pub x_a: f64,
    pub x_b: f64,
    pub x_c: f64,
    pub u: f64,
}

impl CrossoverDraws {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            x_a: rng.gen(),
            x_b: rng.gen(),
            x_c: rng.gen(),
            u: rng.gen(),
        }
    }
}

/// Assembles the crossover candidate. Component `m` belongs to block
/// `m mod 3`: block a takes the state or the merged vector, block b the
/// state or the best vector, block c the best or the merged vector.
pub fn crossover_candidate(
    state: &SystemState,
    merged: &SystemState,
    best: &SystemState,
    draws: &CrossoverDraws,
) -> Result<SystemState> {
    let p = state.theta.len();
    for other in [merged, best] {
        if other.theta.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: other.theta.len(),
            });
        }
    }
    let theta = (0..p)
        .map(|m| match m % 3 {
            0 => {
                if draws.x_a > draws.u {
                    state.theta[m]
                } else {
                    merged.theta[m]
                }
            }
            1 => {
                if draws.x_b > draws.u {
                    state.theta[m]
                } else {
                    best.theta[m]
                }
            }
            _ => {
                if draws.x_c > draws.u {
                    best.theta[m]
                } else {
                    merged.theta[m]
                }
            }
        })
        .collect();
    Ok(SystemState {
        theta,
        ..state.clone()
    })
}

/// Returns the candidate when its objective is strictly lower, otherwise
/// the original state.
pub fn crossover_update(
    state: &SystemState,
    merged: &SystemState,
    best: &SystemState,
    draws: &CrossoverDraws,
    objective: &dyn ClassicalCost,
) -> Result<SystemState> {
    let candidate = crossover_candidate(state, merged, best, draws)?;
    if objective.cost(&candidate.theta)? < objective.cost(&state.theta)? {
        Ok(candidate)
    } else {
        Ok(state.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSettings {
    pub interaction: Interaction,
    /// Removal threshold on accumulated cost; `None` never removes.
    pub chi_c: Option<f64>,
    /// Step length per state; a single value applies to every state.
    pub c: Vec<f64>,
    pub n_steps: usize,
    pub e_k: usize,
    pub e_l: usize,
    pub phi_merge: f64,
    pub swim_limit: usize,
}

impl Default for ClassicalSettings {
    fn default() -> Self {
        Self {
            interaction: Interaction::default(),
            chi_c: None,
            c: vec![0.1],
            n_steps: 100,
            e_k: 4,
            e_l: 2,
            phi_merge: 0.5,
            swim_limit: 4,
        }
    }
}

impl ClassicalSettings {
    fn step_for(&self, id: usize) -> f64 {
        if self.c.len() == 1 {
            self.c[0]
        } else {
            self.c[id]
        }
    }

    pub fn validate(&self, population: usize) -> Result<()> {
        if self.c.is_empty() || (self.c.len() != 1 && self.c.len() != population) {
            return Err(Error::DimensionMismatch {
                expected: population,
                found: self.c.len(),
            });
        }
        if self.c.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(domain("step lengths must be positive"));
        }
        if self.n_steps == 0 || self.e_k == 0 || self.e_l == 0 {
            return Err(domain("n_steps, E_k and E_l must be positive"));
        }
        if !(0.0..=1.0).contains(&self.phi_merge) {
            return Err(domain(format!(
                "merging factor {} outside [0, 1]",
                self.phi_merge
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub state_index: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub f_cost: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalRun {
    /// Sum of accumulated costs over the survivors of the last epoch.
    pub minimized_cost: f64,
    pub surviving: Population,
    pub removed: usize,
    pub trace: Vec<TraceRow>,
    /// Survivor with the lowest classical cost.
    pub best: Option<SystemState>,
}

pub fn optimize_classical(
    population: Population,
    model: &dyn ClassicalCost,
    settings: &ClassicalSettings,
    seed: u64,
) -> Result<ClassicalRun> {
    if population.is_empty() {
        return Err(domain("population is empty"));
    }
    settings.validate(population.len())?;
    let k_int = &settings.interaction;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = population.states;
    let mut trace = Vec::new();
    let mut removed = 0;
    let mut minimized = 0.0;
    let epochs = settings.e_l * settings.e_k;

    for epoch in 0..epochs {
        let (l, k) = (epoch / settings.e_k, epoch % settings.e_k);
        let snapshot: Vec<Vec<f64>> = states.iter().map(|s| s.theta.clone()).collect();
        let cost = |theta: &[f64]| total_cost(theta, &snapshot, model, k_int);
        let mut accumulated = Vec::with_capacity(states.len());

        for state in states.iter_mut() {
            state.k = k;
            state.l = l;
            let c = settings.step_for(state.id);
            let mut current = cost(&state.theta)?;
            let mut f_cost = 0.0;
            for j in 0..settings.n_steps {
                let direction = random_direction(state.theta.len(), &mut rng);
                let mut next = step_along(state, c, &direction)?;
                let mut next_cost = cost(&next.theta)?;
                let accepted = next_cost < current;
                if accepted {
                    let mut swims = 0;
                    while next_cost < current {
                        *state = next;
                        current = next_cost;
                        if swims == settings.swim_limit {
                            break;
                        }
                        swims += 1;
                        next = step_along(state, c, &direction)?;
                        next_cost = cost(&next.theta)?;
                    }
                }
                state.j = j + 1;
                f_cost += current;
                trace.push(TraceRow {
                    iteration: trace.len(),
                    state_index: state.id,
                    j,
                    k,
                    l,
                    f_cost: current,
                    accepted,
                });
            }
            accumulated.push(f_cost);
        }

        let before = states.len();
        let threshold = settings.chi_c.unwrap_or(f64::INFINITY);
        let mut survivors = Vec::with_capacity(before);
        minimized = 0.0;
        for (s, f) in states.into_iter().zip(accumulated) {
            if f < threshold {
                minimized += f;
                survivors.push(s);
            }
        }
        removed += before - survivors.len();
        states = survivors;
        if states.is_empty() {
            log::warn!("every state was removed at epoch (k={k}, l={l})");
            return Ok(ClassicalRun {
                minimized_cost: 0.0,
                surviving: Population { states },
                removed,
                trace,
                best: None,
            });
        }

        if epoch + 1 < epochs && states.len() >= 4 && settings.phi_merge > 0.0 {
            states = merge_population(states, model, settings.phi_merge, &mut rng)?;
        }
    }

    let mut best: Option<(f64, &SystemState)> = None;
    for s in &states {
        let f = model.cost(&s.theta)?;
        if best.is_none_or(|(b, _)| f < b) {
            best = Some((f, s));
        }
    }
    let best = best.map(|(_, s)| s.clone());
    Ok(ClassicalRun {
        minimized_cost: minimized,
        surviving: Population { states },
        removed,
        trace,
        best,
    })
}

fn merge_population<R: Rng + ?Sized>(
    states: Vec<SystemState>,
    model: &dyn ClassicalCost,
    phi_merge: f64,
    rng: &mut R,
) -> Result<Vec<SystemState>> {
    let n = states.len();
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, s) in states.iter().enumerate() {
        let f = model.cost(&s.theta)?;
        if f < best_cost {
            best = i;
            best_cost = f;
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&x| x != i).collect();
        let pick = rand::seq::index::sample(rng, others.len(), 3);
        let (a, b, c) = (
            others[pick.index(0)],
            others[pick.index(1)],
            others[pick.index(2)],
        );
        let merged = merge_states(&states[a], &states[b], &states[c], phi_merge)?;
        let draws = CrossoverDraws::sample(rng);
        out.push(crossover_update(
            &states[i],
            &merged,
            &states[best],
            &draws,
            model,
        )?);
    }
    Ok(out)
}

/// File form of a classical run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub p: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "A", default = "defaults::a")]
    pub a: f64,
    #[serde(rename = "R_A", default = "defaults::r_a")]
    pub r_a: f64,
    #[serde(default = "defaults::nu")]
    pub nu: f64,
    #[serde(rename = "R_nu", default = "defaults::r_nu")]
    pub r_nu: f64,
    #[serde(rename = "M", default)]
    pub m: f64,
    #[serde(rename = "chi_C", default)]
    pub chi_c: Option<f64>,
    #[serde(default = "defaults::c")]
    pub c: Vec<f64>,
    #[serde(default = "defaults::n_steps")]
    pub n_steps: usize,
    #[serde(rename = "E_k", default = "defaults::e_k")]
    pub e_k: usize,
    #[serde(rename = "E_l", default = "defaults::e_l")]
    pub e_l: usize,
    #[serde(default = "defaults::phi_merge")]
    pub phi_merge: f64,
    #[serde(default = "defaults::swim_limit")]
    pub swim_limit: usize,
    #[serde(default)]
    pub cost_arrays: CostArrays,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<QuadraticCost>,
    #[serde(default = "defaults::init_range")]
    pub init_range: f64,
}

mod defaults {
    use super::ClassicalSettings;

    pub fn a() -> f64 {
        ClassicalSettings::default().interaction.a
    }
    pub fn r_a() -> f64 {
        ClassicalSettings::default().interaction.r_a
    }
    pub fn nu() -> f64 {
        ClassicalSettings::default().interaction.nu
    }
    pub fn r_nu() -> f64 {
        ClassicalSettings::default().interaction.r_nu
    }
    pub fn c() -> Vec<f64> {
        ClassicalSettings::default().c
    }
    pub fn n_steps() -> usize {
        ClassicalSettings::default().n_steps
    }
    pub fn e_k() -> usize {
        ClassicalSettings::default().e_k
    }
    pub fn e_l() -> usize {
        ClassicalSettings::default().e_l
    }
    pub fn phi_merge() -> f64 {
        ClassicalSettings::default().phi_merge
    }
    pub fn swim_limit() -> usize {
        ClassicalSettings::default().swim_limit
    }
    pub fn init_range() -> f64 {
        5.0
    }
}

impl ClassicalConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn settings(&self) -> ClassicalSettings {
        ClassicalSettings {
            interaction: Interaction {
                a: self.a,
                r_a: self.r_a,
                nu: self.nu,
                r_nu: self.r_nu,
                m: self.m,
            },
            chi_c: self.chi_c,
            c: self.c.clone(),
            n_steps: self.n_steps,
            e_k: self.e_k,
            e_l: self.e_l,
            phi_merge: self.phi_merge,
            swim_limit: self.swim_limit,
        }
    }

    pub fn cost_model(&self) -> CombinedCost {
        CombinedCost {
            arrays: self.cost_arrays.clone(),
            quadratic: self.quadratic.clone(),
        }
    }

    /// Draws the initial population from `seed` and runs the optimizer with
    /// a seed derived from it.
    pub fn run(&self, seed: u64) -> Result<ClassicalRun> {
        if self.p == 0 || self.s == 0 {
            return Err(domain("p and S must be at least 1"));
        }
        if let Some(q) = &self.quadratic {
            if q.center.len() != self.p {
                return Err(Error::DimensionMismatch {
                    expected: self.p,
                    found: q.center.len(),
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let population = Population::random(self.p, self.s, self.init_range, &mut rng)?;
        optimize_classical(population, &self.cost_model(), &self.settings(), rng.gen())
    }
}
