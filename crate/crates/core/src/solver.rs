//! Primal-dual iteration with a Monte Carlo dual measure.
//!
//! The index box is sampled once. The dual measure lives on those samples
//! as a normalized density `λ̂ = Λ̂ / m_u`, stored as log-weights. Each
//! round takes the state `(x_k, λ̂_k)` to
//!
//! ```text
//! x_{k+1} = clip_X(x_k − γ (∇f(x_k) + ρ₀/N Σ λ̂_k(ξ_i) ∇ₓg(x_k, ξ_i)))
//! λ̂_{k+1}(ξ_i) = min{ρ/S, 1} · s_k(ξ_i) · λ̂_k(ξ_i)^l
//! ```
//!
//! with `s_k = exp(γ l g(x_k, ·))`, `ρ = ρ̄ / m_u` and
//! `S = vol(Ξ)/N · Σ s_k λ̂_k^l`. After `K − 1` rounds the average of
//! `x_0, …, x_{K−1}` is returned.

use std::time::Instant;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{capped_sample_size, compute_sample_size, derive, AlgoParams, DerivedConstants};
use crate::error::{Result, SipError};
use crate::numeric::log_sum_exp;
use crate::problem::{BoxSet, SipProblem};

/// Relative slack allowed on the mass cap and density bound.
pub const CAP_TOLERANCE: f64 = 1e-9;

/// Default nodes per axis for the violation grid: fine in 1-D, coarser as
/// the grid size grows with the dimension.
pub fn default_violation_grid(d: usize) -> usize {
    match d {
        1 => 10_001,
        2 => 201,
        3 => 41,
        _ => 11,
    }
}

/// `n` i.i.d. uniform points of `xi_box`.
///
/// Generator: `ChaCha8Rng::seed_from_u64(seed)`, drawn point by point and,
/// within a point, coordinate by coordinate. The first `n` points of a
/// longer draw with the same seed are the same points.
pub fn sample_index_points(n: usize, xi_box: &BoxSet, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| xi_box.sample(&mut rng)).collect()
}

/// Dual density on a fixed sample of `Ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledMeasure {
    pub points: Vec<Vec<f64>>,
    /// `log λ̂(ξ_i)`.
    pub log_weights: Vec<f64>,
    /// Whether the last update was scaled down to the mass cap.
    pub mass_cap_active: bool,
}

impl SampledMeasure {
    /// `λ̂ ≡ 1`, i.e. the uniform reference measure of mass `ρ₀`.
    pub fn reference(points: Vec<Vec<f64>>) -> Self {
        let n = points.len();
        Self { points, log_weights: vec![0.0; n], mass_cap_active: false }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Monte Carlo estimate of the total mass, `m_u · vol(Ξ)/N · Σ λ̂_i`.
    pub fn implied_mass(&self, c: &DerivedConstants) -> f64 {
        let n = self.len() as f64;
        c.m_u * c.vol_xi / n * self.log_weights.iter().map(|w| w.exp()).sum::<f64>()
    }
}

/// Log-weights after one dual step, given `g(x_k, ξ_i)` for every sample.
/// Returns the new log-weights and whether the mass cap was applied.
pub(crate) fn dual_step_from_values(
    log_weights: &[f64],
    g_values: &[f64],
    c: &DerivedConstants,
) -> (Vec<f64>, bool) {
    let n = log_weights.len() as f64;
    let a: Vec<f64> = log_weights
        .iter()
        .zip(g_values)
        .map(|(w, g)| c.l * (c.gamma * g + w))
        .collect();
    let log_s = (c.vol_xi / n).ln() + log_sum_exp(a.iter().copied());
    let log_rho = (c.rho_bar / c.m_u).ln();
    let shift = (log_rho - log_s).min(0.0);
    (a.into_iter().map(|v| v + shift).collect(), shift < 0.0)
}

fn check_finite(values: &[f64], iteration: usize, what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(SipError::Numerical {
            iteration,
            message: format!("{what}[{i}] = {} is not finite", values[i]),
        }),
    }
}

/// One Monte Carlo dual step at the primal point `x_k`.
///
/// `iteration` only labels errors.
pub fn dual_update(
    measure: &SampledMeasure,
    x_k: &[f64],
    problem: &SipProblem,
    c: &DerivedConstants,
    iteration: usize,
) -> Result<SampledMeasure> {
    check_finite(&measure.log_weights, iteration, "log_weight")?;
    let g: Vec<f64> = measure.points.iter().map(|xi| problem.g(x_k, xi)).collect();
    check_finite(&g, iteration, "g")?;
    let (log_weights, mass_cap_active) = dual_step_from_values(&measure.log_weights, &g, c);
    check_finite(&log_weights, iteration, "log_weight")?;
    Ok(SampledMeasure { points: measure.points.clone(), log_weights, mass_cap_active })
}

/// Projected step `clip_X(x_k − γ v)`; the exact minimizer of
/// `γ⟨x − x_k, v⟩ + ½‖x − x_k‖²` over a box.
pub fn projected_step(x_k: &[f64], direction: &[f64], gamma: f64, x_box: &BoxSet) -> Vec<f64> {
    let mut x: Vec<f64> = x_k.iter().zip(direction).map(|(x, v)| x - gamma * v).collect();
    x_box.project(&mut x);
    x
}

/// One primal step at `(x_k, λ̂_k)`.
pub fn primal_update(
    x_k: &[f64],
    measure: &SampledMeasure,
    problem: &SipProblem,
    c: &DerivedConstants,
    iteration: usize,
) -> Result<Vec<f64>> {
    let m = problem.dim_x();
    let mut direction = vec![0.0; m];
    let mut grad = vec![0.0; m];
    for (xi, w) in measure.points.iter().zip(&measure.log_weights) {
        problem.functions.constraint_grad_x(x_k, xi, &mut grad);
        let weight = w.exp();
        for (d, g) in direction.iter_mut().zip(&grad) {
            *d += weight * g;
        }
    }
    finish_direction(&mut direction, x_k, measure.len(), problem, c.rho0, iteration)?;
    Ok(projected_step(x_k, &direction, c.gamma, &problem.x_box))
}

/// Turns `Σ λ̂_i ∇ₓg_i` into the full primal direction in place.
fn finish_direction(
    direction: &mut [f64],
    x_k: &[f64],
    n: usize,
    problem: &SipProblem,
    rho0: f64,
    iteration: usize,
) -> Result<()> {
    let mut grad_f = vec![0.0; direction.len()];
    problem.functions.objective_grad(x_k, &mut grad_f);
    let scale = rho0 / n as f64;
    for (d, gf) in direction.iter_mut().zip(&grad_f) {
        *d = gf + scale * *d;
    }
    check_finite(direction, iteration, "primal direction")
}

/// `max_ξ g(x, ξ)` over the tensor grid with `grid_per_dim` nodes per axis.
/// Positive values measure violation, negative values a feasibility margin.
pub fn evaluate_violation(x: &[f64], problem: &SipProblem, grid_per_dim: usize) -> f64 {
    problem
        .xi_box
        .tensor_grid(grid_per_dim)
        .iter()
        .map(|xi| problem.g(x, xi))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Number of averaged iterates `K'`.
    pub k: usize,
    /// `f(x̄_{K'})`.
    pub f_xbar: f64,
    /// `max_ξ g(x̄_{K'}, ξ)` on the violation grid.
    pub violation_xbar: f64,
    /// `f(x_{K'−1})`, the most recent iterate.
    pub f_xlast: f64,
    /// Seconds since the loop started; 0 unless timing is enabled.
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub x_bar: Vec<f64>,
    pub f_bar: f64,
    pub violation_bar: f64,
    pub x_last: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub constants: DerivedConstants,
    pub seed: u64,
    pub samples: usize,
    /// Iterates actually produced; below `constants.iterations` only in a
    /// partial report.
    pub completed_iterations: usize,
    pub violation_grid: usize,
    /// Gap and violation bounds with the gradient error replaced by
    /// `eps_mc`. High-probability statements, not certificates.
    pub theoretical_gap_bound: f64,
    pub theoretical_violation_bound: f64,
    pub eps_mc: f64,
    /// Theoretical sample size after capping, `None` if it is undefined for
    /// these constants (e.g. `l < 1/2`).
    pub required_samples: Option<u64>,
    pub required_samples_capped: bool,
    /// Largest `implied mass / ρ̄` seen during the run.
    pub max_mass_ratio: f64,
    /// Largest `log λ̂` seen during the run.
    pub max_log_weight: f64,
    pub final_measure: SampledMeasure,
}

/// Knobs that do not change the algorithm.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Nodes per axis for violation checks; [`default_violation_grid`] if
    /// unset.
    pub violation_grid: Option<usize>,
    /// Record wall-clock times in checkpoints. Off by default so that
    /// reports are reproducible byte for byte.
    pub timing: bool,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Setup(#[from] SipError),
    /// The loop hit a non-finite value. `partial` covers the iterates
    /// completed before the failure.
    #[error("{error}")]
    Aborted { error: SipError, partial: Box<SolveReport> },
}

/// Runs the solver with constants derived from `params`.
///
/// `checkpoints` lists the `K'` at which to record `x̄_{K'}`; it must be
/// strictly increasing with entries in `1..=K`. The final `K` is always
/// reported through [`SolveReport::x_bar`].
pub fn run(problem: &SipProblem, params: &AlgoParams, checkpoints: &[usize]) -> Result<SolveReport, SolveError> {
    let c = derive(problem, params)?;
    run_with_constants(problem, params, &c, checkpoints, &RunOptions::default())
}

/// Runs the solver with precomputed (possibly overridden) constants.
pub fn run_with_constants(
    problem: &SipProblem,
    params: &AlgoParams,
    c: &DerivedConstants,
    checkpoints: &[usize],
    opts: &RunOptions,
) -> Result<SolveReport, SolveError> {
    params.check()?;
    let k_total = c.iterations;
    if k_total != params.iterations {
        return Err(SipError::Params(format!(
            "constants were derived for K = {k_total}, params ask for K = {}",
            params.iterations
        ))
        .into());
    }
    if let Some(w) = checkpoints.windows(2).find(|w| w[0] >= w[1]) {
        return Err(SipError::Params(format!("checkpoints must be strictly increasing ({} then {})", w[0], w[1])).into());
    }
    if let Some(bad) = checkpoints.iter().find(|&&k| k == 0 || k > k_total) {
        return Err(SipError::Params(format!("checkpoint {bad} outside 1..={k_total}")).into());
    }
    let grid = opts.violation_grid.unwrap_or_else(|| default_violation_grid(problem.dim_xi()));
    if grid < 2 {
        return Err(SipError::Params("violation_grid must be >= 2".into()).into());
    }

    let m = problem.dim_x();
    let x0 = match &params.x0 {
        Some(x0) if x0.len() != m => {
            return Err(SipError::Dimension { expected: m, got: x0.len() }.into());
        }
        Some(x0) if !problem.x_box.contains(x0) => {
            return Err(SipError::Params(format!("x0 = {x0:?} lies outside x_box")).into());
        }
        Some(x0) => x0.clone(),
        None => problem.x_box.center(),
    };

    let required_samples = compute_sample_size(
        params.eps_mc,
        params.delta,
        k_total,
        problem.constants.lipschitz_g_x,
        c.m(),
        c.rho0,
        c.l,
    )
    .ok()
    .map(|n| capped_sample_size(n, params.sample_size_cap));
    match required_samples {
        Some((req, _)) if (params.samples as u64) < req => {
            warn!("running with N = {} samples, below the theoretical requirement {req}", params.samples)
        }
        None => warn!("theoretical sample size is undefined for l = {}", c.l),
        _ => {}
    }

    let points = sample_index_points(params.samples, &problem.xi_box, params.seed);
    let n = points.len();
    let mut measure = SampledMeasure::reference(points);
    let mut x = x0;
    let mut x_sum = vec![0.0; m];
    let mut g_values = vec![0.0; n];
    let mut grad = vec![0.0; m];
    let mut direction = vec![0.0; m];
    let mut cps = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().peekable();
    let mut max_mass_ratio = measure.implied_mass(c) / c.rho_bar;
    let mut max_log_weight = 0.0f64;
    let start = opts.timing.then(Instant::now);

    let snapshot = |x_sum: &[f64], x: &[f64], k: usize| -> (Vec<f64>, Checkpoint) {
        let x_bar: Vec<f64> = x_sum.iter().map(|s| s / k as f64).collect();
        let cp = Checkpoint {
            k,
            f_xbar: problem.f(&x_bar),
            violation_xbar: evaluate_violation(&x_bar, problem, grid),
            f_xlast: problem.f(x),
            wall_time_s: start.map_or(0.0, |t| t.elapsed().as_secs_f64()),
        };
        (x_bar, cp)
    };

    let mut failure = None;
    let mut completed = 0;
    for k in 0..k_total {
        // x holds x_k here.
        for (s, v) in x_sum.iter_mut().zip(&x) {
            *s += v;
        }
        completed = k + 1;
        if next_cp.peek().is_some_and(|&&cp| cp == completed) {
            next_cp.next();
            cps.push(snapshot(&x_sum, &x, completed).1);
        }
        if completed == k_total {
            break;
        }

        direction.fill(0.0);
        for ((xi, w), gv) in measure.points.iter().zip(&measure.log_weights).zip(g_values.iter_mut()) {
            *gv = problem.functions.constraint_with_grad_x(&x, xi, &mut grad);
            let weight = w.exp();
            for (d, g) in direction.iter_mut().zip(&grad) {
                *d += weight * g;
            }
        }
        if let Err(e) = check_finite(&g_values, k, "g")
            .and_then(|_| finish_direction(&mut direction, &x, n, problem, c.rho0, k))
        {
            failure = Some(e);
            break;
        }
        let x_next = projected_step(&x, &direction, c.gamma, &problem.x_box);
        let (lw, cap) = dual_step_from_values(&measure.log_weights, &g_values, c);
        if let Err(e) = check_finite(&lw, k, "log_weight") {
            failure = Some(e);
            break;
        }
        measure.log_weights = lw;
        measure.mass_cap_active = cap;
        max_mass_ratio = max_mass_ratio.max(measure.implied_mass(c) / c.rho_bar);
        max_log_weight = measure.log_weights.iter().copied().fold(max_log_weight, f64::max);
        x = x_next;
    }

    let (x_bar, last) = snapshot(&x_sum, &x, completed);
    let (gap, viol) = c.theoretical_bounds(params.eps_mc);
    let report = SolveReport {
        problem: problem.name.clone(),
        f_bar: last.f_xbar,
        violation_bar: last.violation_xbar,
        x_bar,
        x_last: x,
        checkpoints: cps,
        constants: c.clone(),
        seed: params.seed,
        samples: n,
        completed_iterations: completed,
        violation_grid: grid,
        theoretical_gap_bound: gap,
        theoretical_violation_bound: viol,
        eps_mc: params.eps_mc,
        required_samples: required_samples.map(|r| r.0),
        required_samples_capped: required_samples.is_some_and(|r| r.1),
        max_mass_ratio,
        max_log_weight,
        final_measure: measure,
    };
    match failure {
        None => Ok(report),
        Some(error) => Err(SolveError::Aborted { error, partial: Box::new(report) }),
    }
}
