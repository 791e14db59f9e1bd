//! Derived scalars of the algorithm and its error bounds.
//!
//! Everything is computed once, in the only order in which each formula's
//! inputs already exist:
//!
//! ```text
//! α → ρ̄ → (R_Ξ, r) → H_max → C̄ → κ̄ → C' → C → (γ, μ) → l, m_u, ln M
//! ```

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SipError};
use crate::measure::h_func;
use crate::numeric::unit_ball_volume;
use crate::problem::{BoxSet, SipProblem};

/// User-facing run parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgoParams {
    /// Regularization accuracy `ε`.
    pub epsilon: f64,
    /// Slack `θ` added to the dual bound.
    pub theta: f64,
    /// Mass `ρ₀` of the uniform reference measure.
    pub rho0: f64,
    /// Number of iterates `K`.
    #[serde(alias = "K")]
    pub iterations: usize,
    /// Number of Monte Carlo samples `N`.
    #[serde(alias = "N")]
    pub samples: usize,
    /// Failure probability for the sample-size bound.
    pub delta: f64,
    /// Monte Carlo error budget used in the sample-size and bound formulas.
    pub eps_mc: f64,
    pub seed: u64,
    /// Initial point; box center when absent.
    pub x0: Option<Vec<f64>>,
    /// Nodes per dimension of the grid used for the Slater margin, reduced
    /// when needed so the grid has at most [`ALPHA_GRID_MAX_POINTS`] nodes.
    pub alpha_grid: usize,
    /// Upper cap reported for the theoretical sample size.
    pub sample_size_cap: u64,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            theta: 1.0,
            rho0: 1.0,
            iterations: 60_000,
            samples: 1000,
            delta: 0.1,
            eps_mc: 0.1,
            seed: 1,
            x0: None,
            alpha_grid: 1001,
            sample_size_cap: 1_000_000_000,
        }
    }
}

impl AlgoParams {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("theta", self.theta),
            ("rho0", self.rho0),
            ("eps_mc", self.eps_mc),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SipError::Params(format!("{name} = {v} must be finite and > 0")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(SipError::Params(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if self.iterations == 0 {
            return Err(SipError::Params("iterations must be >= 1".into()));
        }
        if self.samples == 0 {
            return Err(SipError::Params("samples must be >= 1".into()));
        }
        if self.alpha_grid < 2 {
            return Err(SipError::Params("alpha_grid must be >= 2".into()));
        }
        Ok(())
    }
}

/// Every scalar the solver and its bounds need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Slater margin `α`, a grid lower bound on `min_ξ −g(x̃, ξ)`.
    pub alpha: f64,
    /// Dual mass cap `ρ̄(θ)`.
    pub rho_bar: f64,
    /// Inradius `R_Ξ` of the index box.
    pub r_xi: f64,
    /// Volume ratio `r` between the inscribed ball and `Ξ`.
    pub ratio_r: f64,
    pub h_max: f64,
    pub c_bar: f64,
    pub c_prime: f64,
    pub c: f64,
    pub kappa_bar: f64,
    /// Step length `γ`.
    pub gamma: f64,
    /// Dual exponent `l = 1 / (1 + γκ̄)`.
    pub l: f64,
    pub mu: f64,
    /// Uniform reference density `m_u = ρ₀ / vol(Ξ)`.
    pub m_u: f64,
    /// `ln M = G_max / κ̄`. Stored in log form since `M` overflows `f64` for
    /// small `κ̄`.
    pub log_m: f64,
    pub d: usize,
    pub vol_xi: f64,
    pub diam_x: f64,
    pub diam_xi: f64,
    pub rho0: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub iterations: usize,
    /// `ρ̄ G_max² + 2 (L_f + ρ̄ L_{g,X})²`.
    pub step_scale: f64,
}

impl DerivedConstants {
    /// Density bound `M = exp(G_max / κ̄)`; may be `+∞`.
    pub fn m(&self) -> f64 {
        self.log_m.exp()
    }

    /// Smallest `K` for which `γ κ̄ ≤ 1` is guaranteed.
    pub fn min_iterations_for_half_l(&self) -> f64 {
        2.0 * (self.c + self.diam_x) * self.kappa_bar.powi(2) / self.step_scale
    }

    /// Human-readable list of broken invariants; empty when all hold.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                out.push(msg)
            }
        };
        need(self.kappa_bar > 0.0 && self.kappa_bar <= 1.0, format!("kappa_bar = {} not in (0, 1]", self.kappa_bar));
        // l rounds to exactly 1 when γκ̄ is below machine epsilon.
        need(self.l > 0.0 && self.l <= 1.0, format!("l = {} not in (0, 1)", self.l));
        need(self.alpha > 0.0, format!("alpha = {} not > 0", self.alpha));
        need(self.rho_bar > 0.0, format!("rho_bar = {} not > 0", self.rho_bar));
        need(self.ratio_r > 0.0 && self.ratio_r <= 1.0 + 1e-12, format!("r = {} not in (0, 1]", self.ratio_r));
        need(self.log_m > 0.0, format!("M = exp({}) not > 1", self.log_m));
        need(self.rho0 <= self.rho_bar, format!("rho0 = {} exceeds rho_bar = {}", self.rho0, self.rho_bar));
        need(self.c >= self.rho0, format!("C = {} below rho0 = {}", self.c, self.rho0));
        if self.iterations as f64 >= self.min_iterations_for_half_l() {
            need(self.l >= 0.5, format!("l = {} below 1/2 although K is large enough", self.l));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("c_prime", self.c_prime),
            ("h_max", self.h_max),
            ("m_u", self.m_u),
        ] {
            need(v.is_finite(), format!("{name} = {v} is not finite"));
        }
        out
    }

    /// Right-hand sides of the optimality-gap and violation bounds with the
    /// per-iteration gradient error replaced by the budget `eps_mc`.
    ///
    /// These hold with probability `1 − δ` only when `N` meets
    /// [`compute_sample_size`]; they are not certificates.
    pub fn theoretical_bounds(&self, eps_mc: f64) -> (f64, f64) {
        let k = self.iterations as f64;
        let gap = self.mu / k.sqrt()
            + self.diam_x.sqrt() * eps_mc
            + 1.5 * self.gamma * eps_mc * eps_mc
            + self.epsilon;
        (gap, gap / self.rho_bar)
    }
}

/// Total node budget of the Slater-margin grid.
pub const ALPHA_GRID_MAX_POINTS: usize = 1 << 21;

/// Nodes per dimension actually used for the Slater margin in dimension `d`.
pub fn alpha_grid_per_dim(requested: usize, d: usize) -> usize {
    let mut n = requested.max(2);
    while n > 2 && (n as f64).powi(d as i32) > ALPHA_GRID_MAX_POINTS as f64 {
        n -= 1;
    }
    n
}

/// Slater margin: the grid minimum of `−g(x̃, ξ)`, reduced by the
/// Lipschitz constant times the largest distance from a point of `Ξ` to its
/// nearest grid node.
pub fn compute_alpha(problem: &SipProblem, grid_per_dim: usize) -> Result<f64> {
    if grid_per_dim < 2 {
        return Err(SipError::Params("grid_per_dim must be >= 2".into()));
    }
    let min_slack = problem
        .xi_box
        .tensor_grid(grid_per_dim)
        .iter()
        .map(|xi| -problem.g(&problem.slater_point, xi))
        .fold(f64::INFINITY, f64::min);
    let h2: f64 = problem
        .xi_box
        .widths()
        .map(|w| (w / (grid_per_dim - 1) as f64).powi(2))
        .sum();
    let margin = problem.slater_lipschitz_xi() * 0.5 * h2.sqrt();
    let alpha = min_slack - margin;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(SipError::SlaterMargin { alpha });
    }
    Ok(alpha)
}

/// `ρ̄(θ) = (f(x̃) − LB) / α + θ`, with the dual lower bound `LB` standing in
/// for the unknown dual value.
pub fn compute_rho_bar(problem: &SipProblem, alpha: f64, theta: f64) -> f64 {
    (problem.f(&problem.slater_point) - problem.dual_lb) / alpha + theta
}

/// Inradius `R_Ξ` (smallest half-width) and the volume ratio of the
/// inscribed ball to the box.
pub fn compute_ball_ratio(xi_box: &BoxSet) -> Result<(f64, f64)> {
    if !xi_box.is_full_dimensional() {
        return Err(SipError::DegenerateBox("index box has zero volume".into()));
    }
    let r_xi = xi_box.widths().fold(f64::INFINITY, f64::min) / 2.0;
    let d = xi_box.dim();
    let ratio = unit_ball_volume(d) * r_xi.powi(d as i32) / xi_box.volume();
    Ok((r_xi, ratio))
}

/// `max_{ρ ∈ [0, ρ̄]} H(ρ, ρ₀)`. `H(·, ρ₀)` is convex, so the maximum sits at
/// an endpoint, and `H(0, ρ₀) = ρ₀`.
pub fn compute_h_max(rho_bar: f64, rho0: f64) -> Result<f64> {
    if !(rho0 > 0.0 && rho0 <= rho_bar) {
        return Err(SipError::Params(format!("need 0 < rho0 <= rho_bar, got rho0 = {rho0}, rho_bar = {rho_bar}")));
    }
    Ok(rho0.max(h_func(rho_bar, rho0)?))
}

/// `C̄(θ) = ρ̄ L_{g,Ξ} (R_Ξ + D_Ξ) − ρ̄ log r + H_max`.
pub fn compute_c_bar(rho_bar: f64, l_g_xi: f64, r_xi: f64, diam_xi: f64, ratio_r: f64, h_max: f64) -> f64 {
    rho_bar * l_g_xi * (r_xi + diam_xi) - rho_bar * ratio_r.ln() + h_max
}

/// `κ̄(ε) = min{ ε/(2C̄), (ε/(2ρ̄d))², ε/ρ₀, 1 }`.
pub fn compute_kappa_bar(eps: f64, c_bar: f64, rho_bar: f64, rho0: f64, d: usize) -> f64 {
    (eps / (2.0 * c_bar))
        .min((eps / (2.0 * rho_bar * d as f64)).powi(2))
        .min(eps / rho0)
        .min(1.0)
}

/// `C'(ε,θ) = −ρ̄ log(κ̄) d + C̄`.
pub fn compute_c_prime(rho_bar: f64, kappa_bar: f64, d: usize, c_bar: f64) -> f64 {
    -rho_bar * kappa_bar.ln() * d as f64 + c_bar
}

/// Step length `γ` and rate constant `μ`:
///
/// ```text
/// γ = sqrt(2(C + D_X) / (K·S)),   μ = sqrt(2(C + D_X)·S),
/// S = ρ̄ G_max² + 2 (L_f + ρ̄ L_{g,X})²
/// ```
///
/// so that `μ γ = 2(C + D_X)/√K`.
pub fn compute_step_and_mu(
    k: usize,
    c: f64,
    diam_x: f64,
    rho_bar: f64,
    g_max: f64,
    l_f: f64,
    l_g_x: f64,
) -> (f64, f64) {
    let s = step_scale(rho_bar, g_max, l_f, l_g_x);
    let num = 2.0 * (c + diam_x);
    ((num / (k as f64 * s)).sqrt(), (num * s).sqrt())
}

fn step_scale(rho_bar: f64, g_max: f64, l_f: f64, l_g_x: f64) -> f64 {
    rho_bar * g_max * g_max + 2.0 * (l_f + rho_bar * l_g_x).powi(2)
}

/// One application of `R(r) = (1+β)((1+r)/(1−r))^l − 1`; `+∞` once `r ≥ 1`.
pub fn r_map(r: f64, beta: f64, l: f64) -> f64 {
    if r >= 1.0 || r.is_nan() {
        return f64::INFINITY;
    }
    (1.0 + beta) * ((1.0 + r) / (1.0 - r)).powf(l) - 1.0
}

/// `R^k(β)`: `R` applied `k` times starting from `r = β`, with the same `β`
/// inside `R`. Returns `+∞` as soon as an iterate reaches 1.
pub fn iterate_r(beta: f64, l: f64, k: usize) -> f64 {
    let mut r = beta;
    for _ in 0..k {
        r = r_map(r, beta, l);
        if !r.is_finite() || r >= 1.0 {
            return f64::INFINITY;
        }
    }
    r
}

/// Largest `β` with `R^k(β) ≤ eps_target` for every `k ≤ K − 1`.
///
/// `R^k(β)` grows in both `k` and `β`, so only `k = K − 1` is checked. For
/// `K = 1` the constraint set is empty and `eps_target` itself is returned.
/// The result is bracketed to adjacent floating-point values.
pub fn eta_bisect(eps_target: f64, k: usize, l: f64) -> Result<f64> {
    if !(eps_target > 0.0 && eps_target.is_finite()) {
        return Err(SipError::Domain(format!("eps_target = {eps_target} must be > 0")));
    }
    if !(0.5..=1.0).contains(&l) {
        return Err(SipError::Domain(format!("l = {l} must lie in [1/2, 1]")));
    }
    if k == 0 {
        return Err(SipError::Domain("K must be >= 1".into()));
    }
    if k == 1 {
        return Ok(eps_target);
    }
    let steps = k - 1;
    let ok = |b: f64| iterate_r(b, l, steps) <= eps_target;
    // Halve until feasible, then bisect inside [lo, 2·lo].
    let mut hi = eps_target;
    let mut lo = eps_target / 2.0;
    while !ok(lo) {
        hi = lo;
        lo /= 2.0;
        if lo == 0.0 {
            return Err(SipError::Domain("eta underflowed".into()));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid
        } else {
            hi = mid
        }
    }
    Ok(lo)
}

/// The two terms of [`compute_sample_size`] before rounding:
/// the Hoeffding term `2L²M²ρ₀²/ε² · ln(4K/δ)` and the error-propagation term
/// `ln(4K/δ) / (2η²)`.
///
/// For `K ≥ 2` the second term is never smaller than the first, because
/// `η(t, K) < t` with `t = ε/(2ρ₀LM)`.
pub fn sample_size_terms(
    eps_mc: f64,
    delta: f64,
    k: usize,
    l_g_x: f64,
    m: f64,
    rho0: f64,
    l: f64,
) -> Result<(f64, f64)> {
    if !(eps_mc > 0.0 && delta > 0.0 && delta < 1.0 && l_g_x > 0.0 && m > 0.0 && rho0 > 0.0 && k >= 1) {
        return Err(SipError::Domain("sample size inputs must be positive and delta in (0,1)".into()));
    }
    let log_term = (4.0 * k as f64 / delta).ln();
    let first = 2.0 * (l_g_x * m * rho0 / eps_mc).powi(2) * log_term;
    let target = eps_mc / (2.0 * rho0 * l_g_x * m);
    let second = if target > 0.0 && target.is_finite() {
        let eta = eta_bisect(target, k, l)?;
        log_term / (2.0 * eta * eta)
    } else {
        f64::INFINITY
    };
    Ok((first, second))
}

/// Theoretical number of samples,
/// `max{ 2L²M²ρ₀²/ε² · ln(4K/δ),  ln(4K/δ) / (2 η(ε/(2ρ₀LM), K)²) }`,
/// rounded up. Saturates at `u64::MAX` when the bound is infinite.
pub fn compute_sample_size(
    eps_mc: f64,
    delta: f64,
    k: usize,
    l_g_x: f64,
    m: f64,
    rho0: f64,
    l: f64,
) -> Result<u64> {
    let (first, second) = sample_size_terms(eps_mc, delta, k, l_g_x, m, rho0, l)?;
    // `as` saturates, mapping +∞ to u64::MAX.
    Ok(first.max(second).ceil() as u64)
}

/// [`compute_sample_size`] capped at `cap`, logging a warning when the cap
/// binds. Returns the capped value and whether the cap was applied.
pub fn capped_sample_size(required: u64, cap: u64) -> (u64, bool) {
    if required > cap {
        warn!("theoretical sample size {required} exceeds the cap {cap}; reporting the cap");
        (cap, true)
    } else {
        (required, false)
    }
}

/// Computes all derived constants for `problem` under `params`.
pub fn derive(problem: &SipProblem, params: &AlgoParams) -> Result<DerivedConstants> {
    params.check()?;
    let pc = &problem.constants;
    let d = problem.dim_xi();
    let alpha = compute_alpha(problem, alpha_grid_per_dim(params.alpha_grid, d))?;
    let rho_bar = compute_rho_bar(problem, alpha, params.theta);
    let (r_xi, ratio_r) = compute_ball_ratio(&problem.xi_box)?;
    let h_max = compute_h_max(rho_bar, params.rho0)?;
    let diam_xi = problem.xi_box.diameter();
    let diam_x = problem.x_box.diameter();
    let c_bar = compute_c_bar(rho_bar, pc.lipschitz_g_xi, r_xi, diam_xi, ratio_r, h_max);
    let kappa_bar = compute_kappa_bar(params.epsilon, c_bar, rho_bar, params.rho0, d);
    let c_prime = compute_c_prime(rho_bar, kappa_bar, d, c_bar);
    let c = params.rho0.max(c_prime);
    let (gamma, mu) = compute_step_and_mu(
        params.iterations,
        c,
        diam_x,
        rho_bar,
        pc.g_max,
        pc.lipschitz_f,
        pc.lipschitz_g_x,
    );
    let vol_xi = problem.xi_box.volume();
    Ok(DerivedConstants {
        alpha,
        rho_bar,
        r_xi,
        ratio_r,
        h_max,
        c_bar,
        c_prime,
        c,
        kappa_bar,
        gamma,
        l: 1.0 / (1.0 + gamma * kappa_bar),
        mu,
        m_u: params.rho0 / vol_xi,
        log_m: pc.g_max / kappa_bar,
        d,
        vol_xi,
        diam_x,
        diam_xi,
        rho0: params.rho0,
        theta: params.theta,
        epsilon: params.epsilon,
        iterations: params.iterations,
        step_scale: step_scale(rho_bar, pc.g_max, pc.lipschitz_f, pc.lipschitz_g_x),
    })
}
