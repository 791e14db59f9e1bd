//! Quadrature reference implementations for index boxes of dimension 1
//! or 2.
//!
//! A [`DensityGrid`] stores a density on a tensor grid together with
//! composite trapezoid weights. Integrals are weighted sums, and the
//! divergence of two grid densities is [`b_divergence`] applied to their
//! node masses `density × weight`. Since every closed form below uses the
//! same weights for its normalizer, each one is the exact optimizer of the
//! discretized problem it stands for. The dominance checks in the tests
//! rely on this.

use serde::{Deserialize, Serialize};

use crate::constants::DerivedConstants;
use crate::error::{Result, SipError};
use crate::measure::{b_divergence, h_func, DiscreteMeasure};
use crate::numeric::{log_sum_exp, unit_ball_volume};
use crate::problem::{BoxSet, SipProblem};

/// Default nodes per axis in one dimension.
pub const DEFAULT_NODES_1D: usize = 2049;
/// Default nodes per axis in two dimensions.
pub const DEFAULT_NODES_2D: usize = 257;
/// Largest index-box dimension the oracle supports.
pub const MAX_DIM: usize = 2;

pub fn default_nodes(d: usize) -> usize {
    if d == 1 {
        DEFAULT_NODES_1D
    } else {
        DEFAULT_NODES_2D
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    /// Tensor-grid nodes, last coordinate fastest.
    pub nodes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Composite trapezoid weights; they sum to `vol(Ξ)`.
    pub quad_weights: Vec<f64>,
    /// Per-axis `(lower, upper, nodes)`, for interpolation.
    axes: Vec<(f64, f64, usize)>,
}

impl DensityGrid {
    /// Zero density on the trapezoid grid with `n` nodes per axis.
    pub fn trapezoid(xi_box: &BoxSet, n: usize) -> Result<Self> {
        let d = xi_box.dim();
        if d > MAX_DIM {
            return Err(SipError::Params(format!("oracle supports d <= {MAX_DIM}, got d = {d}")));
        }
        if n < 2 {
            return Err(SipError::Params("quadrature needs at least 2 nodes per axis".into()));
        }
        if !xi_box.is_full_dimensional() {
            return Err(SipError::DegenerateBox("index box has zero volume".into()));
        }
        let axis_weights: Vec<Vec<f64>> = xi_box
            .widths()
            .map(|w| {
                let h = w / (n - 1) as f64;
                (0..n).map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h }).collect()
            })
            .collect();
        let nodes = xi_box.tensor_grid(n);
        let mut quad_weights = Vec::with_capacity(nodes.len());
        let mut idx = vec![0usize; d];
        for _ in 0..nodes.len() {
            quad_weights.push(idx.iter().zip(&axis_weights).map(|(i, w)| w[*i]).product());
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
        let axes = xi_box.lower().iter().zip(xi_box.upper()).map(|(lo, hi)| (*lo, *hi, n)).collect();
        Ok(Self { values: vec![0.0; nodes.len()], nodes, quad_weights, axes })
    }

    /// Uniform density of total mass `mass`.
    pub fn uniform(xi_box: &BoxSet, n: usize, mass: f64) -> Result<Self> {
        let mut g = Self::trapezoid(xi_box, n)?;
        g.values.fill(mass / xi_box.volume());
        Ok(g)
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nodes.len() {
            return Err(SipError::Dimension { expected: self.nodes.len(), got: values.len() });
        }
        Ok(Self { values, ..self.clone() })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.quad_weights.iter().sum()
    }

    /// `∫ h(ξ) density(ξ) dξ`, with `h` given at the nodes.
    pub fn integrate(&self, h: impl IntoIterator<Item = f64>) -> f64 {
        self.values.iter().zip(&self.quad_weights).zip(h).map(|((v, w), h)| v * w * h).sum()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().zip(&self.quad_weights).map(|(v, w)| v * w).sum()
    }

    /// Node masses `density × weight`, the discrete surrogate of the measure.
    pub fn node_masses(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.values.iter().zip(&self.quad_weights).map(|(v, w)| v * w).collect())
    }

    /// Piecewise (bi)linear interpolation of the density.
    pub fn interpolate(&self, xi: &[f64]) -> f64 {
        // Per axis: lower node index and the fractional offset.
        let cells: Vec<(usize, f64)> = self
            .axes
            .iter()
            .zip(xi)
            .map(|(&(lo, hi, n), &v)| {
                let s = ((v - lo) / (hi - lo) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
                let i = (s.floor() as usize).min(n - 2);
                (i, s - i as f64)
            })
            .collect();
        let n = self.axes[0].2;
        let d = cells.len();
        let mut total = 0.0;
        for corner in 0..(1usize << d) {
            let mut flat = 0;
            let mut weight = 1.0;
            for (k, (i, t)) in cells.iter().enumerate() {
                let up = (corner >> (d - 1 - k)) & 1 == 1;
                flat = flat * n + i + usize::from(up);
                weight *= if up { *t } else { 1.0 - t };
            }
            if weight != 0.0 {
                total += weight * self.values[flat];
            }
        }
        total
    }
}

fn g_on_grid(grid: &DensityGrid, x: &[f64], problem: &SipProblem) -> Result<Vec<f64>> {
    let g: Vec<f64> = grid.nodes.iter().map(|xi| problem.g(x, xi)).collect();
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(SipError::Domain(format!("g(x, {:?}) = {} is not finite", grid.nodes[i], g[i])));
    }
    Ok(g)
}

/// Closed-form dual update on the grid:
///
/// ```text
/// Λ_{k+1} = min{ρ̄ / I, 1} · u^{γκ̄l} exp(γ l g(x_k, ·)) Λ_k^l,   u = ρ₀ / vol(Ξ),
/// ```
///
/// with `I` the quadrature integral of the unclipped expression.
pub fn exact_dual_update_grid(
    lambda_k: &DensityGrid,
    x_k: &[f64],
    c: &DerivedConstants,
    problem: &SipProblem,
) -> Result<DensityGrid> {
    if let Some(v) = lambda_k.values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(SipError::Domain(format!("lambda_k must be strictly positive, found {v}")));
    }
    let g = g_on_grid(lambda_k, x_k, problem)?;
    let log_u = (c.rho0 / c.vol_xi).ln();
    let log_base: Vec<f64> = g
        .iter()
        .zip(&lambda_k.values)
        .map(|(g, lam)| c.gamma * c.kappa_bar * c.l * log_u + c.gamma * c.l * g + c.l * lam.ln())
        .collect();
    let log_i = log_sum_exp(lambda_k.quad_weights.iter().zip(&log_base).map(|(w, b)| w.ln() + b));
    if !log_i.is_finite() {
        return Err(SipError::Numerical { iteration: 0, message: format!("dual normalizer log I = {log_i}") });
    }
    let shift = (c.rho_bar.ln() - log_i).min(0.0);
    lambda_k.with_values(log_base.into_iter().map(|b| (b + shift).exp()).collect())
}

/// Objective of the dual prox step,
/// `γ(⟨Λ − Λ_k, −G(x_k)⟩ + κ̄ B(Λ, Λ_u)) + B(Λ, Λ_k)`, by quadrature.
///
/// `+∞` when the candidate leaves the feasible set (mass above `ρ̄`) or
/// charges a node where `Λ_k` vanishes.
pub fn brute_force_dual_objective(
    candidate: &DensityGrid,
    lambda_k: &DensityGrid,
    x_k: &[f64],
    c: &DerivedConstants,
    problem: &SipProblem,
) -> Result<f64> {
    if candidate.mass() > c.rho_bar * (1.0 + 1e-12) {
        return Ok(f64::INFINITY);
    }
    let g = g_on_grid(lambda_k, x_k, problem)?;
    let linear: f64 = candidate
        .values
        .iter()
        .zip(&lambda_k.values)
        .zip(&candidate.quad_weights)
        .zip(&g)
        .map(|(((a, b), w), g)| -(a - b) * w * g)
        .sum();
    let reference = candidate.with_values(vec![c.rho0 / c.vol_xi; candidate.len()])?;
    let masses = candidate.node_masses()?;
    let to_ref = b_divergence(&masses, &reference.node_masses()?)?;
    let to_prev = b_divergence(&masses, &lambda_k.node_masses()?)?;
    Ok(c.gamma * (linear + c.kappa_bar * to_ref) + to_prev)
}

/// Log-normalizer `log ∫ exp(g(x, ξ)/κ) dξ` and the nodal `g` values.
fn log_partition(x: &[f64], kappa: f64, grid: &DensityGrid, problem: &SipProblem) -> Result<(f64, Vec<f64>)> {
    if kappa <= 0.0 || kappa.is_nan() {
        return Err(SipError::Domain(format!("kappa = {kappa} must be > 0")));
    }
    let g = g_on_grid(grid, x, problem)?;
    let log_z = log_sum_exp(grid.quad_weights.iter().zip(&g).map(|(w, g)| w.ln() + g / kappa));
    Ok((log_z, g))
}

/// The softmax density `exp(g(x, ·)/κ) / ∫ exp(g(x, ·)/κ)`, the maximizer of
/// `E_φ[g] − κ D(φ, φ_u)` over probability densities.
pub fn phi_kappa_softmax(x: &[f64], kappa: f64, grid: &DensityGrid, problem: &SipProblem) -> Result<DensityGrid> {
    let (log_z, g) = log_partition(x, kappa, grid, problem)?;
    grid.with_values(g.iter().map(|g| (g / kappa - log_z).exp()).collect())
}

/// Regularized inner maximum over measures of mass at most `ρ̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerMax {
    /// `max_Λ ⟨Λ, G(x)⟩ − κ B(Λ, Λ_u)`.
    pub value: f64,
    /// Optimal mass `ρ* = clip(ρ₀ exp(V/κ), 0, ρ̄)`.
    pub rho_star: f64,
    /// Value `V = κ log ∫ exp(g/κ) − κ log vol(Ξ)` of the probability-level
    /// problem.
    pub shape_value: f64,
}

/// Splits the inner maximum into the shape problem, solved by the softmax,
/// and a scalar concave problem in the mass, solved by stationarity.
pub fn inner_max(x: &[f64], kappa: f64, c: &DerivedConstants, grid: &DensityGrid, problem: &SipProblem) -> Result<InnerMax> {
    let (log_z, _) = log_partition(x, kappa, grid, problem)?;
    let shape_value = kappa * log_z - kappa * grid.volume().ln();
    let rho_star = (c.rho0 * (shape_value / kappa).exp()).min(c.rho_bar);
    let value = rho_star * shape_value - kappa * h_func(rho_star, c.rho0)?;
    Ok(InnerMax { value, rho_star, shape_value })
}

pub fn inner_max_value(x: &[f64], kappa: f64, c: &DerivedConstants, grid: &DensityGrid, problem: &SipProblem) -> Result<f64> {
    Ok(inner_max(x, kappa, c, grid, problem)?.value)
}

/// `ρ̄ max(0, max_ξ g(x, ξ))` minus the regularized inner maximum at
/// `κ = κ̄`. Returns the gap and whether it is at most `eps` (the accuracy
/// `κ̄` was derived for).
pub fn regularization_gap_check(
    x: &[f64],
    eps: f64,
    c: &DerivedConstants,
    grid: &DensityGrid,
    problem: &SipProblem,
) -> Result<(f64, bool)> {
    let max_g = g_on_grid(grid, x, problem)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let gap = c.rho_bar * max_g.max(0.0) - inner_max_value(x, c.kappa_bar, c, grid, problem)?;
    Ok((gap, gap <= eps + 1e-9))
}

/// Both sides, in log form, of the lower bound
/// `∫ exp(g/κ) ≥ exp(max g / κ) exp(−L_{g,Ξ}(R_Ξ + D_Ξ)) ω_d (κ R_Ξ)^d`.
///
/// `max g` is taken over the grid nodes. Returns `(log lhs, log rhs)`.
pub fn import_bound_sides(
    x: &[f64],
    kappa: f64,
    c: &DerivedConstants,
    grid: &DensityGrid,
    problem: &SipProblem,
) -> Result<(f64, f64)> {
    let (log_z, g) = log_partition(x, kappa, grid, problem)?;
    let max_g = g.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let d = c.d as f64;
    let rhs = max_g / kappa - problem.constants.lipschitz_g_xi * (c.r_xi + c.diam_xi)
        + unit_ball_volume(c.d).ln()
        + d * (kappa * c.r_xi).ln();
    Ok((log_z, rhs))
}

/// `B(Λ_κ(x), Λ_u)` for the regularized inner maximizer
/// `Λ_κ(x) = ρ* φ_κ(x)`, and the bound `C' = −ρ̄ log(κ) d + C̄` it must
/// respect. Returns `(divergence, bound)`.
pub fn regularized_maximizer_divergence(
    x: &[f64],
    kappa: f64,
    c: &DerivedConstants,
    grid: &DensityGrid,
    problem: &SipProblem,
) -> Result<(f64, f64)> {
    let inner = inner_max(x, kappa, c, grid, problem)?;
    let phi = phi_kappa_softmax(x, kappa, grid, problem)?;
    let lam = phi.with_values(phi.values.iter().map(|v| inner.rho_star * v).collect())?;
    let reference = grid.with_values(vec![c.rho0 / c.vol_xi; grid.len()])?;
    let b = b_divergence(&lam.node_masses()?, &reference.node_masses()?)?;
    let bound = -c.rho_bar * kappa.ln() * c.d as f64 + c.c_bar;
    Ok((b, bound))
}

/// `E_φ[g] − κ D(φ, φ_u)` for a probability density on the grid.
pub fn shape_objective(phi: &DensityGrid, x: &[f64], kappa: f64, problem: &SipProblem) -> Result<f64> {
    let g = g_on_grid(phi, x, problem)?;
    let log_u = -phi.volume().ln();
    let mut e = 0.0;
    let mut kl = 0.0;
    for ((v, w), g) in phi.values.iter().zip(&phi.quad_weights).zip(&g) {
        if *v > 0.0 {
            e += v * w * g;
            kl += v * w * (v.ln() - log_u);
        }
    }
    Ok(e - kappa * kl)
}
