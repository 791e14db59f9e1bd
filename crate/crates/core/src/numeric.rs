//! Small numerical helpers shared across modules.

/// `log Σ exp(a_i)` with a max shift. Returns `-inf` for an empty slice.
pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values
        .clone()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.into_iter().map(|a| (a - max).exp()).sum();
    max + sum.ln()
}

/// Volume of the Euclidean unit ball in `d` dimensions.
pub(crate) fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::PI.powf(half) / libm::tgamma(half + 1.0)
}

/// Uniform 1-D grid of `n ≥ 2` nodes on `[lo, hi]`.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}
