//! Divergences on nonnegative measures.
//!
//! A [`DiscreteMeasure`] is a vector of atom masses on a shared, positional
//! support. It stands either for a genuine finite measure or for a density
//! sampled on a grid, in which case the caller multiplies densities by
//! quadrature weights before calling in here.
//!
//! The generalized divergence
//!
//! ```text
//! B(Λ, Γ) = Σ λ_i log(λ_i / γ_i) − (Σ λ_i − Σ γ_i)      if Λ ≪ Γ
//!         = +∞                                          otherwise
//! ```
//!
//! splits into a mass term and a shape term,
//! `B(Λ, Γ) = ρ(Λ)·KL(φ(Λ), φ(Γ)) + H(ρ(Λ), ρ(Γ))`, where `ρ` is total mass,
//! `φ = Λ / ρ(Λ)` and `H(ρ, ρ') = ρ log(ρ/ρ') − ρ + ρ'`.
//!
//! `+∞` is an ordinary return value, never an error.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SipError};

/// Tolerance on the unit-mass precondition of [`kl_divergence`].
pub const PROBABILITY_MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(SipError::Domain(format!("weight {i} = {w} is not a finite nonnegative number")));
        }
        Ok(Self { weights })
    }

    /// Uniform measure with total mass `mass` on `n` atoms.
    pub fn uniform(n: usize, mass: f64) -> Result<Self> {
        Self::new(vec![mass / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Total mass `ρ(Λ)`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Probability vector `φ(Λ) = Λ / ρ(Λ)`; `None` for the zero measure.
    pub fn normalized(&self) -> Option<DiscreteMeasure> {
        let m = self.mass();
        (m > 0.0).then(|| DiscreteMeasure { weights: self.weights.iter().map(|w| w / m).collect() })
    }

    /// `Σ |λ_i − γ_i|`.
    pub fn l1_distance(&self, other: &DiscreteMeasure) -> f64 {
        self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// `λ log(λ/γ) − λ + γ` for one atom, with `0·log 0 = 0`.
///
/// Written as `γ·h(λ/γ)` with `h(t) = t log t − t + 1`, using `ln_1p` near
/// `t = 1` so that near-identical atoms do not lose their (tiny, positive)
/// contribution to cancellation.
fn atom_divergence(lambda: f64, gamma: f64) -> f64 {
    if lambda == 0.0 {
        return gamma;
    }
    if gamma == 0.0 {
        return f64::INFINITY;
    }
    let t = lambda / gamma;
    let u = t - 1.0;
    let h = if u.abs() < 0.5 { t * u.ln_1p() - u } else { t * t.ln() - u };
    gamma * h.max(0.0)
}

/// `H(ρ, ρ') = ρ log(ρ/ρ') − ρ + ρ'` with `0·log 0 = 0`.
///
/// Nonnegative, zero iff `ρ = ρ'`, convex in `ρ`.
pub fn h_func(rho: f64, rho_prime: f64) -> Result<f64> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(SipError::Domain(format!("H requires rho >= 0, got {rho}")));
    }
    if !(rho_prime > 0.0 && rho_prime.is_finite()) {
        return Err(SipError::Domain(format!("H requires rho' > 0, got {rho_prime}")));
    }
    Ok(atom_divergence(rho, rho_prime))
}

fn check_same_support(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<()> {
    if a.len() != b.len() {
        return Err(SipError::Dimension { expected: a.len(), got: b.len() });
    }
    Ok(())
}

/// Kullback-Leibler divergence `Σ φ_i log(φ_i / ψ_i)` of two probability
/// vectors. `+∞` when `φ` charges an atom that `ψ` does not.
pub fn kl_divergence(phi: &DiscreteMeasure, psi: &DiscreteMeasure) -> Result<f64> {
    check_same_support(phi, psi)?;
    for (name, m) in [("phi", phi), ("psi", psi)] {
        let mass = m.mass();
        if (mass - 1.0).abs() > PROBABILITY_MASS_TOL {
            return Err(SipError::Domain(format!("{name} has mass {mass}, expected 1")));
        }
    }
    let mut total = 0.0;
    for (p, q) in phi.weights.iter().zip(&psi.weights) {
        if *p == 0.0 {
            continue;
        }
        if *q == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += p * (p / q).ln();
    }
    Ok(total)
}

/// Generalized KL divergence `B(Λ, Γ)` between two nonnegative measures on
/// the same support.
pub fn b_divergence(lambda: &DiscreteMeasure, gamma: &DiscreteMeasure) -> Result<f64> {
    check_same_support(lambda, gamma)?;
    Ok(lambda
        .weights
        .iter()
        .zip(&gamma.weights)
        .map(|(l, g)| atom_divergence(*l, *g))
        .sum())
}

/// `B(Λ, Γ)` through its decomposition `ρ(Λ)·KL(φ(Λ), φ(Γ)) + H(ρ(Λ), ρ(Γ))`.
///
/// An independent route to [`b_divergence`]; requires `ρ(Γ) > 0`.
pub fn b_divergence_decomposed(lambda: &DiscreteMeasure, gamma: &DiscreteMeasure) -> Result<f64> {
    check_same_support(lambda, gamma)?;
    let (rl, rg) = (lambda.mass(), gamma.mass());
    let h = h_func(rl, rg)?;
    let Some(phi) = lambda.normalized() else {
        return Ok(h);
    };
    let psi = gamma.normalized().expect("positive mass checked by h_func");
    // Renormalized vectors can miss unit mass by a few ulps.
    let kl: f64 = phi
        .weights
        .iter()
        .zip(&psi.weights)
        .map(|(p, q)| match (*p, *q) {
            (0.0, _) => 0.0,
            (_, 0.0) => f64::INFINITY,
            (p, q) => p * (p / q).ln(),
        })
        .sum();
    Ok(rl * kl + h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(w.to_vec()).unwrap()
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_func(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(h_func(0.0, 3.5).unwrap(), 3.5);
        assert!((h_func(2.0, 1.0).unwrap() - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((h_func(2.0, 1.0).unwrap() - 0.386294).abs() < 1e-6);
    }

    #[test]
    fn h_domain_errors() {
        assert!(h_func(-1.0, 1.0).is_err());
        assert!(h_func(1.0, 0.0).is_err());
        assert!(h_func(1.0, -2.0).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&m(&[0.3, 0.7]), &m(&[0.3, 0.7])).unwrap(), 0.0);
        let v = kl_divergence(&m(&[0.5, 0.5]), &m(&[0.25, 0.75])).unwrap();
        assert!((v - (0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln())).abs() < 1e-15);
        assert!((v - 0.143841).abs() < 1e-6);
        assert_eq!(kl_divergence(&m(&[1.0, 0.0]), &m(&[0.0, 1.0])).unwrap(), f64::INFINITY);
    }

    #[test]
    fn kl_rejects_non_probability() {
        assert!(matches!(kl_divergence(&m(&[0.5, 0.6]), &m(&[0.5, 0.5])), Err(SipError::Domain(_))));
        assert!(kl_divergence(&m(&[1.0]), &m(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn b_examples() {
        let a = m(&[0.2, 1.3, 0.5]);
        assert_eq!(b_divergence(&a, &a).unwrap(), 0.0);
        // Uniform measures of masses 3 and 2: only the mass term survives.
        let b = b_divergence(&DiscreteMeasure::uniform(4, 3.0).unwrap(), &DiscreteMeasure::uniform(4, 2.0).unwrap())
            .unwrap();
        assert!((b - (3.0 * 1.5f64.ln() - 1.0)).abs() < 1e-14);
        assert!((b - 0.216395).abs() < 1e-6);
        assert_eq!(b_divergence(&m(&[1.0, 1.0]), &m(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        // Zero atoms of Λ are allowed anywhere.
        assert!(b_divergence(&m(&[0.0, 1.0]), &m(&[1.0, 1.0])).unwrap().is_finite());
    }

    #[test]
    fn negative_weights_are_rejected() {
        assert!(DiscreteMeasure::new(vec![1.0, -0.1]).is_err());
        assert!(DiscreteMeasure::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn b_of_zero_measure_is_reference_mass() {
        let z = m(&[0.0, 0.0, 0.0]);
        let u = DiscreteMeasure::uniform(3, 1.7).unwrap();
        assert!((b_divergence(&z, &u).unwrap() - 1.7).abs() < 1e-15);
        assert!((b_divergence_decomposed(&z, &u).unwrap() - 1.7).abs() < 1e-15);
    }

    fn positive_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..48).prop_flat_map(|n| {
            (
                proptest::collection::vec(1e-6f64..5.0, n),
                proptest::collection::vec(1e-6f64..5.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn decomposition_identity((a, b) in positive_pair()) {
            let (a, b) = (m(&a), m(&b));
            let direct = b_divergence(&a, &b).unwrap();
            let split = b_divergence_decomposed(&a, &b).unwrap();
            prop_assert!((direct - split).abs() <= 1e-10 * (1.0 + direct.abs()));
            prop_assert!(direct >= 0.0);
        }

        #[test]
        fn generalized_pinsker((a, b) in positive_pair()) {
            let (a, b) = (m(&a), m(&b));
            let rho = a.mass().max(b.mass());
            let l1 = a.l1_distance(&b);
            prop_assert!(b_divergence(&a, &b).unwrap() >= l1 * l1 / (2.0 * rho) - 1e-10);
        }
    }
}
