//! Problem definitions: boxes, the objective/constraint callables, the
//! constants the analysis needs, validation, and a small catalog.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SipError};
use crate::numeric::linspace;

/// Axis-aligned box `[lower, upper]`. Used both for the decision set `X`
/// and for the constraint index set `Ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBox> for BoxSet {
    type Error = SipError;
    fn try_from(raw: RawBox) -> Result<Self> {
        BoxSet::new(raw.lower, raw.upper)
    }
}

impl From<BoxSet> for RawBox {
    fn from(b: BoxSet) -> Self {
        RawBox { lower: b.lower, upper: b.upper }
    }
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(SipError::Dimension { expected: lower.len(), got: upper.len() });
        }
        if lower.is_empty() {
            return Err(SipError::DegenerateBox("box has dimension 0".into()));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(SipError::DegenerateBox(format!("bound {i} is not finite")));
            }
            if lo > hi {
                return Err(SipError::DegenerateBox(format!(
                    "lower[{i}] = {lo} exceeds upper[{i}] = {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0, 1]^d`.
    pub fn unit(d: usize) -> Self {
        Self { lower: vec![0.0; d], upper: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo)
    }

    /// Euclidean diameter, `sqrt(Σ (upper_i - lower_i)^2)`.
    pub fn diameter(&self) -> f64 {
        self.widths().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.widths().product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.widths().all(|w| w > 0.0)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Euclidean projection onto the box (coordinate clipping).
    pub fn project(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Uniform draw from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }

    /// Nodes of the tensor grid with `n` points per dimension, row-major with
    /// the last coordinate varying fastest.
    pub fn tensor_grid(&self, n: usize) -> Vec<Vec<f64>> {
        assert!(n >= 2, "a tensor grid needs at least two nodes per dimension");
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| linspace(*lo, *hi, n).collect())
            .collect();
        let total = n.pow(self.dim() as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim()];
        for _ in 0..total {
            out.push(idx.iter().zip(&axes).map(|(i, axis)| axis[*i]).collect());
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

/// Objective and constraint callables of a semi-infinite program.
///
/// Implementations must be re-entrant: the solver and the oracles may call
/// them from several threads on a shared problem.
pub trait SipFunctions: Send + Sync {
    fn objective(&self, x: &[f64]) -> f64;
    fn objective_grad(&self, x: &[f64], grad: &mut [f64]);
    fn constraint(&self, x: &[f64], xi: &[f64]) -> f64;
    /// Gradient of `x ↦ g(x, ξ)`.
    fn constraint_grad_x(&self, x: &[f64], xi: &[f64], grad: &mut [f64]);

    /// `g(x, ξ)` and its `x`-gradient in one call. Override when the two
    /// share work; the solver calls this in its inner loop.
    fn constraint_with_grad_x(&self, x: &[f64], xi: &[f64], grad: &mut [f64]) -> f64 {
        self.constraint_grad_x(x, xi, grad);
        self.constraint(x, xi)
    }
}

/// Regularity constants of a problem instance. None of them is estimated
/// automatically; they are part of the problem definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// `L_f`, Lipschitz constant of `f` on `X`.
    pub lipschitz_f: f64,
    /// `L_{g,X}`, Lipschitz constant of `x ↦ g(x, ξ)`, uniform in `ξ`.
    pub lipschitz_g_x: f64,
    /// `L_{g,Ξ}`, Lipschitz constant of `ξ ↦ g(x, ξ)`, uniform in `x`.
    pub lipschitz_g_xi: f64,
    /// `G_max ≥ sup |g|` over `X × Ξ`.
    pub g_max: f64,
    /// Lipschitz constant of `ξ ↦ g(x̃, ξ)` at the Slater point only. Any
    /// value `≤ lipschitz_g_xi` that is still valid tightens the Slater
    /// margin; `None` falls back to `lipschitz_g_xi`.
    #[serde(default)]
    pub slater_lipschitz_xi: Option<f64>,
}

/// A convex semi-infinite program over boxes.
#[derive(Clone)]
pub struct SipProblem {
    pub name: String,
    pub x_box: BoxSet,
    pub xi_box: BoxSet,
    pub functions: Arc<dyn SipFunctions>,
    pub constants: ProblemConstants,
    /// Strictly feasible point `x̃`.
    pub slater_point: Vec<f64>,
    /// Lower bound on the dual optimal value; stands in for `val(D)`.
    pub dual_lb: f64,
}

impl fmt::Debug for SipProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SipProblem")
            .field("name", &self.name)
            .field("x_box", &self.x_box)
            .field("xi_box", &self.xi_box)
            .field("constants", &self.constants)
            .field("slater_point", &self.slater_point)
            .field("dual_lb", &self.dual_lb)
            .finish_non_exhaustive()
    }
}

impl SipProblem {
    pub fn dim_x(&self) -> usize {
        self.x_box.dim()
    }

    pub fn dim_xi(&self) -> usize {
        self.xi_box.dim()
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        self.functions.objective(x)
    }

    pub fn g(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.functions.constraint(x, xi)
    }

    /// Lipschitz constant used for the Slater-margin correction.
    pub fn slater_lipschitz_xi(&self) -> f64 {
        self.constants
            .slater_lipschitz_xi
            .unwrap_or(self.constants.lipschitz_g_xi)
    }

    /// Checks the problem and returns `Err(SipError::Validation)` on any
    /// violation.
    pub fn validated(self, grid_per_dim: usize) -> Result<Self> {
        let violations = validate(&self, grid_per_dim);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(SipError::Validation(violations))
        }
    }
}

/// The standing assumption a [`Violation`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    Dimensions,
    FullDimensionalIndexSet,
    SlaterPoint,
    PositiveConstants,
    ConstraintBound,
    FiniteValues,
    WeakDuality,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::Dimensions => "dimensions",
            Assumption::FullDimensionalIndexSet => "full-dimensional index set",
            Assumption::SlaterPoint => "Slater point",
            Assumption::PositiveConstants => "positive constants",
            Assumption::ConstraintBound => "|g| <= G_max",
            Assumption::FiniteValues => "finite values",
            Assumption::WeakDuality => "dual lower bound",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub assumption: Assumption,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.assumption, self.detail)
    }
}

const VALIDATION_SEED: u64 = 0x0005_EED0_F51B;
const VALIDATION_SAMPLES: usize = 1000;

/// Checks the standing assumptions on the tensor grid over `Ξ` with
/// `grid_per_dim` nodes per axis and on a seeded random sample of `X × Ξ`.
///
/// Returns an empty list iff everything passes. Non-finite callable output
/// is reported as a violation.
pub fn validate(problem: &SipProblem, grid_per_dim: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |assumption, detail: String| out.push(Violation { assumption, detail });

    if problem.slater_point.len() != problem.dim_x() {
        push(
            Assumption::Dimensions,
            format!(
                "slater_point has {} coordinates, x_box has {}",
                problem.slater_point.len(),
                problem.dim_x()
            ),
        );
        return out;
    }
    if !problem.x_box.contains(&problem.slater_point) {
        push(Assumption::SlaterPoint, "slater_point lies outside x_box".into());
    }
    if !problem.xi_box.is_full_dimensional() {
        push(
            Assumption::FullDimensionalIndexSet,
            format!("xi_box has zero volume ({:?} .. {:?})", problem.xi_box.lower(), problem.xi_box.upper()),
        );
    }

    let c = &problem.constants;
    for (name, v) in [
        ("lipschitz_f", c.lipschitz_f),
        ("lipschitz_g_x", c.lipschitz_g_x),
        ("lipschitz_g_xi", c.lipschitz_g_xi),
        ("g_max", c.g_max),
    ] {
        if !(v.is_finite() && v > 0.0) {
            push(Assumption::PositiveConstants, format!("{name} = {v} must be finite and > 0"));
        }
    }
    if let Some(v) = c.slater_lipschitz_xi {
        if !(v.is_finite() && v >= 0.0) {
            push(Assumption::PositiveConstants, format!("slater_lipschitz_xi = {v} must be finite and >= 0"));
        }
    }
    if !problem.dual_lb.is_finite() {
        push(Assumption::FiniteValues, format!("dual_lb = {}", problem.dual_lb));
    }

    if grid_per_dim >= 2 {
        let mut worst: Option<(f64, Vec<f64>)> = None;
        let mut non_finite = 0usize;
        for xi in problem.xi_box.tensor_grid(grid_per_dim) {
            let v = problem.g(&problem.slater_point, &xi);
            if !v.is_finite() {
                non_finite += 1;
                continue;
            }
            if worst.as_ref().map_or(true, |(w, _)| v > *w) {
                worst = Some((v, xi));
            }
        }
        if non_finite > 0 {
            push(
                Assumption::FiniteValues,
                format!("g(slater_point, xi) is non-finite at {non_finite} grid nodes"),
            );
        }
        if let Some((v, xi)) = worst {
            if v >= 0.0 {
                push(
                    Assumption::SlaterPoint,
                    format!("g(slater_point, {xi:?}) = {v} is not strictly negative"),
                );
            }
        }
    } else {
        push(Assumption::Dimensions, format!("grid_per_dim = {grid_per_dim} must be >= 2"));
    }

    let f_tilde = problem.f(&problem.slater_point);
    if !f_tilde.is_finite() {
        push(Assumption::FiniteValues, format!("f(slater_point) = {f_tilde}"));
    } else if f_tilde < problem.dual_lb {
        push(
            Assumption::WeakDuality,
            format!("f(slater_point) = {f_tilde} is below dual_lb = {}", problem.dual_lb),
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let mut worst_excess = 0.0f64;
    let mut bad_g = 0usize;
    let mut bad_f = 0usize;
    let mut gx = vec![0.0; problem.dim_x()];
    for _ in 0..VALIDATION_SAMPLES {
        let x = problem.x_box.sample(&mut rng);
        let xi = problem.xi_box.sample(&mut rng);
        let v = problem.g(&x, &xi);
        problem.functions.constraint_grad_x(&x, &xi, &mut gx);
        if !v.is_finite() || gx.iter().any(|d| !d.is_finite()) {
            bad_g += 1;
            continue;
        }
        worst_excess = worst_excess.max(v.abs() - c.g_max);
        let fv = problem.f(&x);
        problem.functions.objective_grad(&x, &mut gx);
        if !fv.is_finite() || gx.iter().any(|d| !d.is_finite()) {
            bad_f += 1;
        }
    }
    if bad_g > 0 {
        push(Assumption::FiniteValues, format!("g or grad_x g non-finite at {bad_g} sampled pairs"));
    }
    if bad_f > 0 {
        push(Assumption::FiniteValues, format!("f or grad f non-finite at {bad_f} sampled points"));
    }
    if worst_excess > 0.0 {
        push(
            Assumption::ConstraintBound,
            format!("sampled |g| exceeds g_max = {} by {worst_excess}", c.g_max),
        );
    }
    out
}

/// Built-in problem instances.
pub mod catalog {
    use std::f64::consts::PI;
    use std::sync::{Arc, OnceLock};

    use serde::{Deserialize, Serialize};

    use super::{BoxSet, ProblemConstants, SipFunctions, SipProblem};
    use crate::error::{Result, SipError};
    use crate::numeric::linspace;

    /// Constraint coefficient of the test problem, `5 sin(π√t) / (1 + t²)`.
    pub fn coefficient(t: f64) -> f64 {
        5.0 * (PI * t.sqrt()).sin() / (1.0 + t * t)
    }

    /// Derivative of [`coefficient`]; unbounded as `t → 0`.
    pub fn coefficient_derivative(t: f64) -> f64 {
        let s = t.sqrt();
        let q = 1.0 + t * t;
        5.0 * ((PI * s).cos() * PI / (2.0 * s) * q - (PI * s).sin() * 2.0 * t) / (q * q)
    }

    /// Nodes used for the grid maximum of the coefficient.
    pub const COEFFICIENT_GRID: usize = 1_000_000;
    /// The ξ-Lipschitz bound is taken on `[T_MIN, 1]`, away from the singular
    /// derivative at 0, with `L_G_XI_NODES` nodes and a relative margin.
    pub const L_G_XI_T_MIN: f64 = 1e-3;
    pub const L_G_XI_NODES: usize = 10_000;
    pub const L_G_XI_MARGIN: f64 = 1.1;

    #[derive(Debug, Clone, Copy)]
    struct TestConstants {
        c_star: f64,
        l_g_xi: f64,
    }

    fn test_constants() -> TestConstants {
        static CELL: OnceLock<TestConstants> = OnceLock::new();
        *CELL.get_or_init(|| {
            let c_star = linspace(0.0, 1.0, COEFFICIENT_GRID)
                .map(coefficient)
                .fold(f64::NEG_INFINITY, f64::max);
            let l_g_xi = linspace(L_G_XI_T_MIN, 1.0, L_G_XI_NODES)
                .map(|t| coefficient_derivative(t).abs())
                .fold(0.0, f64::max)
                * L_G_XI_MARGIN;
            TestConstants { c_star, l_g_xi }
        })
    }

    /// Grid maximum of [`coefficient`] on `[0, 1]`; the supremum of the
    /// constraint over `X × Ξ`, attained at `x = (±1, 0)`.
    pub fn coefficient_max() -> f64 {
        test_constants().c_star
    }

    #[derive(Debug)]
    struct TestProblemFns;

    impl SipFunctions for TestProblemFns {
        fn objective(&self, x: &[f64]) -> f64 {
            (x[0] - 2.0).powi(2) + (x[1] - 0.2).powi(2)
        }
        fn objective_grad(&self, x: &[f64], grad: &mut [f64]) {
            grad[0] = 2.0 * (x[0] - 2.0);
            grad[1] = 2.0 * (x[1] - 0.2);
        }
        fn constraint(&self, x: &[f64], xi: &[f64]) -> f64 {
            coefficient(xi[0]) * x[0] * x[0] - x[1]
        }
        fn constraint_grad_x(&self, x: &[f64], xi: &[f64], grad: &mut [f64]) {
            grad[0] = 2.0 * coefficient(xi[0]) * x[0];
            grad[1] = -1.0;
        }
        fn constraint_with_grad_x(&self, x: &[f64], xi: &[f64], grad: &mut [f64]) -> f64 {
            let c = coefficient(xi[0]);
            grad[0] = 2.0 * c * x[0];
            grad[1] = -1.0;
            c * x[0] * x[0] - x[1]
        }
    }

    /// Known optimum of [`test_problem`].
    pub const TEST_PROBLEM_OPTIMUM: [f64; 2] = [0.20523677, 0.2];
    /// Reported optimal value of [`test_problem`].
    pub const TEST_PROBLEM_OPTIMAL_VALUE: f64 = 3.221;

    /// `min (x₁−2)² + (x₂−0.2)²` s.t. `5 sin(π√t)/(1+t²)·x₁² − x₂ ≤ 0` for
    /// all `t ∈ [0,1]`, `x ∈ [−1,1]×[0,0.2]`.
    ///
    /// Constants:
    /// * `L_f = 2·max‖x − (2, 0.2)‖` over `X`, attained at `(−1, 0)`.
    /// * `L_{g,X} = ‖(2c*, 1)‖` with `c*` the coefficient maximum.
    /// * `G_max = c*` (the constraint ranges over `[−0.2, c*]`).
    /// * `L_{g,Ξ}`: the derivative of `sin(π√t)` blows up at `t = 0`, so no
    ///   finite constant exists. We take the grid maximum of `|c'(t)|` on
    ///   `[10⁻³, 1]` with a 10% margin. This is an approximation.
    /// * At `x̃ = (0, 0.2)` the constraint does not depend on `t`, so the
    ///   Slater-point Lipschitz constant is 0.
    pub fn test_problem() -> SipProblem {
        let tc = test_constants();
        let x_box = BoxSet::new(vec![-1.0, 0.0], vec![1.0, 0.2]).expect("static box");
        let lipschitz_f = 2.0 * (3.0f64.powi(2) + 0.2f64.powi(2)).sqrt();
        SipProblem {
            name: "test_problem".into(),
            x_box,
            xi_box: BoxSet::unit(1),
            functions: Arc::new(TestProblemFns),
            constants: ProblemConstants {
                lipschitz_f,
                lipschitz_g_x: (4.0 * tc.c_star * tc.c_star + 1.0).sqrt(),
                lipschitz_g_xi: tc.l_g_xi,
                g_max: tc.c_star,
                slater_lipschitz_xi: Some(0.0),
            },
            slater_point: vec![0.0, 0.2],
            dual_lb: 0.0,
        }
    }

    /// Floor applied to analytic Lipschitz bounds that come out as zero; any
    /// positive number bounds a constant function.
    pub const LIPSCHITZ_FLOOR: f64 = 1e-6;

    /// `min ‖x − center‖²` s.t. `⟨a, x⟩ + ⟨b, ξ⟩ + offset ≤ 0` for all `ξ ∈ Ξ`.
    ///
    /// With `a = b = 0` and `offset < 0` the constraint is inactive and the
    /// optimum is the projection of `center` onto `X`.
    #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
    pub struct QuadraticAffine {
        pub x_box: BoxSet,
        pub xi_box: BoxSet,
        pub center: Vec<f64>,
        pub a: Vec<f64>,
        pub b: Vec<f64>,
        pub offset: f64,
        /// Defaults to the center of `x_box`.
        #[serde(default)]
        pub slater_point: Option<Vec<f64>>,
        #[serde(default)]
        pub dual_lb: f64,
    }

    #[derive(Debug)]
    struct QuadraticAffineFns {
        center: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        offset: f64,
    }

    impl SipFunctions for QuadraticAffineFns {
        fn objective(&self, x: &[f64]) -> f64 {
            x.iter().zip(&self.center).map(|(v, c)| (v - c) * (v - c)).sum()
        }
        fn objective_grad(&self, x: &[f64], grad: &mut [f64]) {
            for ((g, v), c) in grad.iter_mut().zip(x).zip(&self.center) {
                *g = 2.0 * (v - c);
            }
        }
        fn constraint(&self, x: &[f64], xi: &[f64]) -> f64 {
            let ax: f64 = self.a.iter().zip(x).map(|(a, v)| a * v).sum();
            let bxi: f64 = self.b.iter().zip(xi).map(|(b, v)| b * v).sum();
            ax + bxi + self.offset
        }
        fn constraint_grad_x(&self, _x: &[f64], _xi: &[f64], grad: &mut [f64]) {
            grad.copy_from_slice(&self.a);
        }
    }

    fn affine_range(coef: &[f64], bx: &BoxSet) -> (f64, f64) {
        coef.iter()
            .zip(bx.lower().iter().zip(bx.upper()))
            .fold((0.0, 0.0), |(lo, hi), (c, (l, u))| {
                (lo + (c * l).min(c * u), hi + (c * l).max(c * u))
            })
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    impl QuadraticAffine {
        pub fn build(self) -> Result<SipProblem> {
            let m = self.x_box.dim();
            let d = self.xi_box.dim();
            for (name, len, want) in [
                ("center", self.center.len(), m),
                ("a", self.a.len(), m),
                ("b", self.b.len(), d),
            ] {
                if len != want {
                    return Err(SipError::Params(format!(
                        "{name} has {len} entries, expected {want}"
                    )));
                }
            }
            // max ‖x − center‖ over the box: farthest corner, coordinatewise.
            let far: f64 = self
                .center
                .iter()
                .zip(self.x_box.lower().iter().zip(self.x_box.upper()))
                .map(|(c, (l, u))| ((c - l).abs().max((u - c).abs())).powi(2))
                .sum::<f64>()
                .sqrt();
            let (ax_lo, ax_hi) = affine_range(&self.a, &self.x_box);
            let (bx_lo, bx_hi) = affine_range(&self.b, &self.xi_box);
            let g_lo = ax_lo + bx_lo + self.offset;
            let g_hi = ax_hi + bx_hi + self.offset;
            let slater_point = self.slater_point.unwrap_or_else(|| self.x_box.center());
            Ok(SipProblem {
                name: "quadratic_affine".into(),
                constants: ProblemConstants {
                    lipschitz_f: (2.0 * far).max(LIPSCHITZ_FLOOR),
                    lipschitz_g_x: norm(&self.a).max(LIPSCHITZ_FLOOR),
                    lipschitz_g_xi: norm(&self.b).max(LIPSCHITZ_FLOOR),
                    g_max: g_lo.abs().max(g_hi.abs()).max(LIPSCHITZ_FLOOR),
                    slater_lipschitz_xi: None,
                },
                functions: Arc::new(QuadraticAffineFns {
                    center: self.center,
                    a: self.a,
                    b: self.b,
                    offset: self.offset,
                }),
                x_box: self.x_box,
                xi_box: self.xi_box,
                slater_point,
                dual_lb: self.dual_lb,
            })
        }
    }

    /// Inactive-constraint problem: `g ≡ −1` on `Ξ = [0,1]`, `X = [−1,1]²`,
    /// objective `‖x − center‖²`. Its optimum is `center` when interior.
    pub fn slack_quadratic(center: [f64; 2]) -> SipProblem {
        QuadraticAffine {
            x_box: BoxSet::new(vec![-1.0, -1.0], vec![1.0, 1.0]).expect("static box"),
            xi_box: BoxSet::unit(1),
            center: center.to_vec(),
            a: vec![0.0, 0.0],
            b: vec![0.0],
            offset: -1.0,
            slater_point: None,
            dual_lb: 0.0,
        }
        .build()
        .expect("static problem")
    }
}
