//! Inexact primal-dual solver for convex semi-infinite programs.
//!
//! A semi-infinite program minimizes a convex objective `f(x)` over a box
//! `X` subject to the constraint family `g(x, ξ) ≤ 0` for every `ξ` in a
//! compact index box `Ξ`. The Lagrange multiplier of that family is a
//! nonnegative measure on `Ξ`; this crate runs a first-order primal-dual
//! method in which
//!
//! * the primal step is a projected gradient step on `X`, with the
//!   measure-weighted constraint gradient estimated by Monte Carlo,
//! * the dual step is a mirror step over nonnegative measures under the
//!   generalized Kullback-Leibler prox [`measure::b_divergence`], which
//!   has a closed-form multiplicative solution.
//!
//! The modules follow the build order of a run:
//!
//! * [`problem`]: boxes, problem definitions, validation and the catalog.
//! * [`measure`]: `H`, KL and the generalized divergence `B`.
//! * [`constants`]: every derived scalar, in dependency order.
//! * [`solver`]: sampling, dual/primal updates and the main loop.
//! * [`oracle`]: quadrature reference implementations for `d ≤ 2`.
//! * [`checks`]: property suites shared by the CLI `check` command.
//! * [`report`]: CSV/JSON emission of [`solver::SolveReport`].
//!
//! ```
//! use sip_core::{constants::AlgoParams, problem::catalog, solver};
//!
//! let problem = catalog::test_problem();
//! let params = AlgoParams { iterations: 2000, samples: 200, ..AlgoParams::default() };
//! let report = solver::run(&problem, &params, &[1000, 2000]).unwrap();
//! assert_eq!(report.checkpoints.len(), 2);
//! assert!(report.f_bar > 2.0 && report.f_bar < 4.1);
//! ```

pub mod checks;
pub mod constants;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod solver;

mod numeric;

pub use error::{Result, SipError};
