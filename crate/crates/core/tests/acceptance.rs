//! Acceptance suite. Runs as a plain binary (`harness = false`) so that every
//! criterion prints exactly one PASS/FAIL line, then exits non-zero if any
//! criterion failed.
//!
//! Run alone with `cargo test -p sip-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sip_core::checks::{self, SuiteSize};
use sip_core::constants::{
    compute_h_max, compute_step_and_mu, derive, eta_bisect, iterate_r, r_map, AlgoParams, DerivedConstants,
};
use sip_core::measure::h_func;
use sip_core::oracle::{
    brute_force_dual_objective, exact_dual_update_grid, phi_kappa_softmax, regularization_gap_check,
    shape_objective, DensityGrid, DEFAULT_NODES_1D,
};
use sip_core::problem::{catalog, SipProblem};
use sip_core::report;
use sip_core::solver::{self, sample_index_points, SampledMeasure};

const TABLE_CHECKPOINTS: [usize; 10] = [500, 1000, 3000, 5000, 10_000, 20_000, 30_000, 40_000, 50_000, 60_000];

struct Verdict {
    passed: bool,
    summary: String,
}

fn verdict(passed: bool, summary: impl Into<String>) -> Verdict {
    Verdict { passed, summary: summary.into() }
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

fn benchmark_run() -> solver::SolveReport {
    let params = AlgoParams { iterations: 60_000, samples: 1000, epsilon: 1e-3, ..AlgoParams::default() };
    solver::run(&catalog::test_problem(), &params, &TABLE_CHECKPOINTS).expect("table run")
}

fn criterion_1(r: &solver::SolveReport) -> Verdict {
    let csv = report::to_csv_string(r);
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let f: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let viol: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    for row in &rows {
        println!("    K={:>6} f(xbar)={:.4} violation={:.4} f(xlast)={:.4}", row[0], row[1], row[2], row[3]);
    }
    let f_end = *f.last().unwrap();
    let v_end = *viol.last().unwrap();
    let ok = rows.len() == 10
        && nondecreasing(&f)
        && (3.15..=3.23).contains(&f_end)
        && nonincreasing(&viol)
        && v_end <= 0.05;
    verdict(
        ok,
        format!(
            "f(xbar) nondecreasing={}, f(xbar_60000)={f_end:.4} in [3.15, 3.23], violation nonincreasing={}, violation(xbar_60000)={v_end:.4} <= 0.05",
            nondecreasing(&f),
            nonincreasing(&viol)
        ),
    )
}

fn criterion_2(r: &solver::SolveReport) -> Verdict {
    let cp = r.checkpoints.iter().find(|c| c.k == 10_000).expect("checkpoint 10000");
    let dist = (cp.f_xlast - catalog::TEST_PROBLEM_OPTIMAL_VALUE).abs();
    verdict(dist <= 0.05, format!("|f(x_10000) - 3.221| = {dist:.4} <= 0.05 (f = {:.4})", cp.f_xlast))
}

fn criterion_3() -> Verdict {
    let out = checks::divergence_suite(&SuiteSize::full(), 2024);
    for o in &out {
        println!("    {o}");
    }
    let failed: Vec<&str> = out.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    verdict(
        failed.is_empty(),
        format!("{} divergence properties on 1000 pairs, n <= 64; failed: {failed:?}", out.len()),
    )
}

fn test_constants(k: usize) -> (SipProblem, DerivedConstants, DensityGrid) {
    let p = catalog::test_problem();
    let c = derive(&p, &AlgoParams { iterations: k, ..AlgoParams::default() }).unwrap();
    let grid = DensityGrid::trapezoid(&p.xi_box, DEFAULT_NODES_1D).unwrap();
    (p, c, grid)
}

/// Random smooth positive density with mass in `(0, ρ̄]`.
fn random_state(grid: &DensityGrid, rho_bar: f64, rng: &mut impl Rng) -> DensityGrid {
    let (a, b, ph) = (rng.random_range(0.0..2.0), rng.random_range(0.5..8.0), rng.random_range(0.0..6.3));
    let raw: Vec<f64> = grid.nodes.iter().map(|p| (a * (b * p[0] + ph).sin()).exp()).collect();
    let g = grid.with_values(raw).unwrap();
    let s = rng.random_range(0.05..1.0) * rho_bar / g.mass();
    g.with_values(g.values.iter().map(|v| v * s).collect()).unwrap()
}

fn lognormal_bump(base: &DensityGrid, sigma: f64, cap: f64, rng: &mut impl Rng) -> DensityGrid {
    let vals = base
        .values
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(rng);
            v * (sigma * z).exp()
        })
        .collect();
    let p = base.with_values(vals).unwrap();
    let m = p.mass();
    let s = if m > cap { cap / m } else { 1.0 };
    p.with_values(p.values.iter().map(|v| v * s).collect()).unwrap()
}

fn criterion_4() -> Verdict {
    // A short horizon gives a large step, so the linear term matters.
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for k in [100usize, 60_000] {
        let (p, c, grid) = test_constants(k);
        let mut rng = ChaCha8Rng::seed_from_u64(4 + k as u64);
        for _ in 0..10 {
            let x = p.x_box.sample(&mut rng);
            let lam = random_state(&grid, c.rho_bar, &mut rng);
            let best = exact_dual_update_grid(&lam, &x, &c, &p).unwrap();
            let v_best = brute_force_dual_objective(&best, &lam, &x, &c, &p).unwrap();
            for i in 0..200 {
                let sigma = [1e-3, 1e-2, 0.1, 0.5, 2.0][i % 5];
                let cand = lognormal_bump(&best, sigma, c.rho_bar, &mut rng);
                let v = brute_force_dual_objective(&cand, &lam, &x, &c, &p).unwrap();
                worst = worst.min(v - v_best);
                count += 1;
            }
        }
    }
    verdict(worst >= -1e-8, format!("min objective(perturbed) - objective(closed form) = {worst:.3e} >= -1e-8 over {count} draws"))
}

fn criterion_5() -> Verdict {
    let (p, _, grid) = test_constants(100);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut dominance = f64::INFINITY;
    let mut identity: f64 = 0.0;
    let vol = grid.volume();
    for _ in 0..10 {
        let x = p.x_box.sample(&mut rng);
        for kappa in [1.0, 0.1, 0.01] {
            let phi = phi_kappa_softmax(&x, kappa, &grid, &p).unwrap();
            let best = shape_objective(&phi, &x, kappa, &p).unwrap();
            // Closed form from an independent partition sum.
            let g: Vec<f64> = grid.nodes.iter().map(|xi| p.g(&x, xi)).collect();
            let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = grid.quad_weights.iter().zip(&g).map(|(w, g)| w * ((g - gmax) / kappa).exp()).sum();
            let closed = gmax + kappa * z.ln() - kappa * vol.ln();
            identity = identity.max((best - closed).abs());
            for i in 0..10_000 {
                let cand = if i % 2 == 0 {
                    lognormal_bump(&phi, [1e-3, 1e-2, 0.1, 0.5, 2.0][(i / 2) % 5], f64::INFINITY, &mut rng)
                } else {
                    grid.with_values((0..grid.len()).map(|_| rng.random_range(1e-3..1.0)).collect()).unwrap()
                };
                let m = cand.mass();
                let cand = cand.with_values(cand.values.iter().map(|v| v / m).collect()).unwrap();
                dominance = dominance.min(best - shape_objective(&cand, &x, kappa, &p).unwrap());
            }
        }
    }
    verdict(
        dominance >= -1e-8 && identity <= 1e-8,
        format!("dominance margin {dominance:.3e} >= -1e-8; value identity error {identity:.3e} <= 1e-8 (10 x, 3 kappa, 1e4 candidates each)"),
    )
}

fn criterion_6() -> Verdict {
    let p = catalog::test_problem();
    let grid = DensityGrid::trapezoid(&p.xi_box, DEFAULT_NODES_1D).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lo = f64::INFINITY;
    let mut hi_slack = f64::INFINITY;
    for eps in [0.01, 0.1] {
        let c = derive(&p, &AlgoParams { epsilon: eps, ..AlgoParams::default() }).unwrap();
        for _ in 0..50 {
            let x = p.x_box.sample(&mut rng);
            let (gap, _) = regularization_gap_check(&x, eps, &c, &grid, &p).unwrap();
            lo = lo.min(gap);
            hi_slack = hi_slack.min(eps - gap);
        }
    }
    verdict(
        lo >= -1e-9 && hi_slack >= 0.0,
        format!("min gap {lo:.3e} >= -1e-9, min (eps - gap) {hi_slack:.3e} >= 0 at 50 x per eps in {{0.01, 0.1}}"),
    )
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // H_max against a 10^4-point grid on [0, ρ̄].
    let mut hmax_err: f64 = 0.0;
    for _ in 0..20 {
        let rho0 = rng.random_range(0.1..5.0);
        let rho_bar = rho0 * rng.random_range(1.0..50.0);
        let grid = (0..10_000)
            .map(|i| rho_bar * i as f64 / 9_999.0)
            .map(|r| h_func(r, rho0).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        hmax_err = hmax_err.max((compute_h_max(rho_bar, rho0).unwrap() - grid).abs());
    }
    let mut mu_err: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.random_range(1..1_000_000usize);
        let (c, dx, rb) = (rng.random_range(0.1..1e4), rng.random_range(0.01..10.0), rng.random_range(0.1..100.0));
        let (g, lf, lg) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
        let (gamma, mu) = compute_step_and_mu(k, c, dx, rb, g, lf, lg);
        let want = 2.0 * (c + dx) / (k as f64).sqrt();
        mu_err = mu_err.max((mu * gamma - want).abs() / want);
    }
    let mut eta_ok = true;
    for _ in 0..20 {
        let eps = 10f64.powf(rng.random_range(-4.0..-0.5));
        let k = rng.random_range(2..5000usize);
        let l = rng.random_range(0.5..0.9999);
        let eta = eta_bisect(eps, k, l).unwrap();
        eta_ok &= iterate_r(eta, l, k - 1) <= eps && iterate_r(eta * (1.0 + 1e-6), l, k - 1) > eps && eta < eps;
    }
    let mut r_ok = true;
    for _ in 0..100 {
        let (l, beta, r) = (rng.random_range(0.5..0.9999), rng.random_range(1e-6..0.99), rng.random_range(1e-6..0.99));
        r_ok &= r_map(r, beta, l) > r;
    }
    verdict(
        hmax_err <= 1e-6 && mu_err <= 1e-12 && eta_ok && r_ok,
        format!("H_max grid error {hmax_err:.2e} <= 1e-6; mu*gamma rel. error {mu_err:.2e} <= 1e-12; eta post-condition {eta_ok} (20 triples); R(r) > r {r_ok} (100 triples)"),
    )
}

fn criterion_8() -> Verdict {
    let p = catalog::test_problem();
    let grid_n = DEFAULT_NODES_1D;
    let n = 100_000;
    let mut worst: f64 = 0.0;
    let mut cases = Vec::new();
    // Second case puts ρ₀ at the mass cap, so the Monte Carlo normalizer
    // enters the comparison.
    for (k, x, rho0) in [(100usize, [0.5, 0.1], 1.0), (60_000, [0.5, 0.1], 1.0), (100, [0.9, 0.0], 21.0)] {
        let params = AlgoParams { iterations: k, samples: n, rho0, ..AlgoParams::default() };
        let c = derive(&p, &params).unwrap();
        let m0 = SampledMeasure::reference(sample_index_points(n, &p.xi_box, 8));
        let m1 = solver::dual_update(&m0, &x, &p, &c, 0).unwrap();
        let lam0 = DensityGrid::uniform(&p.xi_box, grid_n, c.rho0).unwrap();
        let exact = exact_dual_update_grid(&lam0, &x, &c, &p).unwrap();
        let mut case_worst: f64 = 0.0;
        for (xi, lw) in m1.points.iter().zip(&m1.log_weights) {
            let mc = c.m_u * lw.exp();
            let or = exact.interpolate(xi);
            case_worst = case_worst.max((mc - or).abs() / or);
        }
        worst = worst.max(case_worst);
        cases.push(format!("K={k} rho0={rho0} cap={}: {case_worst:.2e}", m1.mass_cap_active));
    }
    verdict(worst <= 0.01, format!("max pointwise relative error {worst:.3e} <= 1e-2 ({})", cases.join("; ")))
}

fn criterion_9() -> Verdict {
    let center = [0.3, -0.2];
    let p = catalog::slack_quadratic(center);
    let mut gaps = Vec::new();
    for k in [100usize, 1000, 10_000] {
        let mut total = 0.0;
        for seed in 1..=5 {
            let params = AlgoParams { iterations: k, samples: 100, seed, ..AlgoParams::default() };
            let r = solver::run(&p, &params, &[]).unwrap();
            total += r.f_bar; // optimum value is 0
        }
        gaps.push(total / 5.0);
    }
    let ratios = [gaps[1] / gaps[0], gaps[2] / gaps[1]];
    let ok = gaps[0] > gaps[1] && gaps[1] > gaps[2] && ratios.iter().all(|r| *r <= 0.6);
    verdict(
        ok,
        format!(
            "gaps at K=1e2,1e3,1e4: {:.3e}, {:.3e}, {:.3e}; decade ratios {:.3}, {:.3} <= 0.6",
            gaps[0], gaps[1], gaps[2], ratios[0], ratios[1]
        ),
    )
}

fn criterion_10() -> Verdict {
    let p = catalog::test_problem();
    let params = AlgoParams { iterations: 5000, samples: 500, seed: 99, ..AlgoParams::default() };
    let cps = [500, 1000, 5000];
    let a = report::to_csv_string(&solver::run(&p, &params, &cps).unwrap());
    let b = report::to_csv_string(&solver::run(&p, &params, &cps).unwrap());
    let other = report::to_csv_string(&solver::run(&p, &AlgoParams { seed: 100, ..params.clone() }, &cps).unwrap());
    verdict(a == b && a != other, format!("identical CSV for equal seeds: {}; differs for another seed: {}", a == b, a != other))
}

fn main() -> ExitCode {
    let start = Instant::now();
    println!("acceptance suite");
    let table = benchmark_run();
    let results: Vec<(usize, &str, Verdict)> = vec![
        (1, "benchmark trend", criterion_1(&table)),
        (2, "last-iterate value", criterion_2(&table)),
        (3, "divergence properties", criterion_3()),
        (4, "closed-form dual update optimality", criterion_4()),
        (5, "softmax inner maximizer", criterion_5()),
        (6, "regularization gap", criterion_6()),
        (7, "constants cross-checks", criterion_7()),
        (8, "Monte Carlo vs quadrature dual update", criterion_8()),
        (9, "O(1/sqrt K) decay", criterion_9()),
        (10, "determinism", criterion_10()),
    ];
    let mut failed = 0;
    for (i, name, v) in &results {
        println!("{} criterion {i} ({name}): {}", if v.passed { "PASS" } else { "FAIL" }, v.summary);
        failed += usize::from(!v.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
