use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sip_core::constants::{derive, AlgoParams};
use sip_core::measure::{b_divergence, b_divergence_decomposed, h_func};
use sip_core::oracle::{
    brute_force_dual_objective, exact_dual_update_grid, import_bound_sides, inner_max, phi_kappa_softmax,
    regularized_maximizer_divergence, shape_objective, DensityGrid,
};
use sip_core::problem::catalog;

#[test]
fn inner_max_dominates_random_feasible_pairs() {
    let p = catalog::test_problem();
    let c = derive(&p, &AlgoParams::default()).unwrap();
    let grid = DensityGrid::trapezoid(&p.xi_box, 513).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kappa in [1.0, 0.1] {
        let x = [0.6, 0.05];
        let best = inner_max(&x, kappa, &c, &grid, &p).unwrap();
        for _ in 0..100 {
            let rho = rng.random_range(0.0..c.rho_bar);
            let phi = grid.with_values((0..grid.len()).map(|_| rng.random_range(0.01..1.0)).collect()).unwrap();
            let m = phi.mass();
            let phi = phi.with_values(phi.values.iter().map(|v| v / m).collect()).unwrap();
            let v = rho * shape_objective(&phi, &x, kappa, &p).unwrap() - kappa * h_func(rho, c.rho0).unwrap();
            assert!(best.value >= v - 1e-8);
        }
    }
}

#[test]
fn divergence_bound_of_regularized_maximizer() {
    let p = catalog::test_problem();
    let c = derive(&p, &AlgoParams::default()).unwrap();
    let grid = DensityGrid::trapezoid(&p.xi_box, 2049).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let x = p.x_box.sample(&mut rng);
        let (b, bound) = regularized_maximizer_divergence(&x, c.kappa_bar, &c, &grid, &p).unwrap();
        assert!(b <= bound, "{b} > {bound}");
        let kappa = rng.random_range(1e-3..1.0);
        let (lhs, rhs) = import_bound_sides(&x, kappa, &c, &grid, &p).unwrap();
        assert!(lhs >= rhs);
    }
}

#[test]
fn quadrature_converges_under_refinement() {
    let p = catalog::test_problem();
    let c = derive(&p, &AlgoParams { iterations: 100, ..AlgoParams::default() }).unwrap();
    let x = [0.8, 0.02];
    let coarse = exact_dual_update_grid(&DensityGrid::uniform(&p.xi_box, 2049, 1.0).unwrap(), &x, &c, &p).unwrap();
    let fine = exact_dual_update_grid(&DensityGrid::uniform(&p.xi_box, 4097, 1.0).unwrap(), &x, &c, &p).unwrap();
    for (i, v) in coarse.values.iter().enumerate() {
        let w = fine.values[2 * i];
        assert!((v - w).abs() <= 1e-3 * w, "node {i}: {v} vs {w}");
    }
}

#[test]
fn capped_update_agrees_under_refinement() {
    let p = catalog::test_problem();
    let params = AlgoParams { iterations: 100, rho0: 21.0, ..AlgoParams::default() };
    let c = derive(&p, &params).unwrap();
    let x = [1.0, 0.0];
    let coarse = exact_dual_update_grid(&DensityGrid::uniform(&p.xi_box, 2049, 21.0).unwrap(), &x, &c, &p).unwrap();
    let fine = exact_dual_update_grid(&DensityGrid::uniform(&p.xi_box, 4097, 21.0).unwrap(), &x, &c, &p).unwrap();
    assert!((coarse.mass() - c.rho_bar).abs() < 1e-9);
    for (i, v) in coarse.values.iter().enumerate() {
        assert!((v - fine.values[2 * i]).abs() <= 1e-3 * fine.values[2 * i]);
    }
}

#[test]
fn prox_term_two_ways() {
    let p = catalog::test_problem();
    let c = derive(&p, &AlgoParams { iterations: 100, ..AlgoParams::default() }).unwrap();
    let grid = DensityGrid::trapezoid(&p.xi_box, 257).unwrap();
    let lam = grid.with_values(grid.nodes.iter().map(|n| 1.0 + n[0]).collect()).unwrap();
    let cand = grid.with_values(grid.nodes.iter().map(|n| 2.0 - n[0]).collect()).unwrap();
    let a = b_divergence(&cand.node_masses().unwrap(), &lam.node_masses().unwrap()).unwrap();
    let b = b_divergence_decomposed(&cand.node_masses().unwrap(), &lam.node_masses().unwrap()).unwrap();
    assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    // The objective is strictly larger than at the closed-form minimizer.
    let x = [0.3, 0.1];
    let best = exact_dual_update_grid(&lam, &x, &c, &p).unwrap();
    let v_best = brute_force_dual_objective(&best, &lam, &x, &c, &p).unwrap();
    assert!(brute_force_dual_objective(&cand, &lam, &x, &c, &p).unwrap() > v_best);
}

#[test]
fn softmax_is_uniform_for_constant_constraint() {
    let p = catalog::slack_quadratic([0.0, 0.0]);
    let grid = DensityGrid::trapezoid(&p.xi_box, 101).unwrap();
    let phi = phi_kappa_softmax(&[0.2, 0.2], 0.05, &grid, &p).unwrap();
    assert!(phi.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}
