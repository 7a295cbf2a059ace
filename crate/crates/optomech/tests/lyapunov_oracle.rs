//! Dual-route validation of the Lyapunov solver: the Bartels-Stewart
//! production path against an independent Kronecker-vectorization dense
//! solve.

mod common;

use common::{kronecker_lyapunov, random_stable_system, seeded_rng};
use optomech::lyapunov::{lyapunov_residual, solve_lyapunov_matrices};

#[test]
fn matches_kronecker_oracle_on_100_random_stable_systems() {
    let mut rng = seeded_rng(0x4c59_4150);
    let dims = [6usize, 10, 12];
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = dims[trial % dims.len()];
        let (a, d) = random_stable_system(&mut rng, n);
        let v = solve_lyapunov_matrices(&a, &d).expect("random system is stable");
        let oracle = kronecker_lyapunov(&a, &d);
        let rel = (&v - &oracle).norm() / oracle.norm();
        worst = worst.max(rel);
        assert!(
            rel <= 1e-9,
            "trial {trial} (dim {n}): solver vs oracle relative Frobenius error {rel:e}"
        );
        assert!(
            lyapunov_residual(&a, &d, &v) <= 1e-10,
            "trial {trial}: back-substitution residual too large"
        );
    }
    println!("worst solver-vs-oracle relative error over 100 trials: {worst:e}");
}

#[test]
fn oracle_and_solver_agree_on_symmetric_output() {
    let mut rng = seeded_rng(7);
    let (a, d) = random_stable_system(&mut rng, 10);
    let v = solve_lyapunov_matrices(&a, &d).unwrap();
    let asym = (&v - v.transpose()).norm() / v.norm();
    assert!(asym < 1e-14, "solution not symmetric: {asym:e}");
}
