//! Shared helpers for the integration suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent dense Lyapunov oracle: vectorizes `A V + V A^T = -D` via
/// Kronecker products and solves the n^2 x n^2 linear system with LU.
pub fn kronecker_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let big = a.kronecker(&id) + id.kronecker(a);
    let rhs = DMatrix::from_iterator(n * n, 1, d.iter().copied());
    let sol = big.lu().solve(&(-rhs)).expect("Lyapunov operator is nonsingular");
    DMatrix::from_iterator(n, n, sol.iter().copied())
}

/// Deterministic random Hurwitz-stable drift matrix and PSD diffusion.
pub fn random_stable_system(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let abscissa = m
        .complex_eigenvalues()
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    // shift the spectrum left of the imaginary axis with a firm margin
    let a = m - DMatrix::identity(n, n) * (abscissa + 0.5);
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let d = &b * b.transpose() + DMatrix::identity(n, n) * 0.1;
    (a, d)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
