//! The symplectic form and small helpers shared by the covariance-matrix
//! consumers.
//!
//! Quadrature convention: `X = (a + a^dag)/sqrt(2)`, `Y = i(a^dag - a)/sqrt(2)`,
//! vacuum variance 1/2, modes ordered as (q, p) pairs.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::Scalar;

/// The symplectic form `Omega` for `n_modes` modes in (q, p)-pair
/// ordering: a block diagonal of `[[0, 1], [-1, 0]]`.
pub fn omega_matrix<T: Scalar>(n_modes: usize) -> DMatrix<T> {
    let n = 2 * n_modes;
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = T::one();
        m[(2 * k + 1, 2 * k)] = -T::one();
    }
    m
}

/// Smallest eigenvalue of the Hermitian matrix `V + (i/2) Omega`.
///
/// Nonnegative (up to numerical tolerance) iff `V` is a physical
/// covariance matrix in the vacuum-variance-1/2 convention.
pub fn physicality_min_eig<T: Scalar>(v: &DMatrix<T>) -> T {
    let n = v.nrows();
    assert_eq!(n % 2, 0, "covariance matrix must have even dimension");
    let omega = omega_matrix::<T>(n / 2);
    let half = T::lit(0.5);
    let h = DMatrix::from_fn(n, n, |i, j| Complex::new(v[(i, j)], half * omega[(i, j)]));
    let eigs = h.symmetric_eigenvalues();
    eigs.iter().copied().reduce(Scalar::minv).expect("non-empty spectrum")
}

/// Moduli of the eigenvalues of `Omega V` for symmetric positive
/// semidefinite `V`, sorted ascending.
///
/// These come in equal pairs, each pair one symplectic eigenvalue; all
/// `2n` moduli are returned so that multiset comparisons stay
/// straightforward. Computed as the singular values of the
/// skew-symmetric matrix `sqrt(V) Omega sqrt(V)`, which is similar to
/// `Omega V` and normal, so its singular values are exactly the sought
/// moduli; this avoids nonsymmetric eigensolves entirely.
pub fn symplectic_eigenvalue_moduli<T: Scalar>(v: &DMatrix<T>) -> Vec<T> {
    let n = v.nrows();
    assert_eq!(n % 2, 0);
    let se = v.clone().symmetric_eigen();
    // symmetric square root, clamping roundoff-negative eigenvalues
    let sqrt_vals = se.eigenvalues.map(|l| l.maxv(T::zero()).sqrt());
    let s = &se.eigenvectors
        * DMatrix::from_diagonal(&sqrt_vals)
        * se.eigenvectors.transpose();
    let k = &s * omega_matrix::<T>(n / 2) * &s;
    let mut mods: Vec<T> = k.svd(false, false).singular_values.iter().copied().collect();
    mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mods
}

/// Frobenius norm of `S^T Omega S - Omega`; zero iff `S` is symplectic.
pub fn symplectic_defect<T: Scalar>(s: &DMatrix<T>) -> T {
    let n = s.nrows();
    assert_eq!(n % 2, 0);
    let omega = omega_matrix::<T>(n / 2);
    (s.transpose() * &omega * s - omega).norm()
}
