//! Steady-state covariance matrix from the Lyapunov equation
//! `A V + V A^T = -D`.
//!
//! The production path is a Bartels-Stewart solve on the complex Schur
//! form of `A`: with `A = Q T Q^H` (`T` upper triangular) the transformed
//! unknown `W = Q^H V Q` satisfies `T W + W T^H = -Q^H D Q`, which falls
//! to column-by-column back substitution. An independent dense
//! Kronecker-vectorization solve lives in the test suite as the oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use thiserror::Error;

use crate::dynamics::{LinearModel, ModeLabel};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum LyapunovError {
    #[error("drift matrix is not Hurwitz stable (spectral abscissa {spectral_abscissa:e})")]
    UnstableSystem { spectral_abscissa: f64 },
    #[error("Lyapunov operator is ill-conditioned (eigenvalue-pair separation {separation:e})")]
    IllConditioned { separation: f64 },
}

/// Steady-state covariance matrix in (q, p)-pair ordering with the mode
/// labels it inherited from the drift matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T> {
    pub v: DMatrix<T>,
    pub ordering: Vec<ModeLabel>,
}

impl<T: Scalar> CovarianceMatrix<T> {
    pub fn n_modes(&self) -> usize {
        self.ordering.len()
    }
}

/// Relative separation below which the Lyapunov operator counts as
/// numerically singular.
const SEPARATION_RTOL: f64 = 1e-13;

fn modulus<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Solves `A V + V A^T = -D` for symmetric `V` given Hurwitz-stable `A`.
pub fn solve_lyapunov_matrices<T: Scalar>(
    a: &DMatrix<T>,
    d: &DMatrix<T>,
) -> Result<DMatrix<T>, LyapunovError> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(d.nrows(), n);
    assert_eq!(d.ncols(), n);

    let ac = a.map(|x| Complex::new(x, T::zero()));
    let (q, t) = nalgebra::linalg::Schur::new(ac).unpack();

    // stability and conditioning from the triangular diagonal
    let mut abscissa = T::lit(f64::NEG_INFINITY);
    for i in 0..n {
        abscissa = abscissa.maxv(t[(i, i)].re);
    }
    if abscissa >= T::zero() {
        return Err(LyapunovError::UnstableSystem {
            spectral_abscissa: abscissa.to_f64().unwrap_or(f64::NAN),
        });
    }
    let scale = (0..n)
        .map(|i| modulus(t[(i, i)]))
        .fold(T::zero(), Scalar::maxv)
        .maxv(T::lit(f64::MIN_POSITIVE));
    let mut sep = T::lit(f64::INFINITY);
    for i in 0..n {
        for j in 0..n {
            sep = sep.minv(modulus(t[(i, i)] + t[(j, j)].conj()));
        }
    }
    if sep < T::lit(SEPARATION_RTOL) * scale {
        return Err(LyapunovError::IllConditioned {
            separation: (sep / scale).to_f64().unwrap_or(f64::NAN),
        });
    }

    // C = Q^H D Q, solve T W + W T^H = -C column by column (right to left)
    let dc = d.map(|x| Complex::new(x, T::zero()));
    let c = q.adjoint() * dc * &q;
    let mut w = DMatrix::<Complex<T>>::zeros(n, n);
    for k in (0..n).rev() {
        // rhs_k = -c_k - sum_{j>k} conj(T[k,j]) w_j
        let mut rhs: DVector<Complex<T>> = -c.column(k).into_owned();
        for j in (k + 1)..n {
            let coeff = t[(k, j)].conj();
            for i in 0..n {
                rhs[i] -= coeff * w[(i, j)];
            }
        }
        // (T + conj(T[k,k]) I) w_k = rhs_k, upper-triangular back solve
        let shift = t[(k, k)].conj();
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for j in (i + 1)..n {
                acc -= t[(i, j)] * w[(j, k)];
            }
            w[(i, k)] = acc / (t[(i, i)] + shift);
        }
    }

    let vc = &q * w * q.adjoint();
    // V is real and symmetric up to roundoff; enforce both
    let mut v = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] = T::lit(0.5) * (vc[(i, j)].re + vc[(j, i)].re);
        }
    }
    Ok(v)
}

/// Covariance matrix of a linear model, labels carried through.
pub fn solve_lyapunov<T: Scalar>(
    model: &LinearModel<T>,
) -> Result<CovarianceMatrix<T>, LyapunovError> {
    let v = solve_lyapunov_matrices(&model.a, &model.d)?;
    Ok(CovarianceMatrix {
        v,
        ordering: model.ordering.clone(),
    })
}

/// Relative back-substitution residual `||A V + V A^T + D||_F / ||D||_F`.
pub fn lyapunov_residual<T: Scalar>(
    a: &DMatrix<T>,
    d: &DMatrix<T>,
    v: &DMatrix<T>,
) -> T {
    let r = a * v + v * a.transpose() + d;
    let denom = d.norm().maxv(T::lit(f64::MIN_POSITIVE));
    r.norm() / denom
}
