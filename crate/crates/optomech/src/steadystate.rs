//! Classical steady-state working point (q_s, alpha_j).
//!
//! The stationarity conditions of the classical Langevin equations are
//! solved with a nested scheme: at fixed mirror displacement `q` the
//! optical amplitudes satisfy a linear 2x2 system per coupled mode pair,
//! and `q` itself is updated from the mechanical stationarity equation
//! `q = g0 sum |alpha_pair|^2 / omega_m`. A power homotopy (ramping the
//! drive from a small fraction to full strength) keeps the iteration on
//! the branch continuously connected to the undriven solution, which is
//! the branch reported as physical.

use num_complex::Complex;
use thiserror::Error;

use crate::model::{DerivedConstants, Scheme};
use crate::Scalar;

/// Relative residual tolerance, measured against the drive strength.
pub const RESIDUAL_RTOL: f64 = 1e-8;
/// Relative convergence tolerance on successive `q` iterates.
pub const Q_RTOL: f64 = 1e-12;
/// Total iteration budget across the homotopy.
pub const MAX_ITERATIONS: usize = 10_000;
/// Number of intermediate drive strengths in the power homotopy.
pub const HOMOTOPY_STEPS: usize = 10;

#[derive(Debug, Error)]
pub enum SteadyStateError {
    #[error("steady-state iteration did not converge (last residual {last_residual:e})")]
    NoConvergence { last_residual: f64 },
    #[error("steady-state iteration entered a period-2 cycle between q = {q_a:e} and q = {q_b:e}")]
    Oscillation { q_a: f64, q_b: f64 },
    #[error("scheme {0:?} is not handled by this solver")]
    UnsupportedScheme(Scheme),
}

/// Classical working point about which the dynamics is linearized.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SteadyState<T> {
    /// Dimensionless mirror displacement, one per mechanical mode.
    pub q_s: Vec<T>,
    /// Complex steady amplitude of each cavity mode.
    pub alpha: Vec<Complex<T>>,
    /// Max norm of the stationary Langevin right-hand side at the solution.
    pub residual: T,
}

impl<T: Scalar> SteadyState<T> {
    /// Sum of amplitudes over the optical pair coupled to mechanical
    /// mode `mech`: modes (2g, 2g+1) within this cavity.
    pub fn pair_sum(&self, group: usize) -> Complex<T> {
        self.alpha[2 * group] + self.alpha[2 * group + 1]
    }
}

fn cplx<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

fn norm_sqr<T: Scalar>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Solves the 2x2 linear system for one coupled optical pair at fixed q:
///   (i(Delta_j - g0 q) + kappa_j) alpha_j - i g0 q alpha_partner = eta_j
fn solve_pair<T: Scalar>(
    dc: &DerivedConstants<T>,
    lo: usize,
    q: T,
    drive_scale: T,
) -> [Complex<T>; 2] {
    let g0q = dc.g0 * q;
    let zero = T::zero();
    let a11 = cplx(dc.kappa[lo], dc.delta[lo] - g0q);
    let a22 = cplx(dc.kappa[lo + 1], dc.delta[lo + 1] - g0q);
    let off = cplx(zero, -g0q);
    let b1 = cplx(dc.eta[lo] * drive_scale, zero);
    let b2 = cplx(dc.eta[lo + 1] * drive_scale, zero);
    let det = a11 * a22 - off * off;
    [(b1 * a22 - off * b2) / det, (a11 * b2 - off * b1) / det]
}

/// One mechanical group: all optical pairs that push on the same mirror.
/// Single cavity has one pair; dual polarization has two.
fn solve_groups<T: Scalar>(
    dc: &DerivedConstants<T>,
    n_pairs: usize,
) -> Result<(T, Vec<Complex<T>>), SteadyStateError> {
    let mut q = T::zero();
    let mut alpha = vec![Complex::new(T::zero(), T::zero()); 2 * n_pairs];
    let mut iterations = 0usize;
    let budget = MAX_ITERATIONS;

    for step in 1..=HOMOTOPY_STEPS {
        let scale = T::lit(step as f64 / HOMOTOPY_STEPS as f64);
        let mut prev = q;
        let mut prev2 = q;
        loop {
            if iterations >= budget {
                let res = residual_norm(dc, n_pairs, q, &alpha, scale);
                // distinguish a period-2 cycle from plain stagnation
                let swing = (q - prev).abs();
                let cycle = (q - prev2).abs();
                if swing > T::lit(Q_RTOL) * (T::one() + q.abs())
                    && cycle < T::lit(1e-3) * swing
                {
                    return Err(SteadyStateError::Oscillation {
                        q_a: q.to_f64().unwrap_or(f64::NAN),
                        q_b: prev.to_f64().unwrap_or(f64::NAN),
                    });
                }
                return Err(SteadyStateError::NoConvergence {
                    last_residual: res.to_f64().unwrap_or(f64::NAN),
                });
            }
            iterations += 1;

            for g in 0..n_pairs {
                let pair = solve_pair(dc, 2 * g, q, scale);
                alpha[2 * g] = pair[0];
                alpha[2 * g + 1] = pair[1];
            }
            let mut sum = T::zero();
            for g in 0..n_pairs {
                sum += norm_sqr(alpha[2 * g] + alpha[2 * g + 1]);
            }
            let q_new = dc.g0 * sum / dc.omega_m;

            let delta = q_new - q;
            let converged = delta.abs() <= T::lit(Q_RTOL) * T::one().maxv(q_new.abs());
            prev2 = prev;
            prev = q;
            // damp the update when the iterates overshoot back and forth
            let oscillating = (q - prev2) * delta < T::zero();
            q = if oscillating {
                q + T::lit(0.5) * delta
            } else {
                q_new
            };
            if converged {
                break;
            }
        }
    }

    Ok((q, alpha))
}

/// Max-norm of the stationary Langevin right-hand side.
fn residual_norm<T: Scalar>(
    dc: &DerivedConstants<T>,
    n_pairs: usize,
    q: T,
    alpha: &[Complex<T>],
    drive_scale: T,
) -> T {
    let mut worst = T::zero();
    let mut sum = T::zero();
    for g in 0..n_pairs {
        let pair_sum = alpha[2 * g] + alpha[2 * g + 1];
        sum += norm_sqr(pair_sum);
        for j in (2 * g)..(2 * g + 2) {
            // -(i Delta_j + kappa_j) alpha_j + i g0 (pair sum) q + eta_j
            let lhs = -cplx(dc.kappa[j], dc.delta[j]) * alpha[j]
                + cplx(T::zero(), dc.g0 * q) * pair_sum
                + cplx(dc.eta[j] * drive_scale, T::zero());
            worst = worst.maxv(norm_sqr(lhs).sqrt());
        }
    }
    // mechanical stationarity: -omega_m q + g0 sum = 0
    worst = worst.maxv((dc.g0 * sum - dc.omega_m * q).abs());
    worst
}

fn drive_tolerance<T: Scalar>(dc: &DerivedConstants<T>) -> T {
    let eta_max = dc.eta.iter().copied().fold(T::zero(), Scalar::maxv);
    T::lit(RESIDUAL_RTOL) * eta_max.maxv(T::one())
}

fn finish<T: Scalar>(
    dc: &DerivedConstants<T>,
    n_pairs: usize,
    q: T,
    alpha: Vec<Complex<T>>,
) -> Result<SteadyState<T>, SteadyStateError> {
    let residual = residual_norm(dc, n_pairs, q, &alpha, T::one());
    if residual > drive_tolerance(dc) {
        return Err(SteadyStateError::NoConvergence {
            last_residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(SteadyState {
        q_s: vec![q],
        alpha,
        residual,
    })
}

/// Steady state of one double-longitudinal-mode cavity (two optical
/// modes, one mechanical mode).
pub fn solve_single_cavity<T: Scalar>(
    dc: &DerivedConstants<T>,
) -> Result<SteadyState<T>, SteadyStateError> {
    let (q, alpha) = solve_groups(dc, 1)?;
    finish(dc, 1, q, alpha)
}

/// Steady state for the multi-mode schemes.
///
/// `TwoCavityBs`: the cavities couple only after their outputs leave the
/// cavity, so each entry of `cavities` is solved independently and the
/// per-cavity steady states are returned in order. `DualPolarization`:
/// one cavity, four optical modes, one shared mirror.
pub fn solve_self_consistent<T: Scalar>(
    cavities: &[DerivedConstants<T>],
    scheme: Scheme,
) -> Result<Vec<SteadyState<T>>, SteadyStateError> {
    match scheme {
        Scheme::Single => cavities
            .iter()
            .map(solve_single_cavity)
            .collect(),
        Scheme::TwoCavityBs => cavities
            .iter()
            .map(solve_single_cavity)
            .collect(),
        Scheme::DualPolarization => cavities
            .iter()
            .map(|dc| {
                assert_eq!(dc.n_optical(), 4, "dual polarization needs four optical modes");
                let (q, alpha) = solve_groups(dc, 2)?;
                finish(dc, 2, q, alpha)
            })
            .collect(),
    }
}
