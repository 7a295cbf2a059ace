//! Beam-splitter composition of several cavity systems into one Gaussian
//! state, and the standard chain layouts.
//!
//! A beam splitter with transmissivity angle `theta` and phase `phi`
//! acts on the quadratures of its two target modes as the symplectic
//! block matrix `[[cos(theta) R(phi), -sin(theta) R(phi)],
//! [sin(theta) I, cos(theta) I]]` with `R` the plane rotation. The
//! composed covariance matrix is `S_k ... S_1 (V_1 (+) ... (+) V_N)
//! S_1^T ... S_k^T`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    build_dual_polarization, build_folded_single, IoMode, ModeKind, ModeLabel,
};
use crate::lyapunov::{solve_lyapunov, CovarianceMatrix, LyapunovError};
use crate::model::{scheme_params, ModelError, Scheme, SystemParams};
use crate::steadystate::{solve_self_consistent, SteadyStateError};
use crate::Scalar;

/// One beam splitter acting on two modes of a composed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec<T> {
    /// Transmissivity angle; `pi/4` is the balanced splitter.
    pub theta: T,
    /// Phase imprinted on the first target mode.
    pub phi: T,
    /// Global mode indices the splitter mixes.
    pub modes: (usize, usize),
}

/// Symplectic matrix of one beam splitter embedded in an `n_modes`-mode
/// identity.
pub fn bs_symplectic<T: Scalar>(n_modes: usize, spec: &BeamSplitterSpec<T>) -> DMatrix<T> {
    let (a, b) = spec.modes;
    assert!(a < n_modes && b < n_modes && a != b, "bad beam-splitter targets");
    let (ct, st) = (spec.theta.cos(), spec.theta.sin());
    let (cp, sp) = (spec.phi.cos(), spec.phi.sin());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let r = [[cp, -sp], [sp, cp]];
    for i in 0..2 {
        for j in 0..2 {
            s[(2 * a + i, 2 * a + j)] = ct * r[i][j];
            s[(2 * a + i, 2 * b + j)] = -st * r[i][j];
            s[(2 * b + i, 2 * b + j)] = if i == j { ct } else { T::zero() };
            s[(2 * b + i, 2 * a + j)] = if i == j { st } else { T::zero() };
        }
    }
    s
}

/// Direct sum of per-system covariance matrices.
///
/// Labels are rewritten so that each input part becomes one cavity:
/// part `p` gets `cavity = p`, and mechanical/optical indices run
/// globally in part order.
pub fn direct_sum<T: Scalar>(parts: &[CovarianceMatrix<T>]) -> CovarianceMatrix<T> {
    let n: usize = parts.iter().map(CovarianceMatrix::n_modes).sum();
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    let mut ordering = Vec::with_capacity(n);
    let (mut base, mut n_mech, mut n_opt) = (0usize, 0usize, 0usize);
    for (p, part) in parts.iter().enumerate() {
        let k = 2 * part.n_modes();
        v.view_mut((base, base), (k, k)).copy_from(&part.v);
        for label in &part.ordering {
            ordering.push(match label.kind {
                ModeKind::Mechanical => {
                    n_mech += 1;
                    ModeLabel::mech(p, n_mech - 1)
                }
                ModeKind::Optical => {
                    n_opt += 1;
                    ModeLabel::optical(p, n_opt - 1)
                }
            });
        }
        base += k;
    }
    CovarianceMatrix { v, ordering }
}

/// Applies the splitters in order to the direct sum of the parts.
pub fn compose<T: Scalar>(
    parts: &[CovarianceMatrix<T>],
    splitters: &[BeamSplitterSpec<T>],
) -> CovarianceMatrix<T> {
    let mut cm = direct_sum(parts);
    let n = cm.n_modes();
    for spec in splitters {
        let s = bs_symplectic(n, spec);
        cm.v = &s * cm.v * s.transpose();
    }
    cm
}

/// Which same-frequency optical line the chain splitters couple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    Lower,
    #[default]
    Upper,
}

/// Whether the chain links two-mode (folded single-cavity) systems or
/// four-mode (dual-polarization) ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    #[default]
    TwoMode,
    FourMode,
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error("chain needs at least one system")]
    Empty,
    #[error("expected {expected} beam-splitter angles, got {got}")]
    AngleCount { expected: usize, got: usize },
}

/// A chain of `n_systems` identical cavities, neighbor `k` and `k+1`
/// linked by splitter `k` on the chosen optical line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec<T> {
    pub n_systems: usize,
    /// One angle per splitter, or a single angle replicated.
    pub theta: Vec<T>,
    /// One phase per splitter, or a single phase replicated.
    pub phi: Vec<T>,
    pub line: Line,
    pub kind: ChainKind,
    pub io_mode: IoMode,
}

impl<T: Scalar> ChainSpec<T> {
    pub fn balanced(n_systems: usize, kind: ChainKind) -> Self {
        ChainSpec {
            n_systems,
            theta: vec![T::lit(std::f64::consts::FRAC_PI_4)],
            phi: vec![T::zero()],
            line: Line::default(),
            kind,
            io_mode: IoMode::default(),
        }
    }

    fn angles(&self) -> Result<Vec<(T, T)>, ChainError> {
        let n_bs = self.n_systems.saturating_sub(1);
        let expand = |v: &Vec<T>| -> Result<Vec<T>, ChainError> {
            if v.len() == 1 {
                Ok(vec![v[0]; n_bs])
            } else if v.len() == n_bs {
                Ok(v.clone())
            } else {
                Err(ChainError::AngleCount { expected: n_bs, got: v.len() })
            }
        };
        if n_bs == 0 {
            return Ok(Vec::new());
        }
        Ok(expand(&self.theta)?
            .into_iter()
            .zip(expand(&self.phi)?)
            .collect())
    }

    /// Splitter list for systems with `modes_per_system` modes each
    /// (mechanical mode first, then the optical lines).
    pub fn splitters(
        &self,
        modes_per_system: usize,
    ) -> Result<Vec<BeamSplitterSpec<T>>, ChainError> {
        let line_offset = match self.line {
            Line::Lower => 1,
            Line::Upper => 2,
        };
        Ok(self
            .angles()?
            .into_iter()
            .enumerate()
            .map(|(k, (theta, phi))| BeamSplitterSpec {
                theta,
                phi,
                modes: (
                    k * modes_per_system + line_offset,
                    (k + 1) * modes_per_system + line_offset,
                ),
            })
            .collect())
    }
}

/// Full pipeline for a chain: steady states, linear models, covariance
/// matrices, beam-splitter composition.
pub fn build_chain<T: Scalar>(
    params: &SystemParams<T>,
    spec: &ChainSpec<T>,
) -> Result<CovarianceMatrix<T>, ChainError> {
    if spec.n_systems == 0 {
        return Err(ChainError::Empty);
    }
    let (scheme, modes_per_system) = match spec.kind {
        ChainKind::TwoMode => (Scheme::TwoCavityBs, 3),
        ChainKind::FourMode => (Scheme::DualPolarization, 5),
    };
    let cavities = scheme_params(params, scheme, spec.n_systems)?;
    let dcs: Vec<_> = cavities.iter().map(|c| c.dc.clone()).collect();
    let states = solve_self_consistent(&dcs, scheme)?;

    let parts = dcs
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(i, (dc, ss))| {
            let model = match spec.kind {
                ChainKind::TwoMode => build_folded_single(dc, ss, i, spec.io_mode),
                // the four-mode systems enter the splitters with their
                // intracavity covariances
                ChainKind::FourMode => build_dual_polarization(dc, ss),
            };
            solve_lyapunov(&model)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(compose(&parts, &spec.splitters(modes_per_system)?))
}

/// Restriction of a composed state to its optical modes: the 2N- or
/// 4N-partite state the chain schemes advertise (mechanical modes are
/// internal to each cavity).
pub fn optical_restriction<T: Scalar>(cm: &CovarianceMatrix<T>) -> CovarianceMatrix<T> {
    let keep: Vec<usize> = cm
        .ordering
        .iter()
        .enumerate()
        .filter(|(_, l)| l.kind == ModeKind::Optical)
        .map(|(i, _)| i)
        .collect();
    CovarianceMatrix {
        v: crate::entanglement::reduce_cm(&cm.v, &keep),
        ordering: keep.iter().map(|&i| cm.ordering[i]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{
        classify_structure, pairwise_matrix, tmsv_covariance, EntanglementReport, ShapeLabel,
    };
    use crate::symplectic::symplectic_defect;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn tmsv_part(r: f64) -> CovarianceMatrix<f64> {
        CovarianceMatrix {
            v: tmsv_covariance(r),
            ordering: vec![ModeLabel::optical(0, 0), ModeLabel::optical(0, 1)],
        }
    }

    #[test]
    fn bs_matrix_is_symplectic() {
        for (theta, phi) in [(0.3, 0.0), (FRAC_PI_4, 1.1), (1.2, -2.5), (PI / 8.0, 0.4)] {
            let s = bs_symplectic(4, &BeamSplitterSpec { theta, phi, modes: (1, 3) });
            assert!(symplectic_defect(&s) < 1e-13);
        }
    }

    #[test]
    fn trivial_bs_is_identity() {
        let s = bs_symplectic(2, &BeamSplitterSpec { theta: 0.0, phi: 0.0, modes: (0, 1) });
        assert_relative_eq!(s, DMatrix::identity(4, 4), epsilon = 1e-15);
    }

    #[test]
    fn direct_sum_relabels_by_part() {
        let cm = direct_sum(&[tmsv_part(0.2), tmsv_part(0.4)]);
        assert_eq!(cm.n_modes(), 4);
        assert_eq!(cm.ordering[2], ModeLabel::optical(1, 2));
        assert_relative_eq!(cm.v[(0, 2)], (0.4f64).sinh() / 2.0, max_relative = 1e-12);
        // off-diagonal blocks between parts vanish
        assert_eq!(cm.v[(0, 4)], 0.0);
    }

    #[test]
    fn balanced_bs_on_two_tmsv_makes_a_square() {
        // mixing one line of each pair on a 50/50 splitter turns two
        // disjoint entangled pairs into a 4-cycle
        let parts = [tmsv_part(0.8), tmsv_part(0.8)];
        let cm = compose(
            &parts,
            &[BeamSplitterSpec { theta: FRAC_PI_4, phi: 0.0, modes: (0, 2) }],
        );
        let pw = pairwise_matrix(&cm);
        let shape = classify_structure(&pw, &cm.ordering, 1e-5);
        assert_eq!(shape, ShapeLabel::Square);
        // the four surviving edges share one value by symmetry
        for (i, j) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
            assert!(pw[(i, j)] > 1e-3, "missing edge ({i},{j})");
            assert_relative_eq!(pw[(i, j)], pw[(0, 1)], max_relative = 1e-9);
        }
        assert!(pw[(0, 2)] < 1e-10);
        assert!(pw[(1, 3)] < 1e-10);
    }

    #[test]
    fn skewed_bs_angles_pick_disjoint_pairs() {
        let parts = [tmsv_part(0.8), tmsv_part(0.8)];
        let mk = |theta: f64| {
            let cm = compose(
                &parts,
                &[BeamSplitterSpec { theta, phi: 0.0, modes: (0, 2) }],
            );
            pairwise_matrix(&cm)
        };
        // theta -> 0: original pairs survive
        let pw = mk(PI / 8.0);
        assert!(pw[(0, 1)] > pw[(0, 3)]);
        // theta -> pi/2: cross pairs dominate
        let pw = mk(3.0 * PI / 8.0);
        assert!(pw[(0, 3)] > pw[(0, 1)]);
    }

    #[test]
    fn composition_preserves_physicality() {
        let parts = [tmsv_part(1.0), tmsv_part(0.3)];
        let cm = compose(
            &parts,
            &[BeamSplitterSpec { theta: 0.9, phi: 0.7, modes: (1, 3) }],
        );
        assert!(crate::symplectic::physicality_min_eig(&cm.v) > -1e-10);
    }

    #[test]
    fn chain_splitter_indexing() {
        let spec = ChainSpec::<f64> {
            n_systems: 3,
            theta: vec![FRAC_PI_4],
            phi: vec![0.0],
            line: Line::Upper,
            kind: ChainKind::TwoMode,
            io_mode: IoMode::Paper,
        };
        let bs = spec.splitters(3).unwrap();
        assert_eq!(bs.len(), 2);
        assert_eq!(bs[0].modes, (2, 5));
        assert_eq!(bs[1].modes, (5, 8));
        let lower = ChainSpec { line: Line::Lower, ..spec.clone() };
        assert_eq!(lower.splitters(3).unwrap()[0].modes, (1, 4));
        let bad = ChainSpec { theta: vec![0.1, 0.2, 0.3], ..spec };
        assert!(matches!(bad.splitters(3), Err(ChainError::AngleCount { .. })));
    }

    #[test]
    fn single_system_chain_matches_direct_solve() {
        let params = SystemParams::<f64>::default_set();
        let spec = ChainSpec::balanced(1, ChainKind::TwoMode);
        let cm = build_chain(&params, &spec).unwrap();
        assert_eq!(cm.n_modes(), 3);
        let cavs = scheme_params(&params, Scheme::TwoCavityBs, 1).unwrap();
        let ss = solve_self_consistent(&[cavs[0].dc.clone()], Scheme::TwoCavityBs).unwrap();
        let model = build_folded_single(&cavs[0].dc, &ss[0], 0, IoMode::Paper);
        let direct = solve_lyapunov(&model).unwrap();
        assert_relative_eq!(cm.v, direct.v, max_relative = 1e-12);
    }

    #[test]
    fn two_system_chain_runs_and_reports() {
        let params = SystemParams::<f64>::default_set();
        let spec = ChainSpec::balanced(2, ChainKind::TwoMode);
        let cm = build_chain(&params, &spec).unwrap();
        assert_eq!(cm.n_modes(), 6);
        let rep = EntanglementReport::from_covariance(&cm);
        assert_eq!(rep.labels.len(), 6);
        assert_eq!(rep.labels[0], "m1");
        assert_eq!(rep.labels[4], "a3");
    }

    #[test]
    fn four_mode_chain_dimensions() {
        let params = SystemParams::<f64>::default_set();
        let spec = ChainSpec::balanced(2, ChainKind::FourMode);
        let cm = build_chain(&params, &spec).unwrap();
        assert_eq!(cm.n_modes(), 10);
        assert_eq!(cm.ordering[5], ModeLabel::mech(1, 1));
    }
}
