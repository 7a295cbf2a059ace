//! Drift matrix A and diffusion matrix D of the linearized quantum
//! Langevin equations, for the three configurations, plus the stability
//! test.
//!
//! Row ordering is always (q, p) for each mechanical mode followed by
//! (X, Y) for each optical mode. Two deliberate departures from the
//! printed matrices, both applied here:
//!   - the 6x6 single-cavity drift rows 5-6 use the mode-2 effective
//!     detuning (the source prints the mode-1 symbol there, at odds with
//!     its own 10x10 display);
//!   - the single-cavity diffusion matrix carries sqrt(kappa_1 kappa_2)
//!     cross terms because both longitudinal modes share one input port,
//!     matching the four-mode display.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::model::DerivedConstants;
use crate::steadystate::SteadyState;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigTag {
    SingleIntracavity,
    OutputFolded,
    DualPolarization,
}

/// Whether beam-splitter composition acts on the output-mode covariance
/// matrices built from the folded drift matrices (`Paper`) or directly on
/// the intracavity ones (`Intracavity`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IoMode {
    #[default]
    Paper,
    Intracavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Mechanical,
    Optical,
}

/// One (q,p) or (X,Y) row pair of a model: what it is, which cavity it
/// belongs to, and its global index within its kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLabel {
    pub kind: ModeKind,
    pub cavity: usize,
    pub index: usize,
}

impl ModeLabel {
    pub fn mech(cavity: usize, index: usize) -> Self {
        ModeLabel { kind: ModeKind::Mechanical, cavity, index }
    }

    pub fn optical(cavity: usize, index: usize) -> Self {
        ModeLabel { kind: ModeKind::Optical, cavity, index }
    }
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ModeKind::Mechanical => write!(f, "m{}", self.index + 1),
            ModeKind::Optical => write!(f, "a{}", self.index + 1),
        }
    }
}

/// Drift and diffusion matrices for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub a: DMatrix<T>,
    pub d: DMatrix<T>,
    pub ordering: Vec<ModeLabel>,
    pub config_tag: ConfigTag,
}

impl<T: Scalar> LinearModel<T> {
    pub fn n_modes(&self) -> usize {
        self.ordering.len()
    }
}

/// Effective couplings of the linearized dynamics around a working point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCouplings<T> {
    /// G = sqrt(2) g0 Re[alpha_lo + alpha_hi]
    pub big_g: T,
    /// g = sqrt(2) g0 Im[alpha_lo + alpha_hi]
    pub small_g: T,
    /// Effective detunings Delta'_j = Delta_j - g0 q_s, one per mode.
    pub delta_prime: Vec<T>,
    /// Radiation-pressure cross term g0 q_s.
    pub g0_qs: T,
}

/// Couplings of optical pair `group` (modes 2g, 2g+1) around `ss`.
pub fn couplings<T: Scalar>(
    dc: &DerivedConstants<T>,
    ss: &SteadyState<T>,
    group: usize,
) -> LinearizedCouplings<T> {
    let sum = ss.pair_sum(group);
    let sqrt2 = T::lit(2.0).sqrt();
    let g0_qs = dc.g0 * ss.q_s[0];
    LinearizedCouplings {
        big_g: sqrt2 * dc.g0 * sum.re,
        small_g: sqrt2 * dc.g0 * sum.im,
        delta_prime: dc.delta.iter().map(|&d| d - g0_qs).collect(),
        g0_qs,
    }
}

/// Fills the 4x4 optical block of one longitudinal pair (rows/cols
/// `base..base+4`) plus its mechanical couplings at rows/cols 0..2.
fn fill_pair_block<T: Scalar>(
    a: &mut DMatrix<T>,
    base: usize,
    kappa_diag: [T; 2],
    delta_prime: [T; 2],
    g0_qs: T,
    big_g: T,
    small_g: T,
) {
    let (b, k, dp) = (base, kappa_diag, delta_prime);
    // mechanical force row: dp/dt picks up G, g from each optical mode
    a[(1, b)] = big_g;
    a[(1, b + 1)] = small_g;
    a[(1, b + 2)] = big_g;
    a[(1, b + 3)] = small_g;
    // lower mode
    a[(b, 0)] = -small_g;
    a[(b, b)] = k[0];
    a[(b, b + 1)] = dp[0];
    a[(b, b + 3)] = -g0_qs;
    a[(b + 1, 0)] = big_g;
    a[(b + 1, b)] = -dp[0];
    a[(b + 1, b + 1)] = k[0];
    a[(b + 1, b + 2)] = g0_qs;
    // upper mode
    a[(b + 2, 0)] = -small_g;
    a[(b + 2, b + 1)] = -g0_qs;
    a[(b + 2, b + 2)] = k[1];
    a[(b + 2, b + 3)] = dp[1];
    a[(b + 3, 0)] = big_g;
    a[(b + 3, b)] = g0_qs;
    a[(b + 3, b + 2)] = -dp[1];
    a[(b + 3, b + 3)] = k[1];
}

fn mechanical_rows<T: Scalar>(a: &mut DMatrix<T>, omega_m: T, gamma_m: T) {
    a[(0, 1)] = omega_m;
    a[(1, 0)] = -omega_m;
    a[(1, 1)] = -gamma_m;
}

/// Diffusion entries for an optical pair sharing one input port:
/// kappa_j on the diagonals, sqrt(kappa_lo kappa_hi) X-X and Y-Y cross
/// terms.
fn fill_pair_diffusion<T: Scalar>(d: &mut DMatrix<T>, row: usize, col: usize, k_row: [T; 2], k_col: [T; 2]) {
    for i in 0..2 {
        for j in 0..2 {
            let v = (k_row[i] * k_col[j]).sqrt();
            d[(row + 2 * i, col + 2 * j)] = v;
            d[(row + 2 * i + 1, col + 2 * j + 1)] = v;
        }
    }
}

/// 6x6 intracavity model of a single cavity.
pub fn build_single<T: Scalar>(
    dc: &DerivedConstants<T>,
    ss: &SteadyState<T>,
) -> LinearModel<T> {
    build_single_tagged(dc, ss, 0, ConfigTag::SingleIntracavity, false)
}

/// Folded (or intracavity) 6x6 model of one cavity of a beam-splitter
/// chain, with its mode labels placed at cavity position `cavity`.
pub fn build_folded_single<T: Scalar>(
    dc: &DerivedConstants<T>,
    ss: &SteadyState<T>,
    cavity: usize,
    io_mode: IoMode,
) -> LinearModel<T> {
    build_single_tagged(dc, ss, cavity, ConfigTag::OutputFolded, io_mode == IoMode::Paper)
}

fn build_single_tagged<T: Scalar>(
    dc: &DerivedConstants<T>,
    ss: &SteadyState<T>,
    cavity: usize,
    tag: ConfigTag,
    folded: bool,
) -> LinearModel<T> {
    let c = couplings(dc, ss, 0);
    let mut a = DMatrix::zeros(6, 6);
    mechanical_rows(&mut a, dc.omega_m, dc.gamma_m[0]);
    let diag = |k: T| {
        if folded {
            // literal output-mode diagonal of the folded drift matrix
            -k + (T::lit(2.0) * k).sqrt()
        } else {
            -k
        }
    };
    fill_pair_block(
        &mut a,
        2,
        [diag(dc.kappa[0]), diag(dc.kappa[1])],
        [c.delta_prime[0], c.delta_prime[1]],
        c.g0_qs,
        c.big_g,
        c.small_g,
    );

    let mut d = DMatrix::zeros(6, 6);
    d[(1, 1)] = dc.gamma_m[0] * (T::lit(2.0) * dc.nbar + T::one());
    fill_pair_diffusion(&mut d, 2, 2, [dc.kappa[0], dc.kappa[1]], [dc.kappa[0], dc.kappa[1]]);

    let ordering = vec![
        ModeLabel::mech(cavity, cavity),
        ModeLabel::optical(cavity, 2 * cavity),
        ModeLabel::optical(cavity, 2 * cavity + 1),
    ];
    LinearModel { a, d, ordering, config_tag: tag }
}

/// 10x10 model of the dual-polarization cavity: two longitudinal pairs
/// sharing one mechanical mode and one input port.
pub fn build_dual_polarization<T: Scalar>(
    dc: &DerivedConstants<T>,
    ss: &SteadyState<T>,
) -> LinearModel<T> {
    assert_eq!(dc.n_optical(), 4);
    let mut a = DMatrix::zeros(10, 10);
    mechanical_rows(&mut a, dc.omega_m, dc.gamma_m[0]);
    for group in 0..2 {
        let c = couplings(dc, ss, group);
        let lo = 2 * group;
        fill_pair_block(
            &mut a,
            2 + 4 * group,
            [-dc.kappa[lo], -dc.kappa[lo + 1]],
            [c.delta_prime[lo], c.delta_prime[lo + 1]],
            c.g0_qs,
            c.big_g,
            c.small_g,
        );
    }

    let mut d = DMatrix::zeros(10, 10);
    d[(1, 1)] = dc.gamma_m[0] * (T::lit(2.0) * dc.nbar + T::one());
    for gr in 0..2 {
        for gc in 0..2 {
            fill_pair_diffusion(
                &mut d,
                2 + 4 * gr,
                2 + 4 * gc,
                [dc.kappa[2 * gr], dc.kappa[2 * gr + 1]],
                [dc.kappa[2 * gc], dc.kappa[2 * gc + 1]],
            );
        }
    }

    let ordering = vec![
        ModeLabel::mech(0, 0),
        ModeLabel::optical(0, 0),
        ModeLabel::optical(0, 1),
        ModeLabel::optical(0, 2),
        ModeLabel::optical(0, 3),
    ];
    LinearModel { a, d, ordering, config_tag: ConfigTag::DualPolarization }
}

/// Output-mode ("folded") models of two cavities whose outputs meet on a
/// beam splitter.
///
/// `IoMode::Paper` reproduces the printed output drift matrices with
/// their `-kappa + sqrt(2 kappa)` diagonals, literally, in rad/s;
/// `IoMode::Intracavity` keeps the intracavity matrices and leaves the
/// input-output step to the composition.
pub fn build_output_folded<T: Scalar>(
    dc_pair: [&DerivedConstants<T>; 2],
    ss_pair: [&SteadyState<T>; 2],
    io_mode: IoMode,
) -> (LinearModel<T>, LinearModel<T>) {
    let folded = io_mode == IoMode::Paper;
    (
        build_single_tagged(dc_pair[0], ss_pair[0], 0, ConfigTag::OutputFolded, folded),
        build_single_tagged(dc_pair[1], ss_pair[1], 1, ConfigTag::OutputFolded, folded),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict<T> {
    pub stable: bool,
    /// Largest real part over the drift-matrix spectrum.
    pub spectral_abscissa: T,
}

/// Routh-Hurwitz style verdict from the drift-matrix spectrum.
pub fn check_stability<T: Scalar>(model: &LinearModel<T>) -> StabilityVerdict<T> {
    let eigs = model.a.complex_eigenvalues();
    let abscissa = eigs
        .iter()
        .map(|e| e.re)
        .reduce(Scalar::maxv)
        .expect("non-empty spectrum");
    StabilityVerdict { stable: abscissa < T::zero(), spectral_abscissa: abscissa }
}

/// Row-major CSV with 17 significant digits, for external verification.
pub fn matrix_to_csv<T: Scalar>(m: &DMatrix<T>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", m[(i, j)].to_f64().unwrap()));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_constants, scheme_params, Scheme, SystemParams};
    use crate::steadystate::{solve_self_consistent, solve_single_cavity};
    use approx::assert_relative_eq;

    fn fig2_model() -> LinearModel<f64> {
        let dc = derive_constants(&SystemParams::<f64>::default_set()).unwrap();
        let ss = solve_single_cavity(&dc).unwrap();
        build_single(&dc, &ss)
    }

    #[test]
    fn trace_reads_off_the_diagonal() {
        let dc = derive_constants(&SystemParams::<f64>::default_set()).unwrap();
        let ss = solve_single_cavity(&dc).unwrap();
        let m = build_single(&dc, &ss);
        let expect = -dc.gamma_m[0] - 2.0 * dc.kappa[0] - 2.0 * dc.kappa[1];
        assert_relative_eq!(m.a.trace(), expect, max_relative = 1e-14);
    }

    #[test]
    fn zero_coupling_decouples_blocks() {
        let mut dc = derive_constants(&SystemParams::<f64>::default_set()).unwrap();
        dc.g0 = 0.0;
        let ss = solve_single_cavity(&dc).unwrap();
        let m = build_single(&dc, &ss);
        for i in 0..2 {
            for j in 2..6 {
                assert_eq!(m.a[(i, j)], 0.0);
                assert_eq!(m.a[(j, i)], 0.0);
            }
        }
    }

    #[test]
    fn first_mechanical_row_structure() {
        let m = fig2_model();
        let dc = derive_constants(&SystemParams::<f64>::default_set()).unwrap();
        assert_eq!(m.a[(0, 0)], 0.0);
        assert_relative_eq!(m.a[(0, 1)], dc.omega_m);
        for j in 2..6 {
            assert_eq!(m.a[(0, j)], 0.0);
        }
    }

    #[test]
    fn structural_audit_of_entries() {
        // every entry of the single-cavity A is one of the allowed symbols
        let dc = derive_constants(&SystemParams::<f64>::default_set()).unwrap();
        let ss = solve_single_cavity(&dc).unwrap();
        let c = couplings(&dc, &ss, 0);
        let m = build_single(&dc, &ss);
        let allowed = [
            0.0,
            dc.omega_m,
            -dc.omega_m,
            -dc.gamma_m[0],
            c.big_g,
            -c.big_g,
            c.small_g,
            -c.small_g,
            c.delta_prime[0],
            -c.delta_prime[0],
            c.delta_prime[1],
            -c.delta_prime[1],
            c.g0_qs,
            -c.g0_qs,
            -dc.kappa[0],
            -dc.kappa[1],
        ];
        for i in 0..6 {
            for j in 0..6 {
                let v = m.a[(i, j)];
                assert!(
                    allowed.iter().any(|&s| s == v),
                    "unexpected entry A[{i},{j}] = {v}"
                );
            }
        }
    }

    #[test]
    fn diffusion_is_symmetric_psd() {
        for model in [fig2_model(), {
            let p = SystemParams::<f64>::default_set();
            let cav = scheme_params(&p, Scheme::DualPolarization, 1).unwrap();
            let ss = solve_self_consistent(&[cav[0].dc.clone()], Scheme::DualPolarization)
                .unwrap();
            build_dual_polarization(&cav[0].dc, &ss[0])
        }] {
            assert_relative_eq!(model.d.clone(), model.d.transpose(), epsilon = 0.0);
            let eigs = model.d.clone().symmetric_eigenvalues();
            let scale = model.d.norm();
            for e in eigs.iter() {
                assert!(*e >= -1e-12 * scale, "D not PSD: eig {e}");
            }
        }
    }

    #[test]
    fn dual_polarization_swap_symmetry() {
        let p = SystemParams::<f64>::default_set();
        let cav = scheme_params(&p, Scheme::DualPolarization, 1).unwrap();
        let ss = solve_self_consistent(&[cav[0].dc.clone()], Scheme::DualPolarization)
            .unwrap();
        let m = build_dual_polarization(&cav[0].dc, &ss[0]);
        // swap optical pairs (1,2) <-> (3,4): rows/cols 2..6 <-> 6..10
        let n = 10;
        let mut perm = DMatrix::<f64>::zeros(n, n);
        perm[(0, 0)] = 1.0;
        perm[(1, 1)] = 1.0;
        for k in 0..4 {
            perm[(2 + k, 6 + k)] = 1.0;
            perm[(6 + k, 2 + k)] = 1.0;
        }
        let swapped = &perm * &m.a * perm.transpose();
        assert_relative_eq!(swapped, m.a, max_relative = 1e-12);
    }

    #[test]
    fn single_is_restriction_of_dual_polarization() {
        // with modes 3,4 undriven and decoupled, the 6x6 model matches the
        // corresponding block of the 10x10 one (D cross terms aside)
        let p = SystemParams::<f64>::default_set();
        let dc2 = derive_constants(&p).unwrap();
        let ss2 = solve_single_cavity(&dc2).unwrap();
        let single = build_single(&dc2, &ss2);

        let cav = scheme_params(&p, Scheme::DualPolarization, 1).unwrap();
        let mut dc4 = cav[0].dc.clone();
        dc4.eta[2] = 0.0;
        dc4.eta[3] = 0.0;
        let ss4 = &solve_self_consistent(&[dc4.clone()], Scheme::DualPolarization).unwrap()[0];
        let dual = build_dual_polarization(&dc4, ss4);
        let block = dual.a.view((0, 0), (6, 6));
        assert_relative_eq!(DMatrix::from(block), single.a, max_relative = 1e-9);
    }

    #[test]
    fn folded_matches_recomputed_couplings() {
        let p = SystemParams::<f64>::default_set();
        let cavs = scheme_params(&p, Scheme::TwoCavityBs, 2).unwrap();
        let dcs: Vec<_> = cavs.iter().map(|c| c.dc.clone()).collect();
        let sss = solve_self_consistent(&dcs, Scheme::TwoCavityBs).unwrap();
        let (m1, m2) = build_output_folded(
            [&dcs[0], &dcs[1]],
            [&sss[0], &sss[1]],
            IoMode::Paper,
        );
        // identical cavities: element-wise equal models
        assert_eq!(m1.a, m2.a);
        assert_eq!(m1.d, m2.d);
        // G, g entries recomputed independently from the steady state
        let sum = sss[0].alpha[0] + sss[0].alpha[1];
        let g_big = 2.0f64.sqrt() * dcs[0].g0 * sum.re;
        let g_small = 2.0f64.sqrt() * dcs[0].g0 * sum.im;
        assert_relative_eq!(m1.a[(1, 2)], g_big, max_relative = 1e-12);
        assert_relative_eq!(m1.a[(1, 3)], g_small, max_relative = 1e-12);
        // paper io mode: -kappa + sqrt(2 kappa) on the optical diagonal
        let expect = -dcs[0].kappa[0] + (2.0 * dcs[0].kappa[0]).sqrt();
        assert_relative_eq!(m1.a[(2, 2)], expect, max_relative = 1e-12);
        // intracavity io mode keeps -kappa
        let (m1i, _) = build_output_folded(
            [&dcs[0], &dcs[1]],
            [&sss[0], &sss[1]],
            IoMode::Intracavity,
        );
        assert_relative_eq!(m1i.a[(2, 2)], -dcs[0].kappa[0], max_relative = 1e-12);
    }

    #[test]
    fn stability_of_minus_identity() {
        let model = LinearModel {
            a: -DMatrix::<f64>::identity(6, 6),
            d: DMatrix::identity(6, 6),
            ordering: vec![
                ModeLabel::mech(0, 0),
                ModeLabel::optical(0, 0),
                ModeLabel::optical(0, 1),
            ],
            config_tag: ConfigTag::SingleIntracavity,
        };
        let v = check_stability(&model);
        assert!(v.stable);
        assert_relative_eq!(v.spectral_abscissa, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn fig2_point_is_stable() {
        let v = check_stability(&fig2_model());
        assert!(v.stable, "abscissa {}", v.spectral_abscissa);
    }

    #[test]
    fn csv_has_17_significant_digits() {
        let m = DMatrix::<f64>::from_row_slice(1, 2, &[1.0 / 3.0, 2.0]);
        let csv = matrix_to_csv(&m);
        assert_eq!(csv, "3.3333333333333331e-1,2.0000000000000000e0\n");
    }
}
