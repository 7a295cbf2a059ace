//! Parameter-sweep engine and figure-reproduction presets.
//!
//! A sweep evaluates the full pipeline (steady state -> linearized model
//! -> covariance matrix -> pairwise negativities -> shape label) on a 1-
//! or 2-axis grid. Grid points are independent and evaluated in
//! parallel; rows are emitted in row-major axis order regardless of the
//! worker count, and the CSV float formatting is the shortest
//! round-trip decimal, so repeated runs are byte-identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants;
use crate::dynamics::{build_dual_polarization, build_single};
use crate::entanglement::{classify_structure, pairwise_matrix, ShapeLabel, EDGE_THRESHOLD};
use crate::lyapunov::{solve_lyapunov, CovarianceMatrix, LyapunovError};
use crate::model::{scheme_params, Scheme, SystemParams};
use crate::network::{build_chain, optical_restriction, ChainError, ChainKind, ChainSpec, Line};
use crate::steadystate::solve_self_consistent;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid sweep axis: {0}")]
    InvalidAxis(String),
    #[error("a sweep takes 1 or 2 axes, got {0}")]
    AxisCount(usize),
}

/// Which parameter a sweep axis drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Detuning of the upper mode in units of `omega_m`.
    Delta2OverOmegaM,
    /// Cavity decay (applied to every cavity mode), rad/s.
    Kappa,
    /// Mechanical decay, rad/s.
    GammaM,
    /// Bath temperature, kelvin.
    Temperature,
    /// Beam-splitter transmissivity angle (chain targets only).
    Theta,
    /// Beam-splitter phase (chain targets only).
    Phi,
}

impl AxisKind {
    pub fn column(self) -> &'static str {
        match self {
            AxisKind::Delta2OverOmegaM => "delta2_over_omega_m",
            AxisKind::Kappa => "kappa",
            AxisKind::GammaM => "gamma_m",
            AxisKind::Temperature => "temperature",
            AxisKind::Theta => "theta",
            AxisKind::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis<T> {
    pub kind: AxisKind,
    pub min: T,
    pub max: T,
    pub n_points: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl<T: Scalar> Axis<T> {
    pub fn linear(kind: AxisKind, min: f64, max: f64, n_points: usize) -> Self {
        Axis { kind, min: T::lit(min), max: T::lit(max), n_points, scale: AxisScale::Linear }
    }

    pub fn log(kind: AxisKind, min: f64, max: f64, n_points: usize) -> Self {
        Axis { kind, min: T::lit(min), max: T::lit(max), n_points, scale: AxisScale::Log }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidAxis(m));
        if self.n_points == 0 {
            return bad(format!("{}: n_points must be >= 1", self.kind.column()));
        }
        if self.n_points > 1 && !(self.min < self.max) {
            return bad(format!("{}: min must be < max", self.kind.column()));
        }
        if self.scale == AxisScale::Log && !(self.min > T::zero()) {
            return bad(format!("{}: log scale requires min > 0", self.kind.column()));
        }
        Ok(())
    }

    /// Grid values, endpoints included.
    pub fn values(&self) -> Vec<T> {
        if self.n_points == 1 {
            return vec![self.min];
        }
        let denom = T::lit((self.n_points - 1) as f64);
        (0..self.n_points)
            .map(|k| {
                let t = T::lit(k as f64) / denom;
                match self.scale {
                    AxisScale::Linear => self.min + (self.max - self.min) * t,
                    AxisScale::Log => {
                        (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp()
                    }
                }
            })
            .collect()
    }
}

/// What each row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `E_N` between two modes by position in the mode ordering
    /// (mechanical modes first within each system).
    Pair(usize, usize),
    /// Every pairwise `E_N`.
    AllPairs,
    /// Structure-shape label of the pairwise graph.
    Shape,
    /// Steady-state back-substitution residual.
    Residual,
}

/// Which pipeline a sweep drives at each grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget<T> {
    /// One cavity, 6x6 intracavity model, modes (m1, a1, a2).
    Single,
    /// One dual-polarization cavity, 10x10 model, modes (m1, a1..a4).
    DualPolarization,
    /// Beam-splitter chain; the report covers the optical modes only.
    Chain(ChainSpec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec<T> {
    pub name: String,
    pub base: SystemParams<T>,
    pub target: SweepTarget<T>,
    pub axes: Vec<Axis<T>>,
    pub observables: Vec<Observable>,
}

impl<T: Scalar> SweepSpec<T> {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(SweepError::AxisCount(self.axes.len()));
        }
        for axis in &self.axes {
            axis.validate()?;
            if matches!(axis.kind, AxisKind::Theta | AxisKind::Phi)
                && !matches!(self.target, SweepTarget::Chain(_))
            {
                return Err(SweepError::InvalidAxis(format!(
                    "{} axis needs a chain target",
                    axis.kind.column()
                )));
            }
        }
        Ok(())
    }

    /// Mode labels of the per-row report, fixed across the grid.
    pub fn labels(&self) -> Vec<String> {
        match &self.target {
            SweepTarget::Single => vec!["m1".into(), "a1".into(), "a2".into()],
            SweepTarget::DualPolarization => {
                let mut v = vec!["m1".to_string()];
                v.extend((1..=4).map(|i| format!("a{i}")));
                v
            }
            SweepTarget::Chain(chain) => {
                let per = match chain.kind {
                    ChainKind::TwoMode => 2,
                    ChainKind::FourMode => 4,
                };
                (1..=per * chain.n_systems).map(|i| format!("a{i}")).collect()
            }
        }
    }

    pub fn n_rows(&self) -> usize {
        self.axes.iter().map(|a| a.n_points).product()
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub axis_values: Vec<T>,
    pub stable: bool,
    /// Steady-state residual; absent when the point failed upstream.
    pub residual: Option<T>,
    /// Pairwise `E_N`; absent for unstable or failed points.
    pub pairwise: Option<Vec<Vec<T>>>,
    pub shape: Option<ShapeLabel>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata<T> {
    pub preset: String,
    /// Full resolved parameter snapshot (rad/s).
    pub params: SystemParams<T>,
    pub target: SweepTarget<T>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult<T> {
    pub metadata: SweepMetadata<T>,
    pub axes: Vec<Axis<T>>,
    pub observables: Vec<Observable>,
    pub labels: Vec<String>,
    pub rows: Vec<SweepRow<T>>,
}

fn evaluate_point<T: Scalar>(spec: &SweepSpec<T>, vals: &[T]) -> SweepRow<T> {
    let mut params = spec.base.normalized();
    let mut chain = match &spec.target {
        SweepTarget::Chain(c) => Some(c.clone()),
        _ => None,
    };
    let omega_m = T::pi() * constants::speed_of_light::<T>()
        / (T::lit(2.0) * params.cavity_length);
    for (axis, &x) in spec.axes.iter().zip(vals) {
        match axis.kind {
            AxisKind::Delta2OverOmegaM => params.detuning_2 = x * omega_m,
            AxisKind::Kappa => params.kappa.iter_mut().for_each(|k| *k = x),
            AxisKind::GammaM => params.gamma_m.iter_mut().for_each(|g| *g = x),
            AxisKind::Temperature => params.temperature = x,
            AxisKind::Theta => {
                if let Some(c) = &mut chain {
                    c.theta = vec![x];
                }
            }
            AxisKind::Phi => {
                if let Some(c) = &mut chain {
                    c.phi = vec![x];
                }
            }
        }
    }

    let outcome: Result<(CovarianceMatrix<T>, Option<T>), ChainError> = match &spec.target {
        SweepTarget::Single => (|| {
            let cavs = scheme_params(&params, Scheme::Single, 1)?;
            let ss = solve_self_consistent(&[cavs[0].dc.clone()], Scheme::Single)?;
            let model = build_single(&cavs[0].dc, &ss[0]);
            let cm = solve_lyapunov(&model)?;
            Ok((cm, Some(ss[0].residual)))
        })(),
        SweepTarget::DualPolarization => (|| {
            let cavs = scheme_params(&params, Scheme::DualPolarization, 1)?;
            let ss = solve_self_consistent(&[cavs[0].dc.clone()], Scheme::DualPolarization)?;
            let model = build_dual_polarization(&cavs[0].dc, &ss[0]);
            let cm = solve_lyapunov(&model)?;
            Ok((cm, Some(ss[0].residual)))
        })(),
        SweepTarget::Chain(_) => build_chain(&params, chain.as_ref().unwrap())
            .map(|cm| (optical_restriction(&cm), None)),
    };

    match outcome {
        Ok((cm, residual)) => {
            let pw = pairwise_matrix(&cm);
            let shape = classify_structure(&pw, &cm.ordering, T::lit(EDGE_THRESHOLD));
            let n = cm.n_modes();
            SweepRow {
                axis_values: vals.to_vec(),
                stable: true,
                residual,
                pairwise: Some(
                    (0..n).map(|i| (0..n).map(|j| pw[(i, j)]).collect()).collect(),
                ),
                shape: Some(shape),
                error: None,
            }
        }
        Err(ChainError::Lyapunov(LyapunovError::UnstableSystem { .. })) => SweepRow {
            axis_values: vals.to_vec(),
            stable: false,
            residual: None,
            pairwise: None,
            shape: None,
            error: None,
        },
        Err(e) => SweepRow {
            axis_values: vals.to_vec(),
            stable: false,
            residual: None,
            pairwise: None,
            shape: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs the sweep; rows are in row-major axis order (last axis fastest)
/// independent of how the work was scheduled.
pub fn run_sweep<T: Scalar + Send + Sync>(
    spec: &SweepSpec<T>,
) -> Result<SweepResult<T>, SweepError> {
    spec.validate()?;
    let grids: Vec<Vec<T>> = spec.axes.iter().map(Axis::values).collect();
    let total = spec.n_rows();
    let rows: Vec<SweepRow<T>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let vals: Vec<T> = match grids.len() {
                1 => vec![grids[0][flat]],
                _ => {
                    let n1 = grids[1].len();
                    vec![grids[0][flat / n1], grids[1][flat % n1]]
                }
            };
            evaluate_point(spec, &vals)
        })
        .collect();
    Ok(SweepResult {
        metadata: SweepMetadata {
            preset: spec.name.clone(),
            params: spec.base.normalized(),
            target: spec.target.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        axes: spec.axes.clone(),
        observables: spec.observables.clone(),
        labels: spec.labels(),
        rows,
    })
}

fn fmt<T: Scalar>(x: T) -> String {
    // shortest round-trip decimal
    format!("{}", x.to_f64().unwrap_or(f64::NAN))
}

impl<T: Scalar> SweepResult<T> {
    fn pair_columns(&self) -> Vec<(usize, usize)> {
        let n = self.labels.len();
        let mut cols = Vec::new();
        for obs in &self.observables {
            match obs {
                Observable::Pair(i, j) => cols.push((*i, *j)),
                Observable::AllPairs => {
                    for i in 0..n {
                        for j in (i + 1)..n {
                            cols.push((i, j));
                        }
                    }
                }
                _ => {}
            }
        }
        cols.dedup();
        cols
    }

    /// CSV rendering: axes, stability flag, requested observables, error
    /// column. Unstable/failed points leave their `E_N` cells empty.
    pub fn to_csv(&self) -> String {
        let pairs = self.pair_columns();
        let with_shape = self.observables.contains(&Observable::Shape);
        let with_residual = self.observables.contains(&Observable::Residual);

        let mut header: Vec<String> =
            self.axes.iter().map(|a| a.kind.column().to_string()).collect();
        header.push("stable".into());
        for &(i, j) in &pairs {
            header.push(format!("E_{}_{}", self.labels[i], self.labels[j]));
        }
        if with_shape {
            header.push("shape".into());
        }
        if with_residual {
            header.push("residual".into());
        }
        header.push("error".into());

        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = row.axis_values.iter().map(|&v| fmt(v)).collect();
            cells.push(row.stable.to_string());
            for &(i, j) in &pairs {
                cells.push(match &row.pairwise {
                    Some(pw) => fmt(pw[i][j]),
                    None => String::new(),
                });
            }
            if with_shape {
                cells.push(row.shape.map(|s| s.to_string()).unwrap_or_default());
            }
            if with_residual {
                cells.push(row.residual.map(fmt).unwrap_or_default());
            }
            cells.push(row.error.clone().unwrap_or_default());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

impl<T: Scalar + Serialize> SweepResult<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serialization cannot fail")
    }
}

/// A preset either configures a sweep or a one-shot chain build.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset<T> {
    Sweep(SweepSpec<T>),
    Chain(SystemParams<T>, ChainSpec<T>),
}

/// All preset names, including the non-sweep chain presets.
pub const ALL_PRESET_NAMES: [&str; 17] = [
    "fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4a", "fig4b",
    "fig5a", "fig5b", "fig7a", "fig7b", "fig7c", "fig9", "fig11", "fig13",
];

const E01: Observable = Observable::Pair(0, 1);
const E02: Observable = Observable::Pair(0, 2);
const E12: Observable = Observable::Pair(1, 2);

fn delta_axis<T: Scalar>(lo: f64, hi: f64, n: usize) -> Axis<T> {
    Axis::linear(AxisKind::Delta2OverOmegaM, lo, hi, n)
}

/// Figure-reproduction presets; axis ranges bracket the visible features
/// of each figure and are recorded in the result metadata.
pub fn preset<T: Scalar>(name: &str) -> Result<Preset<T>, SweepError> {
    let base: SystemParams<T> = SystemParams::default_set();
    // Fig. 3 fixes gamma_m = 0.01 MHz-unit; Fig. 7 states kappa = 100 gamma_m.
    let small_gamma = {
        let mut p = base.clone();
        p.gamma_m = vec![T::lit(1e4)];
        p
    };
    let sweep = |name: &str,
                 base: SystemParams<T>,
                 target: SweepTarget<T>,
                 axes: Vec<Axis<T>>,
                 observables: Vec<Observable>| {
        Ok(Preset::Sweep(SweepSpec {
            name: name.to_string(),
            base,
            target,
            axes,
            observables,
        }))
    };
    let chain2 = |theta: f64| ChainSpec {
        n_systems: 2,
        theta: vec![T::lit(theta)],
        phi: vec![T::lit(std::f64::consts::FRAC_PI_2)],
        line: Line::Lower,
        kind: ChainKind::TwoMode,
        io_mode: Default::default(),
    };
    let kappa_ax = Axis::log(AxisKind::Kappa, 1e5, 1e8, 101);
    let gamma_ax = Axis::log(AxisKind::GammaM, 1e3, 1e6, 101);
    let mech = vec![E01, E02, Observable::Residual];
    let opt = vec![E12, Observable::Residual];

    match name {
        "fig2" => sweep(
            name,
            base,
            SweepTarget::Single,
            vec![delta_axis(0.9, 1.5, 201)],
            vec![E01, E02, E12, Observable::Residual],
        ),
        "fig3a" => sweep(name, small_gamma, SweepTarget::Single, vec![kappa_ax, gamma_ax], mech),
        "fig3b" => sweep(
            name,
            small_gamma,
            SweepTarget::Single,
            vec![delta_axis(1.0, 1.3, 101), kappa_ax],
            mech,
        ),
        "fig3c" => sweep(
            name,
            small_gamma,
            SweepTarget::Single,
            vec![delta_axis(1.0, 1.3, 101), gamma_ax],
            mech,
        ),
        "fig3d" => sweep(name, small_gamma, SweepTarget::Single, vec![kappa_ax, gamma_ax], opt),
        "fig3e" => sweep(
            name,
            small_gamma,
            SweepTarget::Single,
            vec![kappa_ax, delta_axis(1.0, 1.3, 101)],
            opt,
        ),
        "fig3f" => sweep(
            name,
            small_gamma,
            SweepTarget::Single,
            vec![delta_axis(1.0, 1.3, 101), gamma_ax],
            opt,
        ),
        "fig4a" | "fig4b" => {
            let mut p = base;
            p.kappa = vec![T::lit(1e7), T::lit(1e7)];
            if name == "fig4b" {
                p.detuning_2 = p.detuning_2 * T::lit(1.005);
            }
            sweep(
                name,
                p,
                SweepTarget::Single,
                vec![Axis::log(AxisKind::GammaM, 1e3, 1e8, 201)],
                vec![E01, E02, Observable::Residual],
            )
        }
        "fig5a" => sweep(
            name,
            base,
            SweepTarget::Single,
            vec![Axis::log(AxisKind::Temperature, 1e-2, 1e3, 201)],
            vec![E01, E02],
        ),
        "fig5b" => sweep(
            name,
            base,
            SweepTarget::Single,
            vec![Axis::log(AxisKind::Temperature, 1e-2, 1e3, 201)],
            vec![E12],
        ),
        "fig7a" | "fig7b" | "fig7c" => {
            let theta = match name {
                "fig7a" => std::f64::consts::PI / 8.0,
                "fig7b" => std::f64::consts::FRAC_PI_4,
                _ => 3.0 * std::f64::consts::PI / 8.0,
            };
            sweep(
                name,
                small_gamma,
                SweepTarget::Chain(chain2(theta)),
                vec![Axis::linear(AxisKind::Phi, 0.0, std::f64::consts::PI, 201)],
                vec![Observable::AllPairs, Observable::Shape],
            )
        }
        "fig9" => Ok(Preset::Chain(
            small_gamma,
            ChainSpec { n_systems: 3, ..chain2(std::f64::consts::FRAC_PI_4) },
        )),
        "fig11" => sweep(
            name,
            base,
            SweepTarget::DualPolarization,
            vec![delta_axis(0.9, 1.5, 201)],
            vec![
                Observable::Pair(1, 2),
                Observable::Pair(3, 4),
                Observable::Pair(1, 4),
                Observable::Pair(2, 3),
                Observable::Pair(1, 3),
                Observable::Pair(2, 4),
                Observable::Residual,
            ],
        ),
        "fig13" => Ok(Preset::Chain(
            base,
            ChainSpec {
                n_systems: 3,
                kind: ChainKind::FourMode,
                ..chain2(std::f64::consts::FRAC_PI_4)
            },
        )),
        other => Err(SweepError::UnknownPreset(other.to_string())),
    }
}
