//! TOML run configuration for the CLI.
//!
//! Every key is optional and defaults to the documented Fig.-2-style
//! parameter set; unknown keys are a hard error. CLI flags override
//! config values.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::constants;
use crate::dynamics::IoMode;
use crate::model::{FrequencyUnit, Scheme, SystemParams};
use crate::network::{ChainKind, ChainSpec, Line};
use crate::sweep::{Axis, Observable, SweepSpec, SweepTarget};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    pub cavity_length: Option<f64>,
    pub effective_mass: Option<f64>,
    pub wavelength: Option<f64>,
    pub input_power: Option<f64>,
    pub temperature: Option<f64>,
    pub kappa: Option<Vec<f64>>,
    pub gamma_m: Option<Vec<f64>>,
    pub detuning_2: Option<f64>,
    /// Convenience alternative to `detuning_2`: the ratio to `omega_m`.
    pub detuning_2_over_omega_m: Option<f64>,
    pub frequency_unit: Option<FrequencyUnit>,
}

impl ParamsSection {
    pub fn resolve(&self) -> Result<SystemParams<f64>, ConfigError> {
        if self.detuning_2.is_some() && self.detuning_2_over_omega_m.is_some() {
            return Err(ConfigError::Invalid(
                "set detuning_2 or detuning_2_over_omega_m, not both".into(),
            ));
        }
        let mut p: SystemParams<f64> = SystemParams::default_set();
        if let Some(v) = self.cavity_length {
            p.cavity_length = v;
        }
        if let Some(v) = self.effective_mass {
            p.effective_mass = v;
        }
        if let Some(v) = self.wavelength {
            p.wavelength = v;
        }
        if let Some(v) = self.input_power {
            p.input_power = v;
        }
        if let Some(v) = self.temperature {
            p.temperature = v;
        }
        if let Some(v) = &self.kappa {
            p.kappa = v.clone();
        }
        if let Some(v) = &self.gamma_m {
            p.gamma_m = v.clone();
        }
        if let Some(v) = self.frequency_unit {
            p.frequency_unit = v;
        }
        // the default detuning is omega_m in rad/s; recompute it for the
        // resolved length and unit before any explicit override
        let omega_m = std::f64::consts::PI * constants::C / (2.0 * p.cavity_length);
        p.detuning_2 = match p.frequency_unit {
            FrequencyUnit::RadPerS => omega_m,
            FrequencyUnit::Hz => omega_m / (2.0 * std::f64::consts::PI),
        };
        if let Some(v) = self.detuning_2 {
            p.detuning_2 = v;
        }
        if let Some(r) = self.detuning_2_over_omega_m {
            p.detuning_2 = match p.frequency_unit {
                FrequencyUnit::RadPerS => r * omega_m,
                FrequencyUnit::Hz => r * omega_m / (2.0 * std::f64::consts::PI),
            };
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub n_systems: usize,
    #[serde(default = "default_theta")]
    pub theta: Vec<f64>,
    #[serde(default = "default_phi")]
    pub phi: Vec<f64>,
    #[serde(default)]
    pub line: Line,
    #[serde(default)]
    pub kind: ChainKind,
}

fn default_theta() -> Vec<f64> {
    vec![std::f64::consts::FRAC_PI_4]
}

fn default_phi() -> Vec<f64> {
    vec![0.0]
}

impl ChainSection {
    pub fn resolve(&self, io_mode: IoMode) -> ChainSpec<f64> {
        ChainSpec {
            n_systems: self.n_systems,
            theta: self.theta.clone(),
            phi: self.phi.clone(),
            line: self.line,
            kind: self.kind,
            io_mode,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// A named figure preset; overrides `axes` when set.
    pub preset: Option<String>,
    pub axes: Option<Vec<Axis<f64>>>,
    pub observables: Option<Vec<Observable>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
    Dot,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// The full run configuration; every section optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub scheme: Option<Scheme>,
    pub io_mode: Option<IoMode>,
    pub chain: Option<ChainSection>,
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme.unwrap_or(Scheme::Single)
    }

    pub fn io_mode(&self) -> IoMode {
        self.io_mode.unwrap_or_default()
    }

    /// A custom (non-preset) sweep defined directly in the config.
    pub fn custom_sweep(&self) -> Result<Option<SweepSpec<f64>>, ConfigError> {
        let Some(sweep) = &self.sweep else { return Ok(None) };
        if sweep.preset.is_some() {
            return Ok(None);
        }
        let Some(axes) = &sweep.axes else { return Ok(None) };
        let target = match (self.scheme(), &self.chain) {
            (_, Some(chain)) => SweepTarget::Chain(chain.resolve(self.io_mode())),
            (Scheme::DualPolarization, None) => SweepTarget::DualPolarization,
            (_, None) => SweepTarget::Single,
        };
        Ok(Some(SweepSpec {
            name: "custom".to_string(),
            base: self.params.resolve()?,
            target,
            axes: axes.clone(),
            observables: sweep
                .observables
                .clone()
                .unwrap_or_else(|| vec![Observable::AllPairs, Observable::Shape]),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_config_gives_documented_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        let p = cfg.params.resolve().unwrap();
        assert_eq!(p, SystemParams::default_set());
        assert_eq!(cfg.scheme(), Scheme::Single);
        assert_eq!(cfg.io_mode(), IoMode::Paper);
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        assert!(RunConfig::from_toml_str("[params]\nkapa = [1e6]\n").is_err());
        assert!(RunConfig::from_toml_str("frobnicate = 3\n").is_err());
        assert!(RunConfig::from_toml_str("[chain]\nn_systems = 2\ncolor = \"red\"").is_err());
    }

    #[test]
    fn detuning_ratio_resolves_against_omega_m() {
        let cfg = RunConfig::from_toml_str(
            "[params]\ndetuning_2_over_omega_m = 1.2\n",
        )
        .unwrap();
        let p = cfg.params.resolve().unwrap();
        let omega_m = std::f64::consts::PI * constants::C / 0.02;
        assert_relative_eq!(p.detuning_2, 1.2 * omega_m, max_relative = 1e-14);

        let both = RunConfig::from_toml_str(
            "[params]\ndetuning_2 = 1.0\ndetuning_2_over_omega_m = 1.2\n",
        )
        .unwrap();
        assert!(both.params.resolve().is_err());
    }

    #[test]
    fn default_detuning_tracks_cavity_length() {
        let cfg = RunConfig::from_toml_str("[params]\ncavity_length = 0.02\n").unwrap();
        let p = cfg.params.resolve().unwrap();
        let omega_m = std::f64::consts::PI * constants::C / 0.04;
        assert_relative_eq!(p.detuning_2, omega_m, max_relative = 1e-14);
    }

    #[test]
    fn chain_section_resolves() {
        let cfg = RunConfig::from_toml_str(
            "[chain]\nn_systems = 3\ntheta = [0.5]\nkind = \"four_mode\"\nline = \"lower\"\n",
        )
        .unwrap();
        let chain = cfg.chain.as_ref().unwrap().resolve(cfg.io_mode());
        assert_eq!(chain.n_systems, 3);
        assert_eq!(chain.kind, ChainKind::FourMode);
        assert_eq!(chain.line, Line::Lower);
        assert_eq!(chain.phi, vec![0.0]);
    }

    #[test]
    fn custom_sweep_from_config() {
        let cfg = RunConfig::from_toml_str(
            r#"
[sweep]
axes = [{ kind = "temperature", min = 0.01, max = 300.0, n_points = 11, scale = "log" }]
observables = [{ pair = [1, 2] }]
"#,
        )
        .unwrap();
        let spec = cfg.custom_sweep().unwrap().unwrap();
        assert_eq!(spec.axes.len(), 1);
        assert!(matches!(spec.target, SweepTarget::Single));
        assert_eq!(spec.observables, vec![Observable::Pair(1, 2)]);
    }

    #[test]
    fn preset_wins_over_axes() {
        let cfg = RunConfig::from_toml_str(
            r#"
[sweep]
preset = "fig2"
axes = [{ kind = "kappa", min = 1.0, max = 2.0, n_points = 3 }]
"#,
        )
        .unwrap();
        assert!(cfg.custom_sweep().unwrap().is_none());
        assert_eq!(cfg.sweep.unwrap().preset.unwrap(), "fig2");
    }
}
