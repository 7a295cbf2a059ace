//! Physical parameters, unit conventions, and derived constants.
//!
//! A [`SystemParams`] holds user-facing inputs (geometry, mass, drive,
//! decays, temperature, detuning of the upper mode). [`derive_constants`]
//! turns them into the quantities the linearized dynamics is written in:
//! mechanical frequency `omega_m = pi c / (2 L)` (half the free spectral
//! range), optical frequencies, single-photon coupling `g0`, drive
//! strengths `eta_j`, thermal occupation `nbar`, and the detunings
//! `Delta_j = omega_j - omega_L` with `Delta_1 = Delta_2 - 2 omega_m`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants;
use crate::Scalar;

/// Whether user-supplied rates (`kappa`, `gamma_m`, `detuning_2`) are
/// already angular (rad/s) or ordinary frequencies (Hz, multiplied by
/// 2 pi on ingest).
///
/// Figure captions quote values like "kappa = 1 MHz" without resolving
/// the 2 pi ambiguity; the default reads them as 1e6 rad/s and this
/// switch documents the alternative instead of resolving it silently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyUnit {
    #[default]
    RadPerS,
    Hz,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("non-physical parameter {field}: {value}")]
    NonPhysicalParameter { field: &'static str, value: f64 },
    #[error("scheme {scheme:?} is incompatible with n_cavities = {n_cavities}")]
    SchemeMismatch { scheme: Scheme, n_cavities: usize },
}

/// Physical inputs for one double-longitudinal-mode cavity.
///
/// All stored rates are in rad/s once [`SystemParams::normalized`] has
/// run; `frequency_unit` records the unit the values are currently
/// expressed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// Cavity length L, meters.
    pub cavity_length: T,
    /// Effective mass of the mechanical oscillator, kilograms.
    pub effective_mass: T,
    /// Wavelength of cavity mode 1 (the lower longitudinal mode), meters.
    pub wavelength: T,
    /// Input laser power P, watts.
    pub input_power: T,
    /// Bath temperature, kelvin.
    pub temperature: T,
    /// Cavity amplitude decay rates, one per cavity mode.
    pub kappa: Vec<T>,
    /// Mechanical decay rates, one per mechanical mode.
    pub gamma_m: Vec<T>,
    /// Detuning of the upper mode, `Delta_2`; `Delta_1` is derived.
    pub detuning_2: T,
    pub frequency_unit: FrequencyUnit,
}

impl<T: Scalar> SystemParams<T> {
    /// The Fig. 2 caption parameter set, the documented default.
    pub fn default_set() -> Self {
        let omega_m = T::lit(std::f64::consts::PI) * constants::speed_of_light::<T>()
            / T::lit(0.02);
        SystemParams {
            cavity_length: T::lit(0.01),
            effective_mass: T::lit(5e-9),
            wavelength: T::lit(1.33e-6),
            input_power: T::lit(20e-3),
            temperature: T::lit(0.01),
            kappa: vec![T::lit(1e6), T::lit(1e6)],
            gamma_m: vec![T::lit(0.1e6)],
            detuning_2: omega_m,
            frequency_unit: FrequencyUnit::RadPerS,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &'static str, value: T| ModelError::NonPhysicalParameter {
            field,
            value: value.to_f64().unwrap_or(f64::NAN),
        };
        if !(self.cavity_length > T::zero()) {
            return Err(bad("cavity_length", self.cavity_length));
        }
        if !(self.effective_mass > T::zero()) {
            return Err(bad("effective_mass", self.effective_mass));
        }
        if !(self.wavelength > T::zero()) {
            return Err(bad("wavelength", self.wavelength));
        }
        if !(self.input_power >= T::zero()) {
            return Err(bad("input_power", self.input_power));
        }
        if !(self.temperature >= T::zero()) {
            return Err(bad("temperature", self.temperature));
        }
        if self.kappa.is_empty() {
            return Err(bad("kappa", T::zero()));
        }
        for &k in &self.kappa {
            if !(k > T::zero()) {
                return Err(bad("kappa", k));
            }
        }
        if self.gamma_m.is_empty() {
            return Err(bad("gamma_m", T::zero()));
        }
        for &g in &self.gamma_m {
            if !(g > T::zero()) {
                return Err(bad("gamma_m", g));
            }
        }
        Ok(())
    }

    /// Returns the same parameters with every rate expressed in rad/s.
    pub fn normalized(&self) -> Self {
        self.in_unit(FrequencyUnit::RadPerS)
    }

    /// Re-expresses the rate-like fields in the requested unit.
    pub fn in_unit(&self, unit: FrequencyUnit) -> Self {
        if unit == self.frequency_unit {
            return self.clone();
        }
        let two_pi = T::two_pi();
        let f = match (self.frequency_unit, unit) {
            (FrequencyUnit::Hz, FrequencyUnit::RadPerS) => two_pi,
            (FrequencyUnit::RadPerS, FrequencyUnit::Hz) => T::one() / two_pi,
            _ => unreachable!(),
        };
        SystemParams {
            kappa: self.kappa.iter().map(|&k| k * f).collect(),
            gamma_m: self.gamma_m.iter().map(|&g| g * f).collect(),
            detuning_2: self.detuning_2 * f,
            frequency_unit: unit,
            ..self.clone()
        }
    }
}

/// All derived constants, in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants<T> {
    pub omega_m: T,
    /// Optical angular frequencies, one per cavity mode.
    pub omega: Vec<T>,
    /// Single-photon optomechanical coupling.
    pub g0: T,
    /// Drive strengths, one per cavity mode.
    pub eta: Vec<T>,
    /// Mean thermal phonon number of the mechanical bath.
    pub nbar: T,
    /// Detunings `Delta_j = omega_j - omega_L`.
    pub delta: Vec<T>,
    /// Cavity decay rates, one per cavity mode (carried along for the
    /// downstream matrix builders).
    pub kappa: Vec<T>,
    /// Mechanical decay rates, one per mechanical mode.
    pub gamma_m: Vec<T>,
}

impl<T: Scalar> DerivedConstants<T> {
    pub fn n_optical(&self) -> usize {
        self.omega.len()
    }

    pub fn n_mechanical(&self) -> usize {
        self.gamma_m.len()
    }
}

/// Bose occupation `1/(exp(x) - 1)` with a series fallback for small `x`
/// and the `T -> 0` limit mapped to zero.
fn bose_occupation<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < T::lit(1e-5) {
        // 1/(e^x - 1) = 1/x - 1/2 + x/12 + O(x^3)
        return T::one() / x - T::lit(0.5) + x / T::lit(12.0);
    }
    // large x overflows exp to +inf, and 1/inf = 0 is the right limit
    T::one() / (x.exp() - T::one())
}

/// Computes all derived constants of the two-mode cavity.
pub fn derive_constants<T: Scalar>(
    params: &SystemParams<T>,
) -> Result<DerivedConstants<T>, ModelError> {
    params.validate()?;
    let p = params.normalized();

    let c = constants::speed_of_light::<T>();
    let hbar = constants::hbar::<T>();
    let kb = constants::k_b::<T>();
    let pi = T::pi();

    // omega_m is half the free spectral range pi c / L.
    let omega_m = pi * c / (T::lit(2.0) * p.cavity_length);
    let omega_1 = T::two_pi() * c / p.wavelength;
    let omega_2 = omega_1 + T::lit(2.0) * omega_m;
    let omega = vec![omega_1, omega_2];

    let g0 = (hbar * omega_1 * omega_2 / (p.effective_mass * omega_m)).sqrt()
        / p.cavity_length;

    let eta: Vec<T> = omega
        .iter()
        .zip(&p.kappa)
        .map(|(&w, &k)| (T::lit(2.0) * p.input_power * k / (hbar * w)).sqrt())
        .collect();

    let nbar = if p.temperature > T::zero() {
        bose_occupation(hbar * omega_m / (kb * p.temperature))
    } else {
        T::zero()
    };

    let delta_2 = p.detuning_2;
    let delta_1 = delta_2 - T::lit(2.0) * omega_m;

    Ok(DerivedConstants {
        omega_m,
        omega,
        g0,
        eta,
        nbar,
        delta: vec![delta_1, delta_2],
        kappa: p.kappa.clone(),
        gamma_m: p.gamma_m.clone(),
    })
}

/// The three configurations the artifact models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One cavity, two longitudinal modes (Fig. 2-5).
    Single,
    /// Two identical cavities whose outputs meet on a beam splitter
    /// (Fig. 6/7).
    TwoCavityBs,
    /// One cavity, two polarizations, four optical modes sharing the
    /// mechanical mode (Fig. 10/11).
    DualPolarization,
}

/// One cavity of a scheme: its parameters plus derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityModel<T> {
    pub params: SystemParams<T>,
    pub dc: DerivedConstants<T>,
}

/// Replicates the base parameters over the cavities of a scheme.
///
/// All replicated cavities share `omega_m`, `g0`, `kappa`, `gamma_m`; for
/// `TwoCavityBs` the second cavity's mode frequencies pair as
/// `omega_1 = omega_3`, `omega_2 = omega_4`. `DualPolarization` yields a
/// single cavity carrying four optical modes (H and V copies of the two
/// longitudinal modes) and one shared mechanical mode.
pub fn scheme_params<T: Scalar>(
    params: &SystemParams<T>,
    scheme: Scheme,
    n_cavities: usize,
) -> Result<Vec<CavityModel<T>>, ModelError> {
    let compatible = match scheme {
        Scheme::Single => n_cavities == 1,
        Scheme::TwoCavityBs | Scheme::DualPolarization => n_cavities >= 1,
    };
    if !compatible {
        return Err(ModelError::SchemeMismatch { scheme, n_cavities });
    }
    let dc = derive_constants(params)?;
    match scheme {
        Scheme::Single | Scheme::TwoCavityBs => Ok((0..n_cavities)
            .map(|_| CavityModel {
                params: params.normalized(),
                dc: dc.clone(),
            })
            .collect()),
        Scheme::DualPolarization => {
            // Four optical modes: (1, 2) in H, their same-frequency copies
            // (3, 4) in V, driven by an orthogonally polarized pump of the
            // same power.
            let dup = |v: &Vec<T>| {
                let mut out = v.clone();
                out.extend(v.iter().copied());
                out
            };
            let dc4 = DerivedConstants {
                omega: dup(&dc.omega),
                eta: dup(&dc.eta),
                delta: dup(&dc.delta),
                kappa: dup(&dc.kappa),
                ..dc
            };
            Ok((0..n_cavities)
                .map(|_| CavityModel {
                    params: params.normalized(),
                    dc: dc4.clone(),
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2() -> SystemParams<f64> {
        SystemParams::default_set()
    }

    #[test]
    fn omega_m_is_half_fsr() {
        let dc = derive_constants(&fig2()).unwrap();
        let expect = std::f64::consts::PI * constants::C / 0.02;
        assert_relative_eq!(dc.omega_m, expect, max_relative = 1e-15);
        // caption-scale sanity (the spec rounds with c = 3e8)
        assert_relative_eq!(dc.omega_m, 4.7124e10, max_relative = 2e-3);
    }

    #[test]
    fn mode_spacing_and_detuning() {
        let dc = derive_constants(&fig2()).unwrap();
        assert_relative_eq!(
            dc.omega[1] - dc.omega[0],
            2.0 * dc.omega_m,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            dc.delta[0],
            dc.delta[1] - 2.0 * dc.omega_m,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_power_zero_drive() {
        let mut p = fig2();
        p.input_power = 0.0;
        let dc = derive_constants(&p).unwrap();
        assert!(dc.eta.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn nbar_cold_limit() {
        let dc = derive_constants(&fig2()).unwrap();
        assert!(dc.nbar < 1e-10, "nbar = {}", dc.nbar);
        let mut p = fig2();
        p.temperature = 0.0;
        assert_eq!(derive_constants(&p).unwrap().nbar, 0.0);
    }

    #[test]
    fn nbar_monotone_in_temperature() {
        let mut last = 0.0;
        for t in [0.5, 1.0, 10.0, 100.0, 300.0] {
            let mut p = fig2();
            p.temperature = t;
            let nbar = derive_constants(&p).unwrap().nbar;
            assert!(nbar > last, "nbar not increasing at T = {t}");
            last = nbar;
        }
    }

    #[test]
    fn g0_mass_scaling() {
        let dc1 = derive_constants(&fig2()).unwrap();
        let mut p = fig2();
        p.effective_mass *= 2.0;
        let dc2 = derive_constants(&p).unwrap();
        assert_relative_eq!(
            dc2.g0,
            dc1.g0 / 2.0f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn hz_ingest_round_trip() {
        let mut p = fig2();
        p.frequency_unit = FrequencyUnit::Hz;
        let si = p.normalized();
        assert_relative_eq!(si.kappa[0], 2.0 * std::f64::consts::PI * 1e6);
        let back = si.in_unit(FrequencyUnit::Hz);
        assert_relative_eq!(back.kappa[0], p.kappa[0], max_relative = 1e-12);
        assert_relative_eq!(back.detuning_2, p.detuning_2, max_relative = 1e-12);
    }

    #[test]
    fn invariant_violations_report_field() {
        let mut p = fig2();
        p.effective_mass = -1.0;
        match derive_constants(&p) {
            Err(ModelError::NonPhysicalParameter { field, .. }) => {
                assert_eq!(field, "effective_mass")
            }
            other => panic!("expected NonPhysicalParameter, got {other:?}"),
        }
    }

    #[test]
    fn scheme_replication() {
        let p = fig2();
        let single = scheme_params(&p, Scheme::Single, 1).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].dc.n_optical(), 2);

        assert!(matches!(
            scheme_params(&p, Scheme::Single, 2),
            Err(ModelError::SchemeMismatch { .. })
        ));

        let two = scheme_params(&p, Scheme::TwoCavityBs, 2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].dc.omega, two[1].dc.omega); // omega_1 = omega_3, omega_2 = omega_4

        let dual = scheme_params(&p, Scheme::DualPolarization, 1).unwrap();
        assert_eq!(dual.len(), 1);
        assert_eq!(dual[0].dc.n_optical(), 4);
        assert_eq!(dual[0].dc.omega[0], dual[0].dc.omega[2]);
        assert_eq!(dual[0].dc.omega[1], dual[0].dc.omega[3]);
        assert_eq!(dual[0].dc.n_mechanical(), 1);
    }

    #[test]
    fn generic_over_f32() {
        let p: SystemParams<f32> = SystemParams::default_set();
        let dc = derive_constants(&p).unwrap();
        assert!(dc.omega_m > 4.70e10 && dc.omega_m < 4.72e10);
    }
}
