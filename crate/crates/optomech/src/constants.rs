//! Physical constants, CODATA values to 9 significant digits.
//!
//! Single source of truth: everything downstream (derived constants,
//! tests, presets) pulls from here.

use crate::Scalar;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.05457182e-34;
/// Boltzmann constant, J/K (exact since the 2019 SI redefinition).
pub const K_B: f64 = 1.38064900e-23;
/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 2.99792458e8;

pub fn hbar<T: Scalar>() -> T {
    T::lit(HBAR)
}

pub fn k_b<T: Scalar>() -> T {
    T::lit(K_B)
}

pub fn speed_of_light<T: Scalar>() -> T {
    T::lit(C)
}
