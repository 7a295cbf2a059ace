//! Steady-state Gaussian entanglement of double-longitudinal-mode cavity
//! optomechanical systems.
//!
//! The pipeline goes: physical parameters ([`model`]) -> classical working
//! point ([`steadystate`]) -> linearized drift/diffusion matrices
//! ([`dynamics`]) -> steady-state covariance matrix ([`lyapunov`]) ->
//! pairwise logarithmic negativity and structure graphs ([`entanglement`]).
//! [`network`] composes several cavities through beam splitters and
//! [`sweep`] drives parameter scans over the whole pipeline.
//!
//! All core math is generic over the scalar type via [`Scalar`]; the
//! concrete aliases at the crate root fix `f64`, which is what the CLI and
//! the test suite use.

pub mod config;
pub mod constants;
pub mod dynamics;
pub mod entanglement;
pub mod lyapunov;
pub mod model;
pub mod network;
pub mod steadystate;
pub mod sweep;
pub mod symplectic;

/// Scalar type the whole library is generic over: `f32`, `f64`, or any
/// other real field with `f64` literal conversion.
pub trait Scalar:
    nalgebra::RealField
    + num_traits::Num
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Copy
{
    /// Shorthand for embedding an `f64` literal into the scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable in scalar type")
    }

    fn maxv(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn minv(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: nalgebra::RealField
        + num_traits::Num
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + Copy
{
}

pub type SystemParams = model::SystemParams<f64>;
pub type DerivedConstants = model::DerivedConstants<f64>;
pub type SteadyState = steadystate::SteadyState<f64>;
pub type LinearModel = dynamics::LinearModel<f64>;
pub type CovarianceMatrix = lyapunov::CovarianceMatrix<f64>;
pub type EntanglementReport = entanglement::EntanglementReport<f64>;
pub type BeamSplitterSpec = network::BeamSplitterSpec<f64>;
pub type ChainSpec = network::ChainSpec<f64>;
pub type SweepSpec = sweep::SweepSpec<f64>;
pub type SweepResult = sweep::SweepResult<f64>;
