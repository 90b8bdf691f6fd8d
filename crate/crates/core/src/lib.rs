//! Random quantum reactive harmonic oscillator.
//!
//! An oscillator whose frequency carries a white-noise component is studied
//! through several independent numerical routes: Langevin path ensembles,
//! a Fokker-Planck solver, closed-form stationary laws built on Airy
//! functions, stochastic wave functionals, vacuum-vacuum transition
//! probabilities and vacuum thermodynamics.
//!
//! The closed-form layer is generic over the scalar type (see [`Real`]);
//! the simulation layer works in `f64`. The aliases at the crate root fix
//! the scalar to `f64` for callers that do not care.

pub mod cli;
pub mod error;
pub mod fokker_planck;
pub mod langevin;
pub mod model;
pub mod numerics;
pub mod scalar;
pub mod scattering;
pub mod stationary;
pub mod thermo;
pub mod wavefunction;

pub use error::{Error, Result};
pub use scalar::Real;

/// Physical parameters in `f64`.
pub type ModelParams = model::ModelParams<f64>;
/// Frequency profile in `f64`.
pub type BarrierProfile = model::BarrierProfile<f64>;
/// Airy quadruple in `f64`.
pub type AiryValues = numerics::airy::AiryValues<f64>;
/// Stationary law sampled on a grid, in `f64`.
pub type StationaryDistribution = stationary::StationaryDistribution<f64>;
