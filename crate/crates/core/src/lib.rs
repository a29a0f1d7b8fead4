//! Open-system dynamics of a harmonically trapped or free reduced mass coupled to the
//! gravitational vacuum, for both the coordinate separation x̂ and the geodesic separation ξ̂.
//!
//! All dynamics run in ω units (time 1/ω, rates ω). The harmonic core is generic over
//! [`Real`]; the aliases below fix it to `f64`.

pub mod analysis;
pub mod coeffs;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod freepart;
pub mod generators;
pub mod params;
pub mod perturb;
pub mod quad;
pub mod scalar;
pub mod validity;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type C64 = Cx<f64>;
pub type CMatrix64 = fock::CMatrix<f64>;
pub type DimensionlessParams64 = params::DimensionlessParams<f64>;
pub type VacuumCoefficients64 = coeffs::VacuumCoefficients<f64>;
pub type FockOperator64 = fock::FockOperator<f64>;
pub type DensityMatrix64 = fock::DensityMatrix<f64>;
pub type Liouvillian64 = generators::Liouvillian<f64>;
pub type MomentTable64 = freepart::MomentTable<f64>;
pub type SpectralLadder64 = analysis::SpectralLadder<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
