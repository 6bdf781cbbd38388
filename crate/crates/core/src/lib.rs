//! Collective spontaneous emission of identical two-level atoms coupled to a
//! photon-free vacuum, including the Stark (counting-process) interaction.
//!
//! The crate is organised bottom-up:
//!
//! * [`dicke`] builds the maximal-spin multiplet `|r, m>` and the collective
//!   operators `R3`, `R+`, `R-`.
//! * [`nl_factors`] evaluates the scalar non-Langevin factors with safe
//!   handling of their removable singularities.
//! * [`ito`] is a small symbolic quantum-Ito algebra used to derive the
//!   evolution-increment coefficients and the master-equation generator.
//! * [`master`] assembles the Lindblad generator and the diagonal rate
//!   equations and integrates them.
//! * [`jumps`] is a Monte Carlo wavefunction unraveling of the same generator.
//! * [`analysis`] computes critical thresholds, emission intensity and pulse
//!   metrics.

pub mod analysis;
pub mod dicke;
pub mod error;
pub mod ito;
pub mod jumps;
pub mod master;
pub mod nl_factors;
pub mod ode;
pub mod params;
pub mod state;

pub use analysis::{CriticalReport, PulseSummary};
pub use dicke::{DickeBasis, Operator};
pub use error::{Error, Result};
pub use ito::{CoefficientSet, IncrementSymbol, ItoExpression};
pub use jumps::{JumpConfig, JumpRecord};
pub use master::MasterGenerator;
pub use ode::{IntegratorConfig, Method};
pub use params::EnsembleParams;
pub use state::{DensityMatrix, DiagonalState, Trajectory};

/// Complex scalar used for all operator entries.
pub type C64 = num_complex::Complex64;
