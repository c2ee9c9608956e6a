//! Steering toolkit for two-qubit states under projective measurements.
//!
//! - [`pauli`]: qubit and two-qubit operator algebra.
//! - [`state`]: the state family `ρ_AB(α)`, assemblages and correlation tables.
//! - [`lhs`]: the explicit Bob→Alice local-hidden-state model, with quadrature
//!   and Monte Carlo checks.
//! - [`feasibility`]: the cone program deciding whether an assemblage admits a
//!   local-hidden-state decomposition, the α* maximization and dual steering
//!   inequalities.
//! - [`optimizer`]: hill-climbing over Alice's measurement directions.

pub mod error;
pub mod feasibility;
pub mod io;
pub mod lhs;
pub mod optimizer;
pub mod pauli;
pub mod rng;
pub mod state;

pub use error::{Result, SteerError};
pub use pauli::{BlochVector, Outcome, Party, QubitOperator, TwoQubitOperator};
pub use state::{Assemblage, CorrelationTable, MeasurementSet, TwoQubitState};
