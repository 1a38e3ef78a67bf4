//! Optimization-based invariant-domain-preserving limiters for cell averages of
//! the compressible Euler equations.
//!
//! The crate provides the admissible set `G^eps` of states with density and
//! internal energy at least `eps`, an exact projection onto it, proximal
//! operators, Douglas-Rachford and Davis-Yin splitting solvers for the
//! conservative l2/l1 limiters, and a small DG toolbox to attach limited
//! averages back to polynomials.

pub mod dg;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod limiters;
pub mod numerics;
pub mod projection;
pub mod prox;
pub mod solvers;
pub mod state;

pub use error::{Error, Result};
pub use field::{CellAverageField, ConservationTarget, FieldMetadata};
pub use projection::{project, project_1d, project_2d, CaseId, ProjectionCandidate};
pub use solvers::{SolveReport, SolverConfig};
pub use state::{internal_energy, pressure, sound_speed, AdmissibleSet, ConservedState};
