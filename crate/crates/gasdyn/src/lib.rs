//! Discontinuous Galerkin simulators for linear advection and the
//! compressible Euler equations, used to generate limiter test data and to
//! run the limiters inside time stepping.

pub mod benchmarks;
pub mod boundary;
pub mod config;
pub mod datasets;
pub mod error;
pub mod euler2d;
pub mod manufactured;
pub mod operator;
pub mod physics;
pub mod riemann;
pub mod time;

pub use boundary::{Boundaries, Boundary};
pub use error::{Result, SimError};
pub use operator::DgOperator;
pub use physics::{Advection, Euler, Physics};
pub use config::{BoundaryKind, SimConfig};
pub use euler2d::{EulerSimulation, RunStats, StepRecord};
