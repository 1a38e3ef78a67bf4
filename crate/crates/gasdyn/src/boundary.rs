//! Boundary conditions realized through ghost states on boundary faces.

use std::fmt;
use std::sync::Arc;

/// Exterior state prescribed at a boundary point `x` and time `t`.
pub type StateFn = Arc<dyn Fn([f64; 2], f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Boundary {
    Periodic,
    /// Mirrors the normal momentum.
    Reflective,
    /// Zero-order extrapolation of the interior trace.
    Outflow,
    /// Prescribed exterior state (inflow, exact solution).
    Dirichlet(StateFn),
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "Periodic",
            Boundary::Reflective => "Reflective",
            Boundary::Outflow => "Outflow",
            Boundary::Dirichlet(_) => "Dirichlet",
        })
    }
}

/// Conditions on the edges `x-`, `x+`, `y-`, `y+` (the last two unused in 1D).
#[derive(Clone, Debug)]
pub struct Boundaries(pub [Boundary; 4]);

impl Boundaries {
    pub fn periodic() -> Self {
        Self([Boundary::Periodic, Boundary::Periodic, Boundary::Periodic, Boundary::Periodic])
    }

    pub fn uniform(b: Boundary) -> Self {
        Self([b.clone(), b.clone(), b.clone(), b])
    }

    pub fn edge(&self, face: usize) -> &Boundary {
        &self.0[face]
    }

    /// Periodic edges must come in pairs.
    pub fn is_consistent(&self, dim: usize) -> bool {
        (0..dim).all(|a| {
            let (lo, hi) = (&self.0[2 * a], &self.0[2 * a + 1]);
            matches!(lo, Boundary::Periodic) == matches!(hi, Boundary::Periodic)
        })
    }
}
