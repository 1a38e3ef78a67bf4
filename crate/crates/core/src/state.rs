//! Conserved states of the compressible Euler equations and the admissible set
//! of states with density and internal energy bounded below by `epsilon`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ideal-gas constant (air).
pub const DEFAULT_GAMMA_GAS: f64 = 1.4;

/// One cell's conserved variables `(rho, m, E)` in one or two space dimensions.
///
/// In 1D the second momentum slot is always zero and never exposed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedState {
    rho: f64,
    momentum: [f64; 2],
    energy: f64,
    dim: usize,
}

impl ConservedState {
    /// Builds a 1D state without validation.
    pub const fn one_d(rho: f64, m: f64, energy: f64) -> Self {
        Self { rho, momentum: [m, 0.0], energy, dim: 1 }
    }

    /// Builds a 2D state without validation.
    pub const fn two_d(rho: f64, m1: f64, m2: f64, energy: f64) -> Self {
        Self { rho, momentum: [m1, m2], energy, dim: 2 }
    }

    /// Builds a state from `[rho, m.., E]`, rejecting non-finite components.
    pub fn from_components(c: &[f64]) -> Result<Self> {
        let s = Self::from_components_unchecked(c)?;
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("state {c:?}")));
        }
        Ok(s)
    }

    pub(crate) fn from_components_unchecked(c: &[f64]) -> Result<Self> {
        match c.len() {
            3 => Ok(Self::one_d(c[0], c[1], c[2])),
            4 => Ok(Self::two_d(c[0], c[1], c[2], c[3])),
            n => Err(Error::InvalidArgument(format!(
                "a conserved state has 3 (1D) or 4 (2D) components, got {n}"
            ))),
        }
    }

    /// Builds a state from primitive variables `(rho, velocity, p)` for an ideal gas.
    pub fn from_primitive(rho: f64, velocity: &[f64], p: f64, gamma_gas: f64) -> Result<Self> {
        let kinetic = 0.5 * rho * velocity.iter().map(|u| u * u).sum::<f64>();
        let energy = p / (gamma_gas - 1.0) + kinetic;
        match velocity.len() {
            1 => Ok(Self::one_d(rho, rho * velocity[0], energy)),
            2 => Ok(Self::two_d(rho, rho * velocity[0], rho * velocity[1], energy)),
            n => Err(Error::DimensionMismatch { expected: 2, found: n }),
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn momentum(&self) -> &[f64] {
        &self.momentum[..self.dim]
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of conserved components, `2 + dim`.
    pub fn n_components(&self) -> usize {
        2 + self.dim
    }

    /// `|m|^2`.
    pub fn momentum_sq(&self) -> f64 {
        self.momentum().iter().map(|m| m * m).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.energy.is_finite() && self.momentum().iter().all(|m| m.is_finite())
    }

    /// Components in field column order `[rho, m.., E]`.
    pub fn components(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_components());
        out.push(self.rho);
        out.extend_from_slice(self.momentum());
        out.push(self.energy);
        out
    }

    /// Writes `[rho, m.., E]` into `out`, which must hold exactly `2 + dim` values.
    pub fn write_components(&self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_components());
        out[0] = self.rho;
        out[1..=self.dim].copy_from_slice(self.momentum());
        out[self.dim + 1] = self.energy;
    }

    /// Squared Euclidean distance between two states of the same dimension.
    pub fn distance_sq(&self, other: &Self) -> f64 {
        let dm: f64 = self
            .momentum()
            .iter()
            .zip(other.momentum())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (self.rho - other.rho).powi(2) + dm + (self.energy - other.energy).powi(2)
    }
}

/// Internal energy density `rho e = E - |m|^2 / (2 rho)`.
pub fn internal_energy(s: &ConservedState) -> Result<f64> {
    if s.rho == 0.0 {
        return Err(Error::DivisionByZero("internal energy of a state with zero density"));
    }
    Ok(s.energy - s.momentum_sq() / (2.0 * s.rho))
}

/// Ideal-gas pressure `(gamma - 1) rho e`.
pub fn pressure(s: &ConservedState, set: &AdmissibleSet) -> Result<f64> {
    if s.rho <= 0.0 {
        return Err(Error::InvalidArgument(format!("pressure needs positive density, got {}", s.rho)));
    }
    Ok((set.gamma_gas() - 1.0) * internal_energy(s)?)
}

/// Speed of sound `sqrt(gamma p / rho)` for a state with positive density and pressure.
pub fn sound_speed(s: &ConservedState, gamma_gas: f64) -> Result<f64> {
    if s.rho <= 0.0 {
        return Err(Error::InvalidArgument(format!("sound speed needs positive density, got {}", s.rho)));
    }
    let p = (gamma_gas - 1.0) * internal_energy(s)?;
    if p < 0.0 {
        return Err(Error::InvalidArgument(format!("sound speed needs non-negative pressure, got {p}")));
    }
    Ok((gamma_gas * p / s.rho).sqrt())
}

/// The numerical invariant domain `G^eps = { rho >= eps, rho e >= eps }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSet {
    epsilon: f64,
    gamma_gas: f64,
}

impl AdmissibleSet {
    pub fn new(epsilon: f64, gamma_gas: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !(gamma_gas > 1.0) || !gamma_gas.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma must be finite and > 1, got {gamma_gas}")));
        }
        Ok(Self { epsilon, gamma_gas })
    }

    /// Admissible set with the default `gamma = 1.4`.
    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, DEFAULT_GAMMA_GAS)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma_gas(&self) -> f64 {
        self.gamma_gas
    }

    /// Exact membership test. Uses `2 rho E - |m|^2 >= 2 rho eps` once `rho >= eps`
    /// holds, so no division is performed.
    pub fn contains(&self, s: &ConservedState) -> bool {
        self.contains_parts(s.rho, s.momentum_sq(), s.energy)
    }

    /// Membership test on `(rho, |m|^2, E)`.
    pub fn contains_parts(&self, rho: f64, momentum_sq: f64, energy: f64) -> bool {
        if !(rho >= self.epsilon) || rho <= 0.0 {
            return false;
        }
        2.0 * rho * energy - momentum_sq >= 2.0 * rho * self.epsilon
    }

    /// Membership test on a component row `[rho, m.., E]`.
    pub fn contains_row(&self, row: &[f64]) -> bool {
        let n = row.len();
        let msq: f64 = row[1..n - 1].iter().map(|m| m * m).sum();
        self.contains_parts(row[0], msq, row[n - 1])
    }

    /// Signed margin `min(rho - eps, rho e - eps)`; non-negative iff the state is admissible
    /// (up to rounding in the division). Returns `-inf` for non-positive density.
    pub fn margin(&self, s: &ConservedState) -> f64 {
        if s.rho <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let rho_e = s.energy - s.momentum_sq() / (2.0 * s.rho);
        (s.rho - self.epsilon).min(rho_e - self.epsilon)
    }
}
