//! Explicit Runge-Kutta steppers with a hook after every stage.
//!
//! States are plain coefficient vectors. The hook sees every stage value
//! (including the new step value) and may modify it, which is where the
//! positivity pipeline runs.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScheme {
    /// Three-stage third-order strong-stability-preserving scheme.
    SspRk3,
    /// Classical four-stage fourth-order scheme.
    Rk4,
}

impl TimeScheme {
    pub fn n_stages(self) -> usize {
        match self {
            TimeScheme::SspRk3 => 3,
            TimeScheme::Rk4 => 4,
        }
    }
}

/// Right-hand side `L(u, t)` written into the last argument.
pub trait Rhs: FnMut(&[f64], f64, &mut [f64]) -> Result<()> {}
impl<T: FnMut(&[f64], f64, &mut [f64]) -> Result<()>> Rhs for T {}

/// Stage hook: `(stage, state)`, stages numbered from 1.
pub trait StageHook: FnMut(usize, &mut Vec<f64>) -> Result<()> {}
impl<T: FnMut(usize, &mut Vec<f64>) -> Result<()>> StageHook for T {}

pub fn step(scheme: TimeScheme, u: &mut Vec<f64>, t: f64, dt: f64, rhs: &mut impl Rhs, hook: &mut impl StageHook) -> Result<()> {
    match scheme {
        TimeScheme::SspRk3 => ssprk3_step(u, t, dt, rhs, hook),
        TimeScheme::Rk4 => rk4_step(u, t, dt, rhs, hook),
    }
}

/// ```text
/// U1 = U + dt L(U)
/// U2 = 3/4 U + 1/4 (U1 + dt L(U1))
/// U+ = 1/3 U + 2/3 (U2 + dt L(U2))
/// ```
pub fn ssprk3_step(u: &mut Vec<f64>, t: f64, dt: f64, rhs: &mut impl Rhs, hook: &mut impl StageHook) -> Result<()> {
    let n = u.len();
    let mut l = vec![0.0; n];
    rhs(u, t, &mut l)?;
    let mut u1: Vec<f64> = (0..n).map(|i| u[i] + dt * l[i]).collect();
    hook(1, &mut u1)?;
    rhs(&u1, t + dt, &mut l)?;
    let mut u2: Vec<f64> = (0..n).map(|i| 0.75 * u[i] + 0.25 * (u1[i] + dt * l[i])).collect();
    hook(2, &mut u2)?;
    rhs(&u2, t + 0.5 * dt, &mut l)?;
    for i in 0..n {
        u[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * l[i]);
    }
    hook(3, u)
}

/// Classical RK4 in stage-value form:
///
/// ```text
/// U1 = U + dt/2 L(U),  U2 = U + dt/2 L(U1),  U3 = U + dt L(U2)
/// U+ = (-U + U1 + 2 U2 + U3)/3 + dt/6 L(U3)
/// ```
pub fn rk4_step(u: &mut Vec<f64>, t: f64, dt: f64, rhs: &mut impl Rhs, hook: &mut impl StageHook) -> Result<()> {
    let n = u.len();
    let mut l = vec![0.0; n];
    rhs(u, t, &mut l)?;
    let mut u1: Vec<f64> = (0..n).map(|i| u[i] + 0.5 * dt * l[i]).collect();
    hook(1, &mut u1)?;
    rhs(&u1, t + 0.5 * dt, &mut l)?;
    let mut u2: Vec<f64> = (0..n).map(|i| u[i] + 0.5 * dt * l[i]).collect();
    hook(2, &mut u2)?;
    rhs(&u2, t + 0.5 * dt, &mut l)?;
    let mut u3: Vec<f64> = (0..n).map(|i| u[i] + dt * l[i]).collect();
    hook(3, &mut u3)?;
    rhs(&u3, t + dt, &mut l)?;
    for i in 0..n {
        u[i] = (-u[i] + u1[i] + 2.0 * u2[i] + u3[i]) / 3.0 + dt / 6.0 * l[i];
    }
    hook(4, u)
}

/// A hook that does nothing.
pub fn no_hook(_: usize, _: &mut Vec<f64>) -> Result<()> {
    Ok(())
}
