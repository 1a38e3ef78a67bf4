//! Bound- and conservation-constrained limiting of a scalar field.

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::prox::{prox_conservation_in_place, shrinkage};

use super::{drs_solve, dys_solve_warm, SolveReport, SolverConfig};

/// Data of `min |x - u|` over `[m, big_m]^N` with `sum x = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarProblem<'a> {
    pub u: &'a [f64],
    pub m: f64,
    pub big_m: f64,
    pub b: f64,
}

impl<'a> ScalarProblem<'a> {
    /// Checks `m <= big_m` and `N m <= b <= N big_m` (up to rounding of the sums).
    pub fn new(u: &'a [f64], m: f64, big_m: f64, b: f64) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidArgument("empty data".into()));
        }
        if !(m <= big_m) {
            return Err(Error::InvalidArgument(format!("lower bound {m} exceeds upper bound {big_m}")));
        }
        let n = u.len() as f64;
        let slack = 1e-14 * n * (m.abs().max(big_m.abs()) + b.abs() / n);
        if b < n * m - slack || b > n * big_m + slack {
            return Err(Error::Infeasible(format!("total {b} outside [{}, {}]", n * m, n * big_m)));
        }
        Ok(Self { u, m, big_m, b })
    }

    pub fn l1_objective(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.u).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn l2_objective(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.u).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn clip_into(&self, z: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(z) {
            *o = v.clamp(self.m, self.big_m);
        }
    }
}

/// Unique l2 minimizer by DYS with step `gamma = 1/L = alpha`:
///
/// ```text
/// X½ = clip(Z),  Y = X½ - Z + u,  X = Y + (b - sum Y)/N,  Z+ = Z + X - X½
/// ```
///
/// from `Z0 = u`. With this step the iteration does not depend on `alpha`,
/// so `cfg.gamma_step` is ignored. Returns the box-feasible `X½`.
pub fn dys_l2_scalar(p: &ScalarProblem, cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    let mut z = p.u.to_vec();
    dys_l2_scalar_warm(p, p.u, &mut z, cfg, true)
}

/// DYS for `min |x - reference|^2` with the constraints of `p`, warm-started
/// from `z`.
pub(crate) fn dys_l2_scalar_warm(
    p: &ScalarProblem,
    reference: &[f64],
    z: &mut [f64],
    cfg: &SolverConfig,
    keep_history: bool,
) -> Result<(Vec<f64>, SolveReport)> {
    let cfg = SolverConfig { gamma_step: 1.0, ..*cfg };
    let mut clips = 0u64;
    let b = p.b;
    let (x, mut report) = dys_solve_warm(
        |x: &[f64], out: &mut [f64]| {
            out.copy_from_slice(x);
            prox_conservation_in_place(out, b);
            Ok(())
        },
        |z: &[f64], out: &mut [f64]| {
            clips += 1;
            p.clip_into(z, out);
            Ok(())
        },
        |x: &[f64], out: &mut [f64]| {
            for i in 0..x.len() {
                out[i] = x[i] - reference[i];
            }
            Ok(())
        },
        1.0,
        z,
        &cfg,
        keep_history,
    )?;
    report.projections = clips;
    report.conservation_residuals = vec![pairwise_sum(&x) - b];
    Ok((x, report))
}

/// An l1 minimizer by Douglas-Rachford with `g = |x - u|_1` and `h` the
/// indicator of both constraints. `prox_h` is the l2 problem solved by an
/// inner DYS (tolerance `cfg.tol`, warm-started across outer iterations).
/// Starts from `Y0 = u`, `X0 = prox_g(Y0) = u`.
pub fn drs_l1_scalar(p: &ScalarProblem, cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    let gamma = cfg.gamma_step;
    let inner_cfg = SolverConfig { max_iter: cfg.inner_max_iter, ..*cfg };
    let mut z = p.u.to_vec();
    let mut inner_iterations = 0u64;
    let mut clips = 0u64;
    let mut inner_failure = None;
    let u = p.u;
    let (x, mut report) = drs_solve(
        |x: &[f64], out: &mut [f64]| {
            for i in 0..x.len() {
                out[i] = u[i] + shrinkage(x[i] - u[i], gamma);
            }
            Ok(())
        },
        |y: &[f64], out: &mut [f64]| {
            let (x, rep) = dys_l2_scalar_warm(p, y, &mut z, &inner_cfg, false)?;
            inner_iterations += rep.iterations as u64;
            clips += rep.projections;
            if !rep.converged {
                inner_failure = Some(rep);
            }
            out.copy_from_slice(&x);
            Ok(())
        },
        p.u,
        Some(p.u.to_vec()),
        cfg,
    )?;
    if let Some(rep) = inner_failure {
        return Err(Error::NotConverged {
            iterations: rep.iterations,
            residual: rep.final_residual().unwrap_or(f64::NAN),
        });
    }
    report.projections = clips;
    report.inner_iterations = inner_iterations;
    report.conservation_residuals = vec![pairwise_sum(&x) - p.b];
    Ok((x, report))
}
