//! Douglas-Rachford and Davis-Yin fixed-point iterations and their limiter
//! instantiations.

mod euler;
mod scalar;
mod tune;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use euler::{drs_l1_euler, drs_l2_euler, dys_l2_euler, euler_feasible, EulerProblem};
pub use scalar::{drs_l1_scalar, dys_l2_scalar, ScalarProblem};
pub use tune::{tune_gamma, TuneOutcome};

/// Iteration parameters shared by all solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Splitting step size `gamma`.
    pub gamma_step: f64,
    /// DRS relaxation `lambda`.
    pub lambda_relax: f64,
    /// Stopping tolerance on the scaled fixed-point residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Cap for the inner DYS solve of nested schemes.
    pub inner_max_iter: usize,
    pub h_mesh: f64,
    pub dim: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma_step: 1.0,
            lambda_relax: 1.0,
            tol: 1e-13,
            max_iter: 10_000,
            inner_max_iter: 10_000,
            h_mesh: 1.0,
            dim: 1,
        }
    }
}

impl SolverConfig {
    pub fn new(gamma_step: f64, tol: f64, h_mesh: f64, dim: usize) -> Self {
        Self { gamma_step, tol, h_mesh, dim, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} = {v} is out of range")));
        if !(self.gamma_step > 0.0 && self.gamma_step.is_finite()) {
            return bad("gamma", self.gamma_step);
        }
        if !(self.lambda_relax > 0.0 && self.lambda_relax < 2.0) {
            return bad("lambda", self.lambda_relax);
        }
        if !(self.tol > 0.0) {
            return bad("tol", self.tol);
        }
        if !(self.h_mesh > 0.0) {
            return bad("h", self.h_mesh);
        }
        if self.max_iter == 0 || self.inner_max_iter == 0 {
            return Err(Error::InvalidArgument("iteration caps must be positive".into()));
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        Ok(())
    }

    /// `h^{d/2}`, the factor turning `|.|_2` into the mesh norm `|.|_{2h}`.
    pub fn norm_scale(&self) -> f64 {
        self.h_mesh.powf(self.dim as f64 / 2.0)
    }

    fn mesh_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm_scale() * crate::numerics::dist2(a, b)
    }
}

/// Outcome of one solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Evaluations of the prox of the pointwise constraint (box or `G^eps`).
    pub projections: u64,
    /// Single-cell projections onto `G^eps` (`projections` times the cell count).
    pub row_projections: u64,
    /// Total inner DYS iterations of nested schemes.
    pub inner_iterations: u64,
    pub converged: bool,
    pub residuals: Vec<f64>,
    pub gamma: f64,
    pub lambda: f64,
    pub tol: f64,
    pub fallback_events: u64,
    /// `sum X - b` per conserved component for the returned iterate.
    pub conservation_residuals: Vec<f64>,
    pub wall_time_s: f64,
}

impl SolveReport {
    fn start(cfg: &SolverConfig) -> Self {
        Self { gamma: cfg.gamma_step, lambda: cfg.lambda_relax, tol: cfg.tol, ..Self::default() }
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// In-place prox: writes `prox(input)` into `out`.
pub trait Prox: FnMut(&[f64], &mut [f64]) -> Result<()> {}
impl<T: FnMut(&[f64], &mut [f64]) -> Result<()>> Prox for T {}

/// Generalized Douglas-Rachford iteration
///
/// ```text
/// Y+ = lambda prox_g(2X - Y) + Y - lambda X,   X+ = prox_h(Y+)
/// ```
///
/// started from `y0` and `X0 = x0`, or `X0 = prox_h(y0)` when `x0` is `None`.
/// Stops once `|Y+ - Y|_{2h} < tol` and returns the last `X`. When `x0` is
/// supplied the first update compares against an `X0` that is not
/// `prox_h(y0)`, so its residual is recorded but never accepted as
/// convergence.
pub fn drs_solve<G: Prox, H: Prox>(
    mut prox_g: G,
    mut prox_h: H,
    y0: &[f64],
    x0: Option<Vec<f64>>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let clock = Instant::now();
    let mut report = SolveReport::start(cfg);
    let n = y0.len();
    let lambda = cfg.lambda_relax;
    let mut y = y0.to_vec();
    let explicit_start = x0.is_some();
    let mut x = match x0 {
        Some(x) if x.len() == n => x,
        Some(x) => return Err(Error::DimensionMismatch { expected: n, found: x.len() }),
        None => {
            let mut x = vec![0.0; n];
            prox_h(&y, &mut x)?;
            x
        }
    };
    let mut reflected = vec![0.0; n];
    let mut pg = vec![0.0; n];
    let mut y_next = vec![0.0; n];
    for k in 0..cfg.max_iter {
        for i in 0..n {
            reflected[i] = 2.0 * x[i] - y[i];
        }
        prox_g(&reflected, &mut pg)?;
        for i in 0..n {
            y_next[i] = lambda * pg[i] + y[i] - lambda * x[i];
        }
        let res = cfg.mesh_dist(&y_next, &y);
        check_finite(res, k)?;
        std::mem::swap(&mut y, &mut y_next);
        prox_h(&y, &mut x)?;
        report.residuals.push(res);
        report.iterations = k + 1;
        if res < cfg.tol && !(explicit_start && k == 0) {
            report.converged = true;
            break;
        }
    }
    report.wall_time_s = clock.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Davis-Yin iteration
///
/// ```text
/// X½ = prox_g(Z),  X = prox_f(2 X½ - Z - gamma grad_h(X½)),  Z+ = Z + X - X½
/// ```
///
/// started from `z0`. Stops once `|Z+ - Z|_{2h} < tol` and returns the last
/// `X½`, which satisfies the constraint encoded by `g` exactly.
pub fn dys_solve<F: Prox, G: Prox, H: Prox>(
    prox_f: F,
    prox_g: G,
    grad_h: H,
    lipschitz: f64,
    z0: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    let mut z = z0.to_vec();
    dys_solve_warm(prox_f, prox_g, grad_h, lipschitz, &mut z, cfg, true)
}

/// [`dys_solve`] that updates `z` in place, so a later solve can restart from
/// it. With `keep_history` off only the final residual is stored.
pub fn dys_solve_warm<F: Prox, G: Prox, H: Prox>(
    mut prox_f: F,
    mut prox_g: G,
    mut grad_h: H,
    lipschitz: f64,
    z: &mut [f64],
    cfg: &SolverConfig,
    keep_history: bool,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let gamma = cfg.gamma_step;
    if !(lipschitz > 0.0) || gamma * lipschitz >= 2.0 {
        return Err(Error::InvalidArgument(format!(
            "DYS step {gamma} must lie in (0, 2/L) with L = {lipschitz}"
        )));
    }
    let clock = Instant::now();
    let mut report = SolveReport::start(cfg);
    let n = z.len();
    let mut half = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut arg = vec![0.0; n];
    let mut x = vec![0.0; n];
    for k in 0..cfg.max_iter {
        prox_g(z, &mut half)?;
        grad_h(&half, &mut grad)?;
        for i in 0..n {
            arg[i] = 2.0 * half[i] - z[i] - gamma * grad[i];
        }
        prox_f(&arg, &mut x)?;
        let mut sq = 0.0;
        for i in 0..n {
            let step = x[i] - half[i];
            z[i] += step;
            sq += step * step;
        }
        let res = cfg.norm_scale() * sq.sqrt();
        check_finite(res, k)?;
        if keep_history || k + 1 == cfg.max_iter || res < cfg.tol {
            report.residuals.push(res);
        }
        report.iterations = k + 1;
        if res < cfg.tol {
            report.converged = true;
            break;
        }
    }
    report.wall_time_s = clock.elapsed().as_secs_f64();
    Ok((half, report))
}

fn check_finite(res: f64, k: usize) -> Result<()> {
    if res.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("splitting residual at iteration {}", k + 1)))
    }
}
