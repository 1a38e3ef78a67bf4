//! Conservative limiting of Euler cell averages onto `G^eps`.

use crate::error::{Error, Result};
use crate::field::{CellAverageField, ConservationTarget};
use crate::numerics::pairwise_sum_strided;
use crate::prox::{prox_conservation_columns, prox_invariant_set_rows, prox_quadratic_affine_columns, shrinkage, ProxContext};
use crate::state::AdmissibleSet;

use super::{drs_solve, dys_solve_warm, SolveReport, SolverConfig};

/// Data of `min |X - U|` over fields with admissible rows and column sums `b`.
#[derive(Clone, Debug)]
pub struct EulerProblem<'a> {
    pub field: &'a CellAverageField,
    pub target: &'a ConservationTarget,
    pub set: &'a AdmissibleSet,
}

impl<'a> EulerProblem<'a> {
    /// Checks shapes and feasibility: the constraints can be met iff the mean
    /// state `b / N` is admissible (the set is convex, and the constant field
    /// equal to the mean meets both constraints).
    pub fn new(field: &'a CellAverageField, target: &'a ConservationTarget, set: &'a AdmissibleSet) -> Result<Self> {
        if target.len() != field.n_components() {
            return Err(Error::DimensionMismatch { expected: field.n_components(), found: target.len() });
        }
        if !(set.epsilon() > 0.0) {
            return Err(Error::InvalidArgument("limiting needs epsilon > 0".into()));
        }
        if !euler_feasible(target, field.n_cells(), set) {
            return Err(Error::Infeasible(format!(
                "mean state {:?} is not admissible",
                target.totals().iter().map(|b| b / field.n_cells() as f64).collect::<Vec<_>>()
            )));
        }
        Ok(Self { field, target, set })
    }

    fn nc(&self) -> usize {
        self.field.n_components()
    }

    fn n(&self) -> usize {
        self.field.n_cells()
    }

    pub fn l1_objective(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.field.data()).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn l2_objective(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.field.data()).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn conservation_residuals(&self, x: &[f64]) -> Vec<f64> {
        let nc = self.nc();
        (0..nc).map(|j| pairwise_sum_strided(x, j, nc) - self.target.totals()[j]).collect()
    }
}

/// Whether some field of `n` admissible rows has column sums `target`.
pub fn euler_feasible(target: &ConservationTarget, n: usize, set: &AdmissibleSet) -> bool {
    if n == 0 {
        return false;
    }
    let mean: Vec<f64> = target.totals().iter().map(|b| b / n as f64).collect();
    mean.iter().all(|v| v.is_finite()) && set.contains_row(&mean)
}

/// Counters gathered by the Euler prox closures.
#[derive(Default)]
struct Counts {
    projections: u64,
    fallbacks: u64,
    inner_iterations: u64,
}

/// DYS on `min |X - reference|^2 / (2 alpha)` with step `gamma = alpha`,
/// `f` the column-sum constraint and `g` the admissible rows.
fn dys_core(
    p: &EulerProblem,
    reference: &[f64],
    alpha: f64,
    z: &mut [f64],
    cfg: &SolverConfig,
    keep_history: bool,
    counts: &mut Counts,
) -> Result<(Vec<f64>, SolveReport)> {
    let nc = p.nc();
    let totals = p.target.totals();
    let cfg = SolverConfig { gamma_step: alpha, ..*cfg };
    let mut fallbacks = 0;
    let mut projections = 0;
    let out = dys_solve_warm(
        |x: &[f64], out: &mut [f64]| {
            out.copy_from_slice(x);
            prox_conservation_columns(out, nc, totals);
            Ok(())
        },
        |z: &[f64], out: &mut [f64]| {
            out.copy_from_slice(z);
            projections += 1;
            fallbacks += prox_invariant_set_rows(out, nc, p.set)?;
            Ok(())
        },
        |x: &[f64], out: &mut [f64]| {
            for i in 0..x.len() {
                out[i] = (x[i] - reference[i]) / alpha;
            }
            Ok(())
        },
        1.0 / alpha,
        z,
        &cfg,
        keep_history,
    )?;
    counts.projections += projections;
    counts.fallbacks += fallbacks;
    Ok(out)
}

fn finish(p: &EulerProblem, x: Vec<f64>, mut report: SolveReport, counts: Counts) -> Result<(CellAverageField, SolveReport)> {
    report.projections = counts.projections;
    report.row_projections = counts.projections * p.n() as u64;
    report.fallback_events = counts.fallbacks;
    report.inner_iterations = counts.inner_iterations;
    report.conservation_residuals = p.conservation_residuals(&x);
    Ok((p.field.with_data(x)?, report))
}

/// Unique l2 minimizer by DYS: `prox_g` projects every row onto `G^eps`,
/// `prox_f` restores the column sums and `grad h = (X - U)/alpha`, with step
/// `gamma = 1/L = alpha` and `Z0 = U`. Returns the admissible `X½`.
pub fn dys_l2_euler(p: &EulerProblem, alpha: f64, cfg: &SolverConfig) -> Result<(CellAverageField, SolveReport)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let reference = p.field.data();
    let mut z = reference.to_vec();
    let mut counts = Counts::default();
    let (x, report) = dys_core(p, reference, alpha, &mut z, cfg, true, &mut counts)?;
    finish(p, x, report, counts)
}

/// The l2 minimizer by Douglas-Rachford with `g` the fidelity term plus the
/// column-sum constraint and `h` the admissible rows. Starts from `Y0 = U`,
/// `X0 = prox_h(Y0)`. Used to cross-check [`dys_l2_euler`].
pub fn drs_l2_euler(p: &EulerProblem, alpha: f64, cfg: &SolverConfig) -> Result<(CellAverageField, SolveReport)> {
    let nc = p.nc();
    let ctx = ProxContext::new(cfg.gamma_step, alpha, p.target.clone(), p.field.data().to_vec())?;
    let mut counts = Counts::default();
    let (x, report) = drs_solve(
        |x: &[f64], out: &mut [f64]| {
            out.copy_from_slice(x);
            prox_quadratic_affine_columns(out, nc, &ctx);
            Ok(())
        },
        |y: &[f64], out: &mut [f64]| {
            out.copy_from_slice(y);
            counts.projections += 1;
            counts.fallbacks += prox_invariant_set_rows(out, nc, p.set)?;
            Ok(())
        },
        p.field.data(),
        None,
        cfg,
    )?;
    finish(p, x, report, counts)
}

/// An l1 minimizer by Douglas-Rachford with `g = |X - U|_1` and `h` the
/// indicator of both constraints. `prox_h` is the l2 problem with
/// `alpha = gamma`, solved by an inner DYS (tolerance `cfg.tol`, warm-started
/// across outer iterations). Starts from `Y0 = U`, `X0 = prox_h(Y0)`.
pub fn drs_l1_euler(p: &EulerProblem, cfg: &SolverConfig) -> Result<(CellAverageField, SolveReport)> {
    cfg.validate()?;
    let gamma = cfg.gamma_step;
    let u = p.field.data();
    let inner_cfg = SolverConfig { max_iter: cfg.inner_max_iter, ..*cfg };
    let mut z = u.to_vec();
    let mut counts = Counts::default();
    let mut inner_failure = None;
    let (x, report) = drs_solve(
        |x: &[f64], out: &mut [f64]| {
            for i in 0..x.len() {
                out[i] = u[i] + shrinkage(x[i] - u[i], gamma);
            }
            Ok(())
        },
        |y: &[f64], out: &mut [f64]| {
            let (x, rep) = dys_core(p, y, gamma, &mut z, &inner_cfg, false, &mut counts)?;
            counts.inner_iterations += rep.iterations as u64;
            if !rep.converged {
                inner_failure = Some(rep);
            }
            out.copy_from_slice(&x);
            Ok(())
        },
        u,
        None,
        cfg,
    )?;
    if let Some(rep) = inner_failure {
        return Err(Error::NotConverged {
            iterations: rep.iterations,
            residual: rep.final_residual().unwrap_or(f64::NAN),
        });
    }
    finish(p, x, report, counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(rows: &[[f64; 3]]) -> CellAverageField {
        CellAverageField::new(1, 1.0, vec![0.0, rows.len() as f64], rows.concat()).unwrap()
    }

    #[test]
    fn admissible_field_is_a_fixed_point() {
        let f = field(&[[1.0, 0.5, 2.0], [0.5, -0.1, 1.0]]);
        let t = ConservationTarget::from_field(&f);
        let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
        let p = EulerProblem::new(&f, &t, &set).unwrap();
        let (x, rep) = dys_l2_euler(&p, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(x, f);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn infeasible_mean_is_rejected() {
        let f = field(&[[1.0, 0.0, 1.0], [1.0, 0.0, 1.0]]);
        let t = ConservationTarget::new(vec![2.0, 4.0, 2.0]);
        let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
        assert!(matches!(EulerProblem::new(&f, &t, &set), Err(Error::Infeasible(_))));
    }
}
