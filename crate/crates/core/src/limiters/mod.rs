//! The limiter pipeline: detect bad cell averages, solve the conservative
//! minimization, re-attach the limited averages to the DG polynomial and
//! scale point values with the Zhang-Shu limiter.

mod zhang_shu;

use serde::{Deserialize, Serialize};

use crate::dg::DgSolution;
use crate::error::{Error, Result};
use crate::field::{CellAverageField, ConservationTarget};
use crate::numerics::pairwise_sum;
use crate::solvers::{drs_l1_euler, dys_l2_euler, EulerProblem, SolveReport, SolverConfig};
use crate::state::AdmissibleSet;

pub use zhang_shu::{zhang_shu_scaling, ZhangShuStats};

/// One explicit l1 minimizer of the scalar problem: clip `u` to `[m, big_m]`,
/// then move the clipped cells that have room towards the violated bound, in
/// proportion to that room, until the sum is `b`.
pub fn clip_and_assured_sum(u: &[f64], m: f64, big_m: f64, b: f64) -> Result<Vec<f64>> {
    crate::solvers::ScalarProblem::new(u, m, big_m, b)?;
    let clipped: Vec<f64> = u.iter().map(|v| v.clamp(m, big_m)).collect();
    let excess = pairwise_sum(&clipped) - b;
    let bound = if excess > 0.0 { m } else { big_m };
    let room: Vec<f64> = clipped.iter().map(|c| c - bound).collect();
    let total_room = pairwise_sum(&room);
    if excess == 0.0 || total_room == 0.0 {
        return Ok(clipped);
    }
    Ok(clipped
        .iter()
        .zip(&room)
        .map(|(c, r)| (c - excess * (r / total_room)).clamp(m, big_m))
        .collect())
}

/// Rows of `field` outside `set`.
pub fn detect_violations(field: &CellAverageField, set: &AdmissibleSet) -> Vec<usize> {
    field.violating_rows(set)
}

/// Cells that are outside `set` or whose internal energy
/// `E - |m|^2 / (2 rho)` is at least `threshold`.
pub fn select_limiting_region(field: &CellAverageField, set: &AdmissibleSet, threshold: f64) -> Result<Vec<usize>> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("region threshold must be positive, got {threshold}")));
    }
    Ok(field
        .rows()
        .enumerate()
        .filter(|(_, r)| {
            if !set.contains_row(r) {
                return true;
            }
            let n = r.len();
            let msq: f64 = r[1..n - 1].iter().map(|v| v * v).sum();
            r[n - 1] - msq / (2.0 * r[0]) >= threshold
        })
        .map(|(i, _)| i)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(Error::Parse(format!("unknown norm {other:?}, expected l1 or l2"))),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimiterOptions {
    pub norm: Norm,
    /// `eps` of the admissible set `G^eps`.
    pub epsilon: f64,
    /// Mesh size and dimension are taken from the field being limited.
    pub solver_cfg: SolverConfig,
    /// Limit only the cells chosen by [`select_limiting_region`].
    pub restrict_region: bool,
    pub region_threshold: f64,
    /// Fidelity weight of the l2 model.
    pub alpha: f64,
}

impl Default for LimiterOptions {
    fn default() -> Self {
        Self {
            norm: Norm::L2,
            epsilon: 1e-13,
            solver_cfg: SolverConfig::default(),
            restrict_region: false,
            region_threshold: 1e-10,
            alpha: 1.0,
        }
    }
}

impl LimiterOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {}", self.alpha)));
        }
        self.solver_cfg.validate()
    }

    pub fn admissible_set(&self, gamma_gas: f64) -> Result<AdmissibleSet> {
        AdmissibleSet::new(self.epsilon, gamma_gas)
    }
}

/// Limits the cell averages of `field` onto `G^eps` while keeping the column
/// sums `target`. Returns the input unchanged (zero iterations) when every row
/// is admissible. With `restrict_region` the problem is posed on the selected
/// cells only, with their own column sums as target; the other rows are
/// copied bit for bit.
pub fn limit_cell_averages(
    field: &CellAverageField,
    target: &ConservationTarget,
    opts: &LimiterOptions,
) -> Result<(CellAverageField, SolveReport)> {
    opts.validate()?;
    let set = AdmissibleSet::with_epsilon(opts.epsilon)?;
    let cfg = SolverConfig { h_mesh: field.h(), dim: field.dim(), ..opts.solver_cfg };
    if detect_violations(field, &set).is_empty() {
        let report = SolveReport {
            converged: true,
            gamma: cfg.gamma_step,
            lambda: cfg.lambda_relax,
            tol: cfg.tol,
            conservation_residuals: target.residuals(field),
            ..SolveReport::default()
        };
        return Ok((field.clone(), report));
    }
    if !opts.restrict_region {
        return solve(field, target, &set, opts, &cfg);
    }
    let region = select_limiting_region(field, &set, opts.region_threshold)?;
    let sub = field.subfield(&region)?;
    let sub_target = ConservationTarget::from_field(&sub);
    let (limited_sub, mut report) = solve(&sub, &sub_target, &set, opts, &cfg)?;
    let mut out = field.clone();
    out.scatter_rows(&region, &limited_sub);
    report.conservation_residuals = target.residuals(&out);
    Ok((out, report))
}

fn solve(
    field: &CellAverageField,
    target: &ConservationTarget,
    set: &AdmissibleSet,
    opts: &LimiterOptions,
    cfg: &SolverConfig,
) -> Result<(CellAverageField, SolveReport)> {
    let problem = EulerProblem::new(field, target, set)?;
    let (out, report) = match opts.norm {
        Norm::L2 => dys_l2_euler(&problem, opts.alpha, cfg)?,
        Norm::L1 => drs_l1_euler(&problem, cfg)?,
    };
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            residual: report.final_residual().unwrap_or(f64::NAN),
        });
    }
    Ok((out, report))
}

/// Shifts every cell polynomial so that its average becomes the matching
/// row of `limited`, leaving the higher moments untouched.
pub fn postprocess_dg(sol: &DgSolution, limited: &CellAverageField) -> Result<DgSolution> {
    if limited.n_cells() != sol.n_cells() || limited.n_components() != sol.n_comp {
        return Err(Error::DimensionMismatch {
            expected: sol.n_cells() * sol.n_comp,
            found: limited.n_cells() * limited.n_components(),
        });
    }
    let mut out = sol.clone();
    out.set_averages(limited.data())?;
    Ok(out)
}

/// `|limited - exact|_F < |raw - exact|_F`.
pub fn accuracy_improvement_check(limited: &CellAverageField, raw: &CellAverageField, exact: &CellAverageField) -> bool {
    let d = |a: &CellAverageField| crate::numerics::dist2(a.data(), exact.data());
    d(limited) < d(raw)
}

/// `|limited - exact| <= 2 |raw - exact|` in the given entrywise norm, the
/// bound every minimizer satisfies when `exact` meets the constraints.
pub fn within_factor_two(limited: &CellAverageField, raw: &CellAverageField, exact: &CellAverageField, norm: Norm) -> bool {
    let d = |a: &CellAverageField| -> f64 {
        let it = a.data().iter().zip(exact.data()).map(|(x, y)| x - y);
        match norm {
            Norm::L1 => it.map(f64::abs).sum(),
            Norm::L2 => it.map(|v| v * v).sum::<f64>().sqrt(),
        }
    };
    d(limited) <= 2.0 * d(raw) * (1.0 + 1e-12)
}

/// One line of the limiter audit log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimiterAudit {
    pub time_step: usize,
    pub rk_stage: usize,
    pub n_violations: usize,
    pub norm: Norm,
    pub iterations: usize,
    pub projections: u64,
    pub conservation_residuals: Vec<f64>,
}

/// What [`limit_dg_stage`] did to one stage solution.
#[derive(Clone, Debug, Default)]
pub struct StageOutcome {
    pub n_violations: usize,
    pub report: Option<SolveReport>,
    pub scaling: ZhangShuStats,
}

/// Full positivity pipeline on a DG stage solution: cell averages are limited
/// only if some are inadmissible, then every cell is scaled so that its
/// checked point values are admissible.
pub fn limit_dg_stage(sol: &mut DgSolution, opts: &LimiterOptions) -> Result<StageOutcome> {
    let set = AdmissibleSet::with_epsilon(opts.epsilon)?;
    let field = sol.average_field()?;
    let bad = detect_violations(&field, &set);
    let mut outcome = StageOutcome { n_violations: bad.len(), ..StageOutcome::default() };
    if !bad.is_empty() {
        let target = ConservationTarget::from_field(&field);
        let (limited, report) = limit_cell_averages(&field, &target, opts)?;
        sol.set_averages(limited.data())?;
        if !sol.basis.is_modal() {
            let (nc, w) = (sol.n_comp, sol.basis.average_weights());
            for cell in 0..sol.n_cells() {
                zhang_shu::restore_admissible_average(sol.cell_mut(cell), nc, &w, &set);
            }
        }
        outcome.report = Some(report);
    }
    outcome.scaling = zhang_shu_scaling(sol, &set)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_and_assured_sum_examples() {
        let x = clip_and_assured_sum(&[1.0, 1.0, 2.0, 2.1], 1.0, 2.0, 6.1).unwrap();
        for (a, b) in x.iter().zip([1.05, 1.05, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(clip_and_assured_sum(&[1.2, 1.5], 1.0, 2.0, 2.7).unwrap(), vec![1.2, 1.5]);
        assert_eq!(clip_and_assured_sum(&[1.2, -0.2], 0.0, 1.0, 1.0).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(clip_and_assured_sum(&[0.0, 0.0], 0.0, 1.0, 3.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn surplus_is_taken_from_cells_above_the_lower_bound() {
        let x = clip_and_assured_sum(&[0.5, 1.0, 1.5], 0.0, 1.0, 1.5).unwrap();
        assert!((x.iter().sum::<f64>() - 1.5).abs() < 1e-15);
        assert!((x[0] - 0.3).abs() < 1e-15 && (x[1] - 0.6).abs() < 1e-15 && (x[2] - 0.6).abs() < 1e-15);
    }

    fn field(rows: &[[f64; 3]]) -> CellAverageField {
        CellAverageField::new(1, 1.0, vec![0.0, rows.len() as f64], rows.concat()).unwrap()
    }

    #[test]
    fn detection_and_region() {
        let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
        let f = field(&[[1.0, 0.0, 1e-13], [1e-14, 0.0, 1.0], [1.0, 0.0, 1.0]]);
        assert_eq!(detect_violations(&f, &set), vec![1]);
        assert_eq!(select_limiting_region(&f, &set, 1e-10).unwrap(), vec![1, 2]);
        assert!(select_limiting_region(&f, &set, 0.0).is_err());
    }

    #[test]
    fn feasible_field_is_untouched() {
        let f = field(&[[1.0, 0.5, 2.0], [0.5, 0.0, 1.0]]);
        let t = ConservationTarget::from_field(&f);
        for norm in [Norm::L1, Norm::L2] {
            let opts = LimiterOptions { norm, ..LimiterOptions::default() };
            let (out, rep) = limit_cell_averages(&f, &t, &opts).unwrap();
            assert_eq!(out, f);
            assert_eq!(rep.iterations, 0);
        }
    }

    #[test]
    fn region_restriction_leaves_quiet_cells_alone() {
        let quiet = [1.0, 0.0, 1e-12];
        let f = field(&[quiet, [1.0, 0.0, 1.0], [1.0, 0.0, -0.2], [1.0, 0.0, 1.0], quiet]);
        let t = ConservationTarget::from_field(&f);
        let opts = LimiterOptions { restrict_region: true, ..LimiterOptions::default() };
        let (out, _) = limit_cell_averages(&f, &t, &opts).unwrap();
        assert_eq!(out.row(0), f.row(0));
        assert_eq!(out.row(4), f.row(4));
        let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
        assert!(detect_violations(&out, &set).is_empty());
        for r in t.residuals(&out) {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn norm_round_trip() {
        for n in [Norm::L1, Norm::L2] {
            assert_eq!(n.to_string().parse::<Norm>().unwrap(), n);
        }
        assert!("l3".parse::<Norm>().is_err());
    }
}
