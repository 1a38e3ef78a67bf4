//! Time integration of the Euler DG discretization with the positivity
//! pipeline after every Runge-Kutta stage, plus the run-time checks and
//! bookkeeping the benchmarks report.

use std::time::Instant;

use idplim_core::dg::{DgSolution, EvalTable};
use idplim_core::field::CellAverageField;
use idplim_core::limiters::{detect_violations, limit_dg_stage, select_limiting_region, LimiterAudit, LimiterOptions};
use idplim_core::numerics::pairwise_sum_strided;
use idplim_core::state::AdmissibleSet;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::operator::DgOperator;
use crate::physics::Euler;
use crate::time::{self, TimeScheme};

/// Per-step cost record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    /// Stages of this step in which the cell-average limiter ran.
    pub limited_stages: usize,
    pub iterations: usize,
    pub projections: u64,
}

/// Aggregate diagnostics of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub final_time: f64,
    /// Pipeline invocations (one per stage, plus the initial data).
    pub stages: usize,
    pub limited_stages: usize,
    pub limited_steps: usize,
    pub total_iterations: usize,
    pub total_projections: u64,
    /// Largest relative change of a column sum caused by the pipeline.
    pub max_limiter_sum_change: f64,
    /// Largest change of an average outside the limiting region.
    pub max_excluded_change: f64,
    /// Per component: `max_t |T(t) - T(0) + boundary outflow| / scale`.
    pub max_relative_drift: Vec<f64>,
    pub zhang_shu_cells: usize,
    pub min_theta: f64,
    pub min_density: f64,
    pub min_internal_energy: f64,
    pub wall_time_s: f64,
}

impl RunStats {
    fn new(nc: usize) -> Self {
        Self {
            steps: 0,
            final_time: 0.0,
            stages: 0,
            limited_stages: 0,
            limited_steps: 0,
            total_iterations: 0,
            total_projections: 0,
            max_limiter_sum_change: 0.0,
            max_excluded_change: 0.0,
            max_relative_drift: vec![0.0; nc],
            zhang_shu_cells: 0,
            min_theta: 1.0,
            min_density: f64::INFINITY,
            min_internal_energy: f64::INFINITY,
            wall_time_s: 0.0,
        }
    }
}

/// Everything the stage hook updates.
struct Monitor {
    limiter: Option<LimiterOptions>,
    set: AdmissibleSet,
    check: EvalTable,
    audit: Vec<LimiterAudit>,
    stats: RunStats,
    step_limited: usize,
    step_iterations: usize,
    step_projections: u64,
}

impl Monitor {
    /// Runs the pipeline on one stage solution and verifies the result.
    fn apply(&mut self, sol: &mut DgSolution, step: usize, stage: usize) -> Result<()> {
        self.stats.stages += 1;
        if let Some(opts) = self.limiter {
            let before = sol.averages();
            let field = sol.average_field()?;
            let excluded = if opts.restrict_region && !detect_violations(&field, &self.set).is_empty() {
                let region = select_limiting_region(&field, &self.set, opts.region_threshold)?;
                let mut mask = vec![true; field.n_cells()];
                region.iter().for_each(|&i| mask[i] = false);
                Some(mask)
            } else {
                None
            };
            let out = limit_dg_stage(sol, &opts)?;
            let after = sol.averages();
            let nc = sol.n_comp;
            for k in 0..nc {
                let s0 = pairwise_sum_strided(&before, k, nc);
                let s1 = pairwise_sum_strided(&after, k, nc);
                self.stats.max_limiter_sum_change =
                    self.stats.max_limiter_sum_change.max((s1 - s0).abs() / (1.0 + s0.abs()));
            }
            if let Some(mask) = excluded {
                for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
                    for k in 0..nc {
                        let d = (after[i * nc + k] - before[i * nc + k]).abs();
                        self.stats.max_excluded_change = self.stats.max_excluded_change.max(d);
                    }
                }
            }
            let z = &out.scaling;
            self.stats.zhang_shu_cells += z.density_scaled.max(z.energy_scaled);
            if z.min_theta < self.stats.min_theta {
                self.stats.min_theta = z.min_theta;
            }
            if let Some(rep) = out.report {
                self.stats.limited_stages += 1;
                self.stats.total_iterations += rep.iterations;
                self.stats.total_projections += rep.projections;
                self.step_limited += 1;
                self.step_iterations += rep.iterations;
                self.step_projections += rep.projections;
                self.audit.push(LimiterAudit {
                    time_step: step,
                    rk_stage: stage,
                    n_violations: out.n_violations,
                    norm: opts.norm,
                    iterations: rep.iterations,
                    projections: rep.projections,
                    conservation_residuals: rep.conservation_residuals,
                });
            }
            self.verify(sol, step, stage)?;
        }
        Ok(())
    }

    /// Exact membership of every average and every checked point value.
    fn verify(&mut self, sol: &DgSolution, step: usize, stage: usize) -> Result<()> {
        let nc = sol.n_comp;
        let nb = sol.n_basis();
        let avgs = sol.averages();
        let mut u = vec![0.0; nc];
        let track = |u: &[f64], stats: &mut RunStats| {
            let msq: f64 = u[1..nc - 1].iter().map(|m| m * m).sum();
            stats.min_density = stats.min_density.min(u[0]);
            stats.min_internal_energy = stats.min_internal_energy.min(u[nc - 1] - 0.5 * msq / u[0]);
        };
        for cell in 0..sol.n_cells() {
            let a = &avgs[cell * nc..(cell + 1) * nc];
            if !self.set.contains_row(a) {
                return Err(SimError::Check(format!(
                    "step {step} stage {stage}: average of cell {cell} not admissible: {a:?}"
                )));
            }
            let c = sol.cell(cell);
            for p in 0..self.check.n_points {
                for k in 0..nc {
                    u[k] = self.check.eval(p, &c[k * nb..(k + 1) * nb]);
                }
                if !self.set.contains_row(&u) {
                    return Err(SimError::Check(format!(
                        "step {step} stage {stage}: point {p} of cell {cell} not admissible: {u:?}"
                    )));
                }
                track(&u, &mut self.stats);
            }
        }
        Ok(())
    }
}

/// A running Euler simulation; owns its state.
pub struct EulerSimulation {
    pub op: DgOperator<Euler>,
    pub sol: DgSolution,
    pub scheme: TimeScheme,
    pub time: f64,
    pub records: Vec<StepRecord>,
    monitor: Monitor,
    initial_totals: Vec<f64>,
    boundary_outflow: Vec<f64>,
    started: Instant,
}

impl EulerSimulation {
    /// Runs the pipeline once on the initial data (step 0, stage 0).
    pub fn new(op: DgOperator<Euler>, mut sol: DgSolution, scheme: TimeScheme, limiter: Option<LimiterOptions>) -> Result<Self> {
        if sol.n_comp != op.n_comp() || sol.mesh != op.mesh {
            return Err(SimError::Config("solution does not match the operator".into()));
        }
        let eps = limiter.map_or(1e-13, |l| l.epsilon);
        let set = AdmissibleSet::new(eps, op.physics.gamma)?;
        let check = sol.basis.table(&sol.basis.check_points());
        let nc = sol.n_comp;
        let mut monitor = Monitor {
            limiter,
            set,
            check,
            audit: Vec::new(),
            stats: RunStats::new(nc),
            step_limited: 0,
            step_iterations: 0,
            step_projections: 0,
        };
        monitor.apply(&mut sol, 0, 0)?;
        let mut sim = Self {
            op,
            sol,
            scheme,
            time: 0.0,
            records: Vec::new(),
            monitor,
            initial_totals: Vec::new(),
            boundary_outflow: vec![0.0; nc],
            started: Instant::now(),
        };
        sim.initial_totals = sim.totals();
        Ok(sim)
    }

    /// Column sums of the cell averages.
    pub fn totals(&self) -> Vec<f64> {
        let a = self.sol.averages();
        let nc = self.sol.n_comp;
        (0..nc).map(|k| pairwise_sum_strided(&a, k, nc)).collect()
    }

    pub fn average_field(&self) -> Result<CellAverageField> {
        Ok(self.sol.average_field()?)
    }

    pub fn audit(&self) -> &[LimiterAudit] {
        &self.monitor.audit
    }

    pub fn stats(&self) -> RunStats {
        let mut s = self.monitor.stats.clone();
        s.wall_time_s = self.started.elapsed().as_secs_f64();
        s
    }

    /// `CFL h / max(|u| + c)` over all checked points.
    pub fn stable_dt(&self, cfl: f64) -> Result<f64> {
        let speed = self.op.max_speed(&self.sol, self.time);
        if !(speed.is_finite() && speed > 0.0) {
            return Err(SimError::Check(format!("maximal wave speed is {speed}")));
        }
        Ok(cfl * self.op.mesh.h() / speed)
    }

    /// Advances by `dt`, running the pipeline after every stage. On error
    /// the solution holds the last step value.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let weights: &[f64] = match self.scheme {
            TimeScheme::SspRk3 => &[1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            TimeScheme::Rk4 => &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        };
        let step_no = self.records.len() + 1;
        let nc = self.sol.n_comp;
        let t = self.time;
        let scheme = self.scheme;
        let Self { op, sol, monitor, .. } = &mut *self;
        monitor.step_limited = 0;
        monitor.step_iterations = 0;
        monitor.step_projections = 0;
        let start = sol.coeffs.clone();
        let mut u = std::mem::take(&mut sol.coeffs);
        let mut flux = vec![0.0; nc];
        let mut stage = 0;
        let mut rhs = |c: &[f64], tt: f64, out: &mut [f64]| -> Result<()> {
            op.rhs_coeffs(c, tt, out)?;
            let b = op.boundary_flux(c, tt)?;
            for k in 0..nc {
                flux[k] += weights[stage] * b[k];
            }
            stage += 1;
            Ok(())
        };
        let mut hook = |s: usize, v: &mut Vec<f64>| -> Result<()> {
            std::mem::swap(&mut sol.coeffs, v);
            let r = monitor.apply(sol, step_no, s);
            std::mem::swap(&mut sol.coeffs, v);
            r
        };
        let res = time::step(scheme, &mut u, t, dt, &mut rhs, &mut hook);
        if let Err(e) = res {
            self.sol.coeffs = start;
            return Err(e);
        }
        self.sol.coeffs = u;
        for k in 0..nc {
            self.boundary_outflow[k] += dt * flux[k];
        }
        self.time = t + dt;
        let totals = self.totals();
        let stats = &mut self.monitor.stats;
        for k in 0..nc {
            let (t0, t1, out) = (self.initial_totals[k], totals[k], self.boundary_outflow[k]);
            let scale = t0.abs().max(t1.abs()).max(out.abs()).max(f64::MIN_POSITIVE);
            let drift = (t1 - t0 + out).abs() / scale;
            stats.max_relative_drift[k] = stats.max_relative_drift[k].max(drift);
        }
        stats.steps = step_no;
        stats.final_time = self.time;
        if self.monitor.step_limited > 0 {
            stats.limited_steps += 1;
        }
        self.records.push(StepRecord {
            step: step_no,
            time: self.time,
            dt,
            limited_stages: self.monitor.step_limited,
            iterations: self.monitor.step_iterations,
            projections: self.monitor.step_projections,
        });
        Ok(())
    }

    /// Steps to `t_end` with a fixed `dt` or the CFL rule, landing exactly on
    /// each of `n_snapshots` evenly spaced output times, where `on_snapshot`
    /// is called.
    pub fn run_to(
        &mut self,
        t_end: f64,
        cfl: f64,
        fixed_dt: Option<f64>,
        n_snapshots: usize,
        mut on_snapshot: impl FnMut(&Self, usize) -> Result<()>,
    ) -> Result<()> {
        let n_snap = n_snapshots.max(1);
        on_snapshot(self, 0)?;
        for j in 1..=n_snap {
            let target = if j == n_snap { t_end } else { t_end * j as f64 / n_snap as f64 };
            while self.time < target {
                let dt = match fixed_dt {
                    Some(dt) => dt,
                    None => self.stable_dt(cfl)?,
                };
                // Avoid a sliver step from rounding of repeated additions.
                let remaining = target - self.time;
                let dt = if dt >= remaining || remaining - dt < 1e-9 * dt { remaining } else { dt };
                self.step(dt)?;
            }
            on_snapshot(self, j)?;
        }
        Ok(())
    }
}
