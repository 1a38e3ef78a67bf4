//! The 2D benchmark set-ups (Sedov blast, Mach 2000 jet) and the run-directory
//! writer shared by all 2D runs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use idplim_core::dg::{Basis, BasisKind, DgSolution, Mesh};
use serde::{Deserialize, Serialize};

use crate::boundary::{Boundaries, Boundary, StateFn};
use crate::config::{BoundaryKind, SimConfig};
use crate::error::{Result, SimError};
use crate::euler2d::{EulerSimulation, RunStats};
use crate::operator::DgOperator;
use crate::physics::Euler;
use crate::time::TimeScheme;

/// Total energy deposited in the corner cell is `SEDOV_ENERGY / h^2`.
pub const SEDOV_ENERGY: f64 = 0.244816;
/// Background total energy of the Sedov blast.
pub const SEDOV_AMBIENT_ENERGY: f64 = 1e-12;
/// Nozzle half width, density, x-momentum and pressure of the jet inflow.
pub const JET_HALF_WIDTH: f64 = 0.05;
pub const JET_INFLOW: [f64; 4] = [5.0, 4000.0, 0.0, 0.4127];
/// Ambient density and pressure of the jet.
pub const JET_AMBIENT: [f64; 2] = [0.5, 0.4127];

/// Result of a benchmark run, written to `report.json` by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub config: SimConfig,
    pub stats: RunStats,
    pub initial_totals: Vec<f64>,
    pub final_totals: Vec<f64>,
    pub n_audit_records: usize,
    pub snapshots: Vec<String>,
}

/// Maps the configured edge kinds to boundary conditions, with `inflow`
/// resolved to `inflow`.
pub fn boundaries_from(kinds: &[BoundaryKind; 4], inflow: &StateFn) -> Boundaries {
    Boundaries(kinds.map(|k| match k {
        BoundaryKind::Periodic => Boundary::Periodic,
        BoundaryKind::Reflective => Boundary::Reflective,
        BoundaryKind::Outflow => Boundary::Outflow,
        BoundaryKind::Inflow => Boundary::Dirichlet(inflow.clone()),
    }))
}

fn limiter_of(cfg: &SimConfig) -> Option<idplim_core::limiters::LimiterOptions> {
    cfg.limiter_enabled.then_some(cfg.limiter)
}

/// Cell-wise constant initial data from per-cell averages.
fn constant_cells(mesh: Mesh, basis: Basis, nc: usize, avg: impl Fn(usize) -> Vec<f64>) -> Result<DgSolution> {
    let mut sol = DgSolution::zeros(mesh, basis, nc)?;
    let data: Vec<f64> = (0..sol.n_cells()).flat_map(avg).collect();
    sol.set_averages(&data)?;
    Ok(sol)
}

/// Sedov blast on `[0, 1.1]^2` with modal `P^k` and SSP-RK3: unit density at
/// rest, total energy `1e-12` except `0.244816 / h^2` in the corner cell at
/// the origin.
pub fn sedov_simulation(cfg: &SimConfig) -> Result<EulerSimulation> {
    cfg.validate()?;
    let mesh = Mesh::new_2d(cfg.mesh_n, cfg.mesh_n, [0.0, 0.0], [1.1, 1.1])?;
    let basis = Basis::new(BasisKind::ModalP(cfg.degree), 2)?;
    let physics = Euler::new(2, cfg.gamma_gas);
    let ambient: StateFn = Arc::new(|_, _| vec![1.0, 0.0, 0.0, SEDOV_AMBIENT_ENERGY]);
    let op = DgOperator::new(physics, mesh.clone(), basis.clone(), boundaries_from(&cfg.boundary, &ambient))?;
    let corner = SEDOV_ENERGY / (mesh.h() * mesh.h());
    let sol = constant_cells(mesh, basis, 4, |cell| {
        vec![1.0, 0.0, 0.0, if cell == 0 { corner } else { SEDOV_AMBIENT_ENERGY }]
    })?;
    EulerSimulation::new(op, sol, TimeScheme::SspRk3, limiter_of(cfg))
}

/// Conserved inflow state of the jet at height `y`: the nozzle state for
/// `|y| <= 0.05`, the ambient gas otherwise. The prescribed vector is read as
/// `(rho, m_x, m_y, p)`, so the nozzle velocity is 800.
pub fn jet_inflow_state(y: f64, gamma_gas: f64) -> Vec<f64> {
    let euler = Euler::new(2, gamma_gas);
    if y.abs() <= JET_HALF_WIDTH {
        let [rho, mx, my, p] = JET_INFLOW;
        euler.conserved(rho, &[mx / rho, my / rho], p)
    } else {
        euler.conserved(JET_AMBIENT[0], &[0.0, 0.0], JET_AMBIENT[1])
    }
}

/// Mach 2000 jet on `[0, 1] x [-0.5, 0.5]` with Gauss-Lobatto nodal `Q^k`
/// and RK4, gas at rest initially.
pub fn jet_simulation(cfg: &SimConfig) -> Result<EulerSimulation> {
    cfg.validate()?;
    let mesh = Mesh::new_2d(cfg.mesh_n, cfg.mesh_n, [0.0, -0.5], [1.0, 0.5])?;
    let basis = Basis::new(BasisKind::NodalGaussLobatto(cfg.degree), 2)?;
    let gamma = cfg.gamma_gas;
    let physics = Euler::new(2, gamma);
    let inflow: StateFn = Arc::new(move |x, _| jet_inflow_state(x[1], gamma));
    let op = DgOperator::new(physics, mesh.clone(), basis.clone(), boundaries_from(&cfg.boundary, &inflow))?;
    let ambient = physics.conserved(JET_AMBIENT[0], &[0.0, 0.0], JET_AMBIENT[1]);
    let sol = constant_cells(mesh, basis, 4, |_| ambient.clone())?;
    EulerSimulation::new(op, sol, TimeScheme::Rk4, limiter_of(cfg))
}

/// Runs `sim` to `cfg.t_end`. With `out`, writes `snapshots/snapshot_NNNN.csv`
/// (cell averages plus a JSON sidecar), `audit.jsonl` and `steps.csv`; on
/// failure the last good state goes to `snapshots/failure.csv`.
pub fn run_benchmark(problem: &str, mut sim: EulerSimulation, cfg: &SimConfig, out: Option<&Path>) -> Result<RunSummary> {
    if let Some(dir) = out {
        fs::create_dir_all(dir.join("snapshots"))?;
    }
    let eps = cfg.limiter.epsilon;
    let initial_totals = sim.totals();
    let mut names = Vec::new();
    let res = sim.run_to(cfg.t_end, cfg.cfl, cfg.dt, cfg.snapshots, |s, j| {
        if let Some(dir) = out {
            let name = format!("snapshots/snapshot_{j:04}.csv");
            s.average_field()?.save(&dir.join(&name), Some(eps))?;
            names.push(name);
        }
        Ok(())
    });
    if let Some(dir) = out {
        write_logs(&sim, dir)?;
        if res.is_err() {
            sim.average_field()?.save(&dir.join("snapshots/failure.csv"), Some(eps))?;
        }
    }
    res?;
    Ok(RunSummary {
        problem: problem.to_string(),
        config: cfg.clone(),
        stats: sim.stats(),
        initial_totals,
        final_totals: sim.totals(),
        n_audit_records: sim.audit().len(),
        snapshots: names,
    })
}

fn write_logs(sim: &EulerSimulation, dir: &Path) -> Result<()> {
    let mut audit = BufWriter::new(File::create(dir.join("audit.jsonl"))?);
    for rec in sim.audit() {
        serde_json::to_writer(&mut audit, rec)?;
        audit.write_all(b"\n")?;
    }
    audit.flush()?;
    let mut steps = csv::Writer::from_path(dir.join("steps.csv"))?;
    for r in &sim.records {
        steps.serialize(r)?;
    }
    steps.flush()?;
    Ok(())
}

/// Writes `value` as pretty JSON to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, value).map_err(SimError::from)
}
