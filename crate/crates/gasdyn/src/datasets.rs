//! Out-of-bound data for the limiter benchmarks: unlimited DG advection
//! snapshots and conservatively perturbed Lax shock tube averages.

use idplim_core::dg::{Basis, BasisKind, DgSolution, Mesh};
use idplim_core::{AdmissibleSet, CellAverageField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::Boundaries;
use crate::error::{Result, SimError};
use crate::operator::DgOperator;
use crate::physics::Advection;
use crate::riemann::{ExactRiemann, RiemannStates};
use crate::time::{rk4_step, no_hook};

/// Triangle on `(0.25, 0.75]` and square on `(1.25, 1.75]` over a background of 1.
pub fn triangle_square(x: f64) -> f64 {
    if x > 0.25 && x <= 0.5 {
        4.0 * x
    } else if x > 0.5 && x <= 0.75 {
        -4.0 * x + 4.0
    } else if x > 1.25 && x <= 1.75 {
        2.0
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvectionConfig {
    pub n_cells: usize,
    pub degree: usize,
    pub lo: f64,
    pub hi: f64,
    pub velocity: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl Default for AdvectionConfig {
    fn default() -> Self {
        Self { n_cells: 300, degree: 3, lo: 0.0, hi: 3.0, velocity: 1.0, dt: 1e-3, n_steps: 1000 }
    }
}

/// Cell averages after every step of an unlimited periodic RK4 DG run.
#[derive(Clone, Debug)]
pub struct AdvectionRun {
    pub h: f64,
    pub snapshots: Vec<Vec<f64>>,
    pub final_solution: DgSolution,
    /// `dt |a| / h` against the linear stability limit `1 / (2k + 1)`.
    pub cfl: f64,
    pub warning: Option<String>,
}

pub fn advect_1d_rkdg(cfg: &AdvectionConfig, initial: impl Fn(f64) -> f64) -> Result<AdvectionRun> {
    let mesh = Mesh::new_1d(cfg.n_cells, cfg.lo, cfg.hi)?;
    let basis = Basis::new(BasisKind::ModalP(cfg.degree), 1)?;
    let h = mesh.h();
    let cfl = cfg.dt * cfg.velocity.abs() / h;
    let limit = 1.0 / (2 * cfg.degree + 1) as f64;
    let warning = (cfl > limit).then(|| format!("dt = {} gives CFL {cfl:.3} above the stability estimate {limit:.3}", cfg.dt));
    let op = DgOperator::new(Advection { velocity: [cfg.velocity, 0.0] }, mesh.clone(), basis.clone(), Boundaries::periodic())?;
    let mut sol = DgSolution::from_function(mesh, basis, 1, |x| vec![initial(x[0])])?;
    let mut rhs = |c: &[f64], t: f64, out: &mut [f64]| op.rhs_coeffs(c, t, out);
    let mut snapshots = Vec::with_capacity(cfg.n_steps);
    let mut t = 0.0;
    for _ in 0..cfg.n_steps {
        rk4_step(&mut sol.coeffs, t, cfg.dt, &mut rhs, &mut no_hook)?;
        t += cfg.dt;
        snapshots.push(sol.averages());
    }
    Ok(AdvectionRun { h, snapshots, final_solution: sol, cfl, warning })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaxConfig {
    pub n_cells: usize,
    pub lo: f64,
    pub hi: f64,
    pub interface: f64,
    pub time: f64,
    pub states: RiemannStates,
    /// Cells perturbed on each side of the shock.
    pub n_perturbed: usize,
    /// Scales of `max |rho|`, `max |m|`, `max |E|` in the perturbation.
    pub amplitudes: [f64; 3],
    pub n_datasets: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl Default for LaxConfig {
    fn default() -> Self {
        Self {
            n_cells: 400,
            lo: -5.0,
            hi: 5.0,
            interface: 0.0,
            time: 1.3,
            states: RiemannStates::lax(),
            n_perturbed: 10,
            amplitudes: [0.1, 0.01, 0.1],
            n_datasets: 1000,
            seed: 2024,
            epsilon: 1e-13,
        }
    }
}

/// Exact cell averages of the shock tube solution and the index of the cell
/// containing the shock.
pub fn lax_base_field(cfg: &LaxConfig) -> Result<(CellAverageField, usize)> {
    let rp = ExactRiemann::new(cfg.states)?;
    let h = (cfg.hi - cfg.lo) / cfg.n_cells as f64;
    let mut data = Vec::with_capacity(3 * cfg.n_cells);
    for i in 0..cfg.n_cells {
        let a = cfg.lo + i as f64 * h;
        data.extend(rp.cell_average(a, a + h, cfg.interface, cfg.time));
    }
    let speeds = rp.wave_speeds();
    // The Lax data has its shock on the right.
    let x_shock = cfg.interface + speeds[4] * cfg.time;
    let shock_cell = ((x_shock - cfg.lo) / h).floor() as usize;
    let field = CellAverageField::new(1, h, vec![cfg.lo, cfg.hi], data)?;
    Ok((field, shock_cell))
}

/// Perturbed copies of the base field: the `n_perturbed` cells just ahead of
/// the shock lose `(a_rho max|rho| xi_rho, a_m max|m| xi_m, a_E max|E| xi_E)`
/// with `xi ~ U[1, 2]`, and the cells just behind it gain the same amounts.
/// Draws that leave every cell admissible are discarded, so every returned
/// field violates `G^eps` (unless all amplitudes are zero).
pub fn lax_perturbation_dataset(cfg: &LaxConfig) -> Result<Vec<CellAverageField>> {
    let (base, shock) = lax_base_field(cfg)?;
    let np = cfg.n_perturbed;
    if shock < np || shock + np >= base.n_cells() {
        return Err(SimError::Config("perturbed cells do not fit around the shock".into()));
    }
    let maxabs = |j: usize| base.column(j).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = [cfg.amplitudes[0] * maxabs(0), cfg.amplitudes[1] * maxabs(1), cfg.amplitudes[2] * maxabs(2)];
    let set = AdmissibleSet::with_epsilon(cfg.epsilon)?;
    let trivial = scale.iter().all(|s| *s == 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n_datasets);
    while out.len() < cfg.n_datasets {
        let mut f = base.clone();
        for k in 0..np {
            let (ahead, behind) = (shock + 1 + k, shock - np + k);
            for j in 0..3 {
                let d = scale[j] * rng.random_range(1.0..=2.0);
                f.row_mut(ahead)[j] -= d;
                f.row_mut(behind)[j] += d;
            }
        }
        if trivial || !f.violating_rows(&set).is_empty() {
            out.push(f);
        }
    }
    Ok(out)
}
