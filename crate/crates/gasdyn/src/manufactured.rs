//! Manufactured-solution convergence study for the 2D Euler discretization.
//!
//! The exact fields are a density wave `rho = sin^16(pi (x + y - c t)) + floor`
//! carried by a constant velocity at constant pressure. With `c = u + v`
//! (the reference case) they solve the Euler equations exactly and the
//! source vanishes; other wave speeds give a genuine source.

use std::path::Path;
use std::sync::Arc;

use idplim_core::dg::{gauss_legendre, tensor_rule, Basis, BasisKind, DgSolution, Mesh};
use idplim_core::limiters::Norm;
use serde::{Deserialize, Serialize};

use crate::benchmarks::boundaries_from;
use crate::boundary::StateFn;
use crate::config::SimConfig;
use crate::error::Result;
use crate::euler2d::EulerSimulation;
use crate::operator::DgOperator;
use crate::physics::Euler;
use crate::time::TimeScheme;

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manufactured {
    pub gamma_gas: f64,
    pub velocity: [f64; 2],
    pub pressure: f64,
    pub floor: f64,
    pub power: i32,
    /// Speed `c` of the phase `pi (x + y - c t)`.
    pub wave_speed: f64,
}

impl Default for Manufactured {
    fn default() -> Self {
        Self { gamma_gas: 1.4, velocity: [1.0, 1.0], pressure: 1e-13, floor: 1e-13, power: 16, wave_speed: 2.0 }
    }
}

impl Manufactured {
    fn phase(&self, x: [f64; 2], t: f64) -> f64 {
        PI * (x[0] + x[1] - self.wave_speed * t)
    }

    pub fn density(&self, x: [f64; 2], t: f64) -> f64 {
        self.phase(x, t).sin().powi(self.power) + self.floor
    }

    /// Conserved state `[rho, rho u, rho v, E]`.
    pub fn state(&self, x: [f64; 2], t: f64) -> Vec<f64> {
        Euler::new(2, self.gamma_gas).conserved(self.density(x, t), &self.velocity, self.pressure)
    }

    /// `S = U_t + div F(U)`. With constant velocity and pressure every
    /// component is a multiple of `rho_t + u . grad rho`.
    pub fn source(&self, x: [f64; 2], t: f64, out: &mut [f64]) {
        let s = self.phase(x, t).sin();
        let c = self.phase(x, t).cos();
        let drho = self.power as f64 * s.powi(self.power - 1) * c * PI;
        let [u, v] = self.velocity;
        let transport = drho * (u + v - self.wave_speed);
        out[0] = transport;
        out[1] = u * transport;
        out[2] = v * transport;
        out[3] = 0.5 * (u * u + v * v) * transport;
    }
}

/// Errors of one run, by the quadrature formulas
/// `|e|_{L2_h}^2 = h^2 sum_cells sum_q w_q |e(q)|^2` and
/// `|e|_{L1_h} = h^2 sum_cells sum_q w_q |e(q)|` with the `(k+1)^2`-point
/// Gauss rule of the scheme (weights summing to one).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteErrors {
    pub l2_density: f64,
    pub l1_density: f64,
    /// All four components together.
    pub l2_state: f64,
    pub l1_state: f64,
}

pub fn discrete_errors(sol: &DgSolution, exact: impl Fn([f64; 2]) -> Vec<f64>) -> DiscreteErrors {
    let dim = sol.mesh.dim;
    let rule = tensor_rule(&gauss_legendre(sol.basis.degree() + 1), dim);
    let table = sol.basis.table(&rule.points);
    let norm = (1u32 << dim) as f64;
    let area = sol.mesh.h().powi(dim as i32);
    let (nc, nb) = (sol.n_comp, sol.n_basis());
    let mut e = DiscreteErrors::default();
    for cell in 0..sol.n_cells() {
        let c = sol.cell(cell);
        for (p, (xi, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let ex = exact(sol.mesh.map(cell, *xi));
            let w = area * w / norm;
            for k in 0..nc {
                let d = (table.eval(p, &c[k * nb..(k + 1) * nb]) - ex[k]).abs();
                if k == 0 {
                    e.l2_density += w * d * d;
                    e.l1_density += w * d;
                }
                e.l2_state += w * d * d;
                e.l1_state += w * d;
            }
        }
    }
    e.l2_density = e.l2_density.sqrt();
    e.l2_state = e.l2_state.sqrt();
    e
}

/// Modal `P^k` simulation of the manufactured problem with RK4; `inflow`
/// edges take the exact solution.
pub fn manufactured_simulation(cfg: &SimConfig, m: &Manufactured) -> Result<EulerSimulation> {
    cfg.validate()?;
    let mesh = Mesh::new_2d(cfg.mesh_n, cfg.mesh_n, [0.0, 0.0], [1.0, 1.0])?;
    let basis = Basis::new(BasisKind::ModalP(cfg.degree), 2)?;
    let m = *m;
    let exact: StateFn = Arc::new(move |x, t| m.state(x, t));
    let op = DgOperator::new(Euler::new(2, m.gamma_gas), mesh.clone(), basis.clone(), boundaries_from(&cfg.boundary, &exact))?
        .with_source(Box::new(move |x, t, out| m.source(x, t, out)));
    let sol = DgSolution::from_function(mesh, basis, 4, |x| m.state(x, 0.0))?;
    EulerSimulation::new(op, sol, TimeScheme::Rk4, cfg.limiter_enabled.then_some(cfg.limiter))
}

/// One line of `errors.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub norm: String,
    pub mesh_n: usize,
    pub h: f64,
    pub l2_density: f64,
    pub rate_l2_density: Option<f64>,
    pub l1_density: f64,
    pub rate_l1_density: Option<f64>,
    pub l2_state: f64,
    pub rate_l2_state: Option<f64>,
    pub l1_state: f64,
    pub rate_l1_state: Option<f64>,
    pub limited_stages: usize,
    pub limited_steps: usize,
}

/// `ln(e_coarse / e_fine) / ln 2`.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).ln() / 2f64.ln()
}

/// Runs `base` on every mesh in `meshes` to `base.t_end` and tabulates the
/// errors and rates between consecutive meshes.
pub fn manufactured_convergence(base: &SimConfig, meshes: &[usize], m: &Manufactured) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(meshes.len());
    let norm = if base.limiter_enabled { base.limiter.norm.to_string() } else { "none".into() };
    for &n in meshes {
        let cfg = SimConfig { mesh_n: n, ..base.clone() };
        let mut sim = manufactured_simulation(&cfg, m)?;
        sim.run_to(cfg.t_end, cfg.cfl, cfg.dt, 1, |_, _| Ok(()))?;
        let t = sim.time;
        let e = discrete_errors(&sim.sol, |x| m.state(x, t));
        let stats = sim.stats();
        let prev = rows.last();
        let r = |f: fn(&ConvergenceRow) -> f64, v: f64| prev.map(|p| rate(f(p), v));
        rows.push(ConvergenceRow {
            degree: cfg.degree,
            norm: norm.clone(),
            mesh_n: n,
            h: sim.op.mesh.h(),
            rate_l2_density: r(|p| p.l2_density, e.l2_density),
            rate_l1_density: r(|p| p.l1_density, e.l1_density),
            rate_l2_state: r(|p| p.l2_state, e.l2_state),
            rate_l1_state: r(|p| p.l1_state, e.l1_state),
            l2_density: e.l2_density,
            l1_density: e.l1_density,
            l2_state: e.l2_state,
            l1_state: e.l1_state,
            limited_stages: stats.limited_stages,
            limited_steps: stats.limited_steps,
        });
    }
    Ok(rows)
}

/// Convergence study of one degree with the l2 limiter (read in the L2_h
/// columns) and the l1 limiter (read in the L1_h columns).
pub fn convergence_study(base: &SimConfig, meshes: &[usize], m: &Manufactured) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for norm in [Norm::L2, Norm::L1] {
        let mut cfg = base.clone();
        cfg.limiter.norm = norm;
        rows.extend(manufactured_convergence(&cfg, meshes, m)?);
    }
    Ok(rows)
}

pub fn write_errors_csv(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
