//! Run configuration for the 2D benchmarks, read from flat `key = value`
//! text.
//!
//! Recognized keys (blank lines and `#` comments are ignored):
//!
//! | key | meaning |
//! |-----|---------|
//! | `mesh_n` | cells per direction (>= 4) |
//! | `degree` | polynomial degree of the DG basis |
//! | `cfl` | CFL number in (0, 1] |
//! | `t_end` | final time |
//! | `dt` | fixed time step, or `none` for the CFL rule |
//! | `gamma_gas` | ratio of specific heats |
//! | `epsilon` | floor of the admissible set `G^eps` |
//! | `limiter` | `on` / `off` |
//! | `norm` | `l1` / `l2` |
//! | `solver_gamma`, `lambda`, `tol`, `max_iter`, `inner_max_iter`, `alpha` | solver parameters |
//! | `restrict_region`, `region_threshold` | limit only near bad cells |
//! | `boundary_left`, `boundary_right`, `boundary_bottom`, `boundary_top` | `periodic`, `reflective`, `outflow`, `inflow` |
//! | `rng_seed` | seed for randomized inputs |
//! | `snapshots` | number of evenly spaced output snapshots after `t = 0` |
//!
//! `inflow` means the state the benchmark prescribes on that edge (the jet
//! nozzle, the exact manufactured solution, the ambient Sedov state).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use idplim_core::limiters::{LimiterOptions, Norm};
use idplim_core::solvers::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Periodic,
    Reflective,
    Outflow,
    Inflow,
}

impl FromStr for BoundaryKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Self::Periodic),
            "reflective" | "wall" => Ok(Self::Reflective),
            "outflow" => Ok(Self::Outflow),
            "inflow" => Ok(Self::Inflow),
            other => Err(SimError::Config(format!("unknown boundary kind '{other}'"))),
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::Reflective => "reflective",
            Self::Outflow => "outflow",
            Self::Inflow => "inflow",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mesh_n: usize,
    pub degree: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub gamma_gas: f64,
    /// Cell-average limiter settings; `limiter.epsilon` is the `G^eps` floor.
    pub limiter: LimiterOptions,
    pub limiter_enabled: bool,
    /// Edges `x-`, `x+`, `y-`, `y+`.
    pub boundary: [BoundaryKind; 4],
    pub rng_seed: u64,
    pub snapshots: usize,
}

impl SimConfig {
    /// Reduced Sedov blast: 40x40 P2, SSP-RK3, CFL 0.2, restricted region.
    pub fn sedov() -> Self {
        Self {
            mesh_n: 40,
            degree: 2,
            cfl: 0.2,
            t_end: 0.05,
            dt: None,
            gamma_gas: 1.4,
            limiter: limiter(1e-13, 1e-13, 1e-7, true),
            limiter_enabled: true,
            boundary: [BoundaryKind::Reflective, BoundaryKind::Outflow, BoundaryKind::Reflective, BoundaryKind::Outflow],
            rng_seed: 0,
            snapshots: 1,
        }
    }

    /// Reduced Mach 2000 jet: 80x80 Q3 spectral elements, RK4, CFL 1/7.
    pub fn jet() -> Self {
        Self {
            mesh_n: 80,
            degree: 3,
            cfl: 1.0 / 7.0,
            t_end: 1e-4,
            dt: None,
            gamma_gas: 5.0 / 3.0,
            limiter: limiter(1e-8, 1e-8, 1e-7, false),
            limiter_enabled: true,
            boundary: [BoundaryKind::Inflow, BoundaryKind::Outflow, BoundaryKind::Outflow, BoundaryKind::Outflow],
            rng_seed: 0,
            snapshots: 1,
        }
    }

    /// Manufactured-solution convergence run on one mesh.
    pub fn convergence() -> Self {
        Self {
            mesh_n: 25,
            degree: 2,
            cfl: 0.2,
            t_end: 0.1,
            dt: Some(5e-4),
            gamma_gas: 1.4,
            limiter: limiter(1e-13, 1e-13, 1e-3, false),
            limiter_enabled: true,
            boundary: [BoundaryKind::Inflow; 4],
            rng_seed: 0,
            snapshots: 1,
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |e: &dyn fmt::Display| SimError::Config(format!("{key} = '{value}': {e}"));
        macro_rules! parse {
            () => {
                value.parse().map_err(|e| bad(&e))?
            };
        }
        let cfg = &mut self.limiter.solver_cfg;
        match key.trim() {
            "mesh_n" => self.mesh_n = parse!(),
            "degree" => self.degree = parse!(),
            "cfl" => self.cfl = parse!(),
            "t_end" => self.t_end = parse!(),
            "dt" => self.dt = if value.eq_ignore_ascii_case("none") { None } else { Some(parse!()) },
            "gamma_gas" => self.gamma_gas = parse!(),
            "epsilon" => self.limiter.epsilon = parse!(),
            "limiter" => self.limiter_enabled = parse_switch(value).ok_or_else(|| bad(&"expected on/off"))?,
            "norm" => self.limiter.norm = value.parse::<Norm>().map_err(|e| bad(&e))?,
            "solver_gamma" => cfg.gamma_step = parse!(),
            "lambda" => cfg.lambda_relax = parse!(),
            "tol" => cfg.tol = parse!(),
            "max_iter" => cfg.max_iter = parse!(),
            "inner_max_iter" => cfg.inner_max_iter = parse!(),
            "alpha" => self.limiter.alpha = parse!(),
            "restrict_region" => {
                self.limiter.restrict_region = parse_switch(value).ok_or_else(|| bad(&"expected on/off"))?
            }
            "region_threshold" => self.limiter.region_threshold = parse!(),
            "boundary_left" => self.boundary[0] = value.parse()?,
            "boundary_right" => self.boundary[1] = value.parse()?,
            "boundary_bottom" => self.boundary[2] = value.parse()?,
            "boundary_top" => self.boundary[3] = value.parse()?,
            "rng_seed" => self.rng_seed = parse!(),
            "snapshots" => self.snapshots = parse!(),
            other => return Err(SimError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_str(mut self, text: &str) -> Result<Self> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SimError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(self)
    }

    pub fn apply_file(self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        self.apply_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(SimError::Config(m));
        if self.mesh_n < 4 {
            return fail(format!("mesh_n must be at least 4, got {}", self.mesh_n));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return fail(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end must be positive, got {}", self.t_end));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return fail(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.gamma_gas > 1.0) {
            return fail(format!("gamma_gas must exceed 1, got {}", self.gamma_gas));
        }
        for a in 0..2 {
            let (lo, hi) = (self.boundary[2 * a], self.boundary[2 * a + 1]);
            if (lo == BoundaryKind::Periodic) != (hi == BoundaryKind::Periodic) {
                return fail("periodic boundaries must be paired".into());
            }
        }
        self.limiter.validate()?;
        Ok(())
    }
}

fn limiter(epsilon: f64, tol: f64, gamma_step: f64, restrict_region: bool) -> LimiterOptions {
    LimiterOptions {
        norm: Norm::L2,
        epsilon,
        solver_cfg: SolverConfig { gamma_step, tol, max_iter: 100_000, inner_max_iter: 100_000, ..SolverConfig::default() },
        restrict_region,
        region_threshold: 1e-10,
        alpha: 1.0,
    }
}

fn parse_switch(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let text = "# reduced run\nmesh_n = 16\ncfl=0.1 # smaller\nnorm = l1\ndt = none\nboundary_top = reflective\nlimiter = off\n";
        let cfg = SimConfig::sedov().apply_str(text).unwrap();
        assert_eq!(cfg.mesh_n, 16);
        assert_eq!(cfg.cfl, 0.1);
        assert_eq!(cfg.limiter.norm, Norm::L1);
        assert_eq!(cfg.boundary[3], BoundaryKind::Reflective);
        assert!(!cfg.limiter_enabled);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SimConfig::sedov().apply_str("mesh = 3").is_err());
        assert!(SimConfig::sedov().apply_str("mesh_n 3").is_err());
        assert!(SimConfig::sedov().apply_str("cfl = fast").is_err());
        assert!(SimConfig::sedov().apply_str("mesh_n = 3").unwrap().validate().is_err());
        assert!(SimConfig::sedov().apply_str("cfl = 1.5").unwrap().validate().is_err());
        assert!(SimConfig::sedov().apply_str("boundary_left = periodic").unwrap().validate().is_err());
    }
}
