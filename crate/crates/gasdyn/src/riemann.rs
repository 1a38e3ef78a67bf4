//! Exact solution of the Riemann problem for the ideal-gas Euler equations.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }

    pub fn conserved(&self, gamma: f64) -> [f64; 3] {
        [self.rho, self.rho * self.u, self.p / (gamma - 1.0) + 0.5 * self.rho * self.u * self.u]
    }

    pub fn flux(&self, gamma: f64) -> [f64; 3] {
        let e = self.p / (gamma - 1.0) + 0.5 * self.rho * self.u * self.u;
        [self.rho * self.u, self.rho * self.u * self.u + self.p, (e + self.p) * self.u]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiemannStates {
    pub left: Primitive,
    pub right: Primitive,
    pub gamma: f64,
}

impl RiemannStates {
    /// The Lax shock tube.
    pub fn lax() -> Self {
        Self { left: Primitive::new(0.445, 0.698, 3.528), right: Primitive::new(0.5, 0.0, 0.571), gamma: 1.4 }
    }

    /// The Sod shock tube.
    pub fn sod() -> Self {
        Self { left: Primitive::new(1.0, 0.0, 1.0), right: Primitive::new(0.125, 0.0, 0.1), gamma: 1.4 }
    }
}

/// Solved Riemann problem: star state plus wave speeds, sampled in `x / t`.
#[derive(Clone, Copy, Debug)]
pub struct ExactRiemann {
    pub states: RiemannStates,
    pub p_star: f64,
    pub u_star: f64,
    /// Relative residual of the pressure equation at `p_star`.
    pub residual: f64,
}

impl ExactRiemann {
    pub fn new(states: RiemannStates) -> Result<Self> {
        let RiemannStates { left: l, right: r, gamma: g } = states;
        if !(l.rho > 0.0 && r.rho > 0.0 && l.p > 0.0 && r.p > 0.0 && g > 1.0) {
            return Err(SimError::Config(format!("Riemann states must have positive density and pressure: {states:?}")));
        }
        let (cl, cr) = ((g * l.p / l.rho).sqrt(), (g * r.p / r.rho).sqrt());
        let du = r.u - l.u;
        if 2.0 / (g - 1.0) * (cl + cr) <= du {
            return Err(SimError::Config("initial data generate vacuum".into()));
        }
        let f = |p: f64| {
            let (fl, dl) = wave_function(p, &l, g);
            let (fr, dr) = wave_function(p, &r, g);
            (fl + fr + du, dl + dr)
        };
        // Two-rarefaction guess, positive by construction.
        let z = (g - 1.0) / (2.0 * g);
        let mut p = ((cl + cr - 0.5 * (g - 1.0) * du) / (cl / l.p.powf(z) + cr / r.p.powf(z))).powf(1.0 / z);
        let scale = l.p.max(r.p);
        for _ in 0..100 {
            let (val, der) = f(p);
            let next = (p - val / der).max(1e-14 * scale);
            let done = (next - p).abs() <= 1e-15 * (next + p);
            p = next;
            if done {
                break;
            }
        }
        let (fl, _) = wave_function(p, &l, g);
        let (fr, _) = wave_function(p, &r, g);
        let residual = (fl + fr + du).abs() / (cl + cr + du.abs());
        let u_star = 0.5 * (l.u + r.u) + 0.5 * (fr - fl);
        Ok(Self { states, p_star: p, u_star, residual })
    }

    /// Density between the contact and the wave on `side`.
    pub fn star_density(&self, side: &Primitive) -> f64 {
        let g = self.states.gamma;
        let ratio = self.p_star / side.p;
        if ratio > 1.0 {
            let k = (g - 1.0) / (g + 1.0);
            side.rho * (ratio + k) / (ratio * k + 1.0)
        } else {
            side.rho * ratio.powf(1.0 / g)
        }
    }

    /// Speeds `[left head, left tail, contact, right tail, right head]`;
    /// head equals tail for shocks.
    pub fn wave_speeds(&self) -> [f64; 5] {
        let g = self.states.gamma;
        let (l, r) = (self.states.left, self.states.right);
        let (cl, cr) = ((g * l.p / l.rho).sqrt(), (g * r.p / r.rho).sqrt());
        let (lh, lt) = if self.p_star > l.p {
            let s = l.u - cl * ((g + 1.0) / (2.0 * g) * self.p_star / l.p + (g - 1.0) / (2.0 * g)).sqrt();
            (s, s)
        } else {
            let c_star = cl * (self.p_star / l.p).powf((g - 1.0) / (2.0 * g));
            (l.u - cl, self.u_star - c_star)
        };
        let (rt, rh) = if self.p_star > r.p {
            let s = r.u + cr * ((g + 1.0) / (2.0 * g) * self.p_star / r.p + (g - 1.0) / (2.0 * g)).sqrt();
            (s, s)
        } else {
            let c_star = cr * (self.p_star / r.p).powf((g - 1.0) / (2.0 * g));
            (self.u_star + c_star, r.u + cr)
        };
        [lh, lt, self.u_star, rt, rh]
    }

    /// Solution at `x / t = xi`.
    pub fn sample(&self, xi: f64) -> Primitive {
        let g = self.states.gamma;
        let (l, r) = (self.states.left, self.states.right);
        let [lh, lt, contact, rt, rh] = self.wave_speeds();
        if xi <= contact {
            if xi <= lh {
                l
            } else if xi >= lt {
                Primitive::new(self.star_density(&l), self.u_star, self.p_star)
            } else {
                let cl = (g * l.p / l.rho).sqrt();
                let c = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * (l.u - xi));
                let u = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * l.u + xi);
                let rho = l.rho * (c / cl).powf(2.0 / (g - 1.0));
                Primitive::new(rho, u, l.p * (c / cl).powf(2.0 * g / (g - 1.0)))
            }
        } else if xi >= rh {
            r
        } else if xi <= rt {
            Primitive::new(self.star_density(&r), self.u_star, self.p_star)
        } else {
            let cr = (g * r.p / r.rho).sqrt();
            let c = 2.0 / (g + 1.0) * (cr - 0.5 * (g - 1.0) * (r.u - xi));
            let u = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * r.u + xi);
            let rho = r.rho * (c / cr).powf(2.0 / (g - 1.0));
            Primitive::new(rho, u, r.p * (c / cr).powf(2.0 * g / (g - 1.0)))
        }
    }

    /// Exact conserved cell averages over `[a, b]` at time `t > 0` (interface
    /// at `x0`). Cells are split at the wave fronts and the smooth pieces
    /// integrated with 8-point Gauss rules.
    pub fn cell_average(&self, a: f64, b: f64, x0: f64, t: f64) -> [f64; 3] {
        let g = self.states.gamma;
        let mut cuts = vec![a];
        for s in self.wave_speeds() {
            let x = x0 + s * t;
            if x > a && x < b {
                cuts.push(x);
            }
        }
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        let rule = idplim_core::dg::gauss_legendre(8);
        let mut acc = [0.0; 3];
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            for (xi, wq) in rule.nodes.iter().zip(&rule.weights) {
                let x = 0.5 * (lo + hi) + half * xi;
                let u = self.sample((x - x0) / t).conserved(g);
                for k in 0..3 {
                    acc[k] += wq * half * u[k];
                }
            }
        }
        acc.map(|v| v / (b - a))
    }
}

/// Toro's pressure function `f_K(p)` and its derivative.
fn wave_function(p: f64, s: &Primitive, g: f64) -> (f64, f64) {
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        let c = (g * s.p / s.rho).sqrt();
        let e = (g - 1.0) / (2.0 * g);
        let r = (p / s.p).powf(e);
        (2.0 * c / (g - 1.0) * (r - 1.0), (p / s.p).powf(-(g + 1.0) / (2.0 * g)) / (s.rho * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_state_is_preserved() {
        let s = Primitive::new(0.8, 0.3, 1.2);
        let rp = ExactRiemann::new(RiemannStates { left: s, right: s, gamma: 1.4 }).unwrap();
        assert!((rp.p_star - 1.2).abs() < 1e-13 && (rp.u_star - 0.3).abs() < 1e-13);
        for xi in [-3.0, 0.0, 0.3, 2.0] {
            let q = rp.sample(xi);
            assert!((q.rho - 0.8).abs() < 1e-12 && (q.u - 0.3).abs() < 1e-12 && (q.p - 1.2).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_is_rejected() {
        let st = RiemannStates { left: Primitive::new(1.0, -10.0, 0.1), right: Primitive::new(1.0, 10.0, 0.1), gamma: 1.4 };
        assert!(ExactRiemann::new(st).is_err());
    }
}
