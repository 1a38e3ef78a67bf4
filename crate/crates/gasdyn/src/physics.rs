//! Flux functions of the conservation laws the DG operator can assemble.

/// A hyperbolic system `u_t + sum_a (F_a(u))_{x_a} = 0`.
pub trait Physics: Sync + Send {
    fn n_comp(&self) -> usize;
    /// Flux in coordinate direction `axis`.
    fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]);
    /// Largest characteristic speed in direction `axis`.
    fn wave_speed(&self, u: &[f64], axis: usize) -> f64;
    /// Largest characteristic speed over all directions (used for time steps).
    fn max_speed(&self, u: &[f64]) -> f64;
    /// Mirror state across a wall normal to `axis`.
    fn reflect(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        out.copy_from_slice(u);
        let _ = axis;
    }
}

/// Compressible Euler equations of an ideal gas, states `[rho, m.., E]`.
#[derive(Clone, Copy, Debug)]
pub struct Euler {
    pub dim: usize,
    pub gamma: f64,
}

impl Euler {
    pub fn new(dim: usize, gamma: f64) -> Self {
        Self { dim, gamma }
    }

    #[inline]
    pub fn pressure(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let msq: f64 = u[1..n - 1].iter().map(|m| m * m).sum();
        (self.gamma - 1.0) * (u[n - 1] - 0.5 * msq / u[0])
    }

    #[inline]
    fn sound_speed(&self, u: &[f64]) -> f64 {
        (self.gamma * self.pressure(u).max(0.0) / u[0]).sqrt()
    }

    /// Conserved state from `(rho, velocity, p)`.
    pub fn conserved(&self, rho: f64, vel: &[f64], p: f64) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.dim + 2);
        u.push(rho);
        u.extend(vel.iter().map(|v| rho * v));
        let ke: f64 = vel.iter().map(|v| v * v).sum::<f64>() * 0.5 * rho;
        u.push(p / (self.gamma - 1.0) + ke);
        u
    }
}

impl Physics for Euler {
    fn n_comp(&self) -> usize {
        self.dim + 2
    }

    #[inline]
    fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        let n = u.len();
        let p = self.pressure(u);
        let vel = u[1 + axis] / u[0];
        out[0] = u[1 + axis];
        for k in 1..n - 1 {
            out[k] = u[k] * vel;
        }
        out[1 + axis] += p;
        out[n - 1] = (u[n - 1] + p) * vel;
    }

    #[inline]
    fn wave_speed(&self, u: &[f64], axis: usize) -> f64 {
        (u[1 + axis] / u[0]).abs() + self.sound_speed(u)
    }

    fn max_speed(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let msq: f64 = u[1..n - 1].iter().map(|m| m * m).sum();
        msq.sqrt() / u[0] + self.sound_speed(u)
    }

    fn reflect(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        out.copy_from_slice(u);
        out[1 + axis] = -u[1 + axis];
    }
}

/// Linear advection `u_t + a . grad u = 0` of one scalar.
#[derive(Clone, Copy, Debug)]
pub struct Advection {
    pub velocity: [f64; 2],
}

impl Physics for Advection {
    fn n_comp(&self) -> usize {
        1
    }

    fn flux(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        out[0] = self.velocity[axis] * u[0];
    }

    fn wave_speed(&self, _u: &[f64], axis: usize) -> f64 {
        self.velocity[axis].abs()
    }

    fn max_speed(&self, _u: &[f64]) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// Local Lax-Friedrichs flux along `+axis` between the lower state `a` and
/// the upper state `b`. `fa`, `fb` are scratch of length `n_comp`.
#[inline]
pub fn llf_flux<P: Physics + ?Sized>(
    physics: &P,
    a: &[f64],
    b: &[f64],
    axis: usize,
    fa: &mut [f64],
    fb: &mut [f64],
    out: &mut [f64],
) -> f64 {
    physics.flux(a, axis, fa);
    physics.flux(b, axis, fb);
    let lambda = physics.wave_speed(a, axis).max(physics.wave_speed(b, axis));
    for k in 0..out.len() {
        out[k] = 0.5 * (fa[k] + fb[k]) - 0.5 * lambda * (b[k] - a[k]);
    }
    lambda
}
