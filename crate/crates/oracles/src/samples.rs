//! Seeded test inputs for the projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Floors cycled through by the projection samples.
pub const EPSILONS: [f64; 4] = [1e-13, 1e-8, 1e-3, 0.1];

/// One projection test case.
#[derive(Clone, Debug)]
pub struct ProjectionSample {
    pub point: Vec<f64>,
    pub epsilon: f64,
    pub adversarial: bool,
}

/// `n_random` points with N(0, 4) components followed by `n_adversarial`
/// points placed near the boundary, the corner, or degenerate momenta.
pub fn projection_samples(dim: usize, n_random: usize, n_adversarial: usize, seed: u64) -> Vec<ProjectionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 2.0).expect("valid normal");
    let nc = dim + 2;
    let mut out = Vec::with_capacity(n_random + n_adversarial);
    for k in 0..n_random {
        let point = (0..nc).map(|_| normal.sample(&mut rng)).collect();
        out.push(ProjectionSample { point, epsilon: EPSILONS[k % EPSILONS.len()], adversarial: false });
    }
    for k in 0..n_adversarial {
        let eps = EPSILONS[k % EPSILONS.len()];
        let point = adversarial_point(&mut rng, dim, eps, k % 8);
        out.push(ProjectionSample { point, epsilon: eps, adversarial: true });
    }
    out
}

fn adversarial_point(rng: &mut ChaCha8Rng, dim: usize, eps: f64, kind: usize) -> Vec<f64> {
    let tiny = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(-14.0..-3.0)) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut m: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
    let msq = |m: &[f64]| m.iter().map(|c| c * c).sum::<f64>();
    let (rho, e) = match kind {
        // Just outside the energy boundary at moderate density.
        0 => {
            let rho = rng.random_range(eps.max(0.01)..3.0);
            (rho, eps + msq(&m) / (2.0 * rho) - tiny(rng).abs())
        }
        // Density just below the floor, energy comfortable.
        1 => (eps - tiny(rng).abs() * eps.max(1e-3), 5.0 + msq(&m) / eps.max(1e-3)),
        // Near the corner.
        2 => {
            m.iter_mut().for_each(|c| *c = tiny(rng) * 1e-3);
            (eps + tiny(rng) * eps, eps + tiny(rng) * eps)
        }
        // Exactly zero momentum, energy below the floor.
        3 => {
            m.iter_mut().for_each(|c| *c = 0.0);
            (rng.random_range(-1.0..2.0), rng.random_range(-2.0..eps))
        }
        // Tiny momentum, negative energy.
        4 => {
            m.iter_mut().for_each(|c| *c = tiny(rng));
            (rng.random_range(-1.0..2.0), rng.random_range(-2.0..0.0))
        }
        // Huge momentum relative to density and energy.
        5 => {
            m.iter_mut().for_each(|c| *c *= 300.0);
            (rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0))
        }
        // Equal momentum components (2D tie in the dominant-axis choice).
        6 => {
            if dim == 2 {
                m[1] = if rng.random::<bool>() { m[0] } else { -m[0] };
            }
            (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }
        // Just inside the boundary (projection must be the identity).
        _ => {
            let rho = rng.random_range(eps.max(0.01)..3.0);
            (rho, eps + msq(&m) / (2.0 * rho) + tiny(rng).abs())
        }
    };
    let mut p = Vec::with_capacity(dim + 2);
    p.push(rho);
    p.extend(m);
    p.push(e);
    p
}

/// An admissible "exact" field of `n` rows with `dim` momenta and a
/// conservative perturbation of it that leaves at least one row outside
/// `G^eps`, both row-major. Energy margins are drawn down to `10 eps` so
/// that the perturbation can push cells out.
pub fn perturbed_pair(rng: &mut ChaCha8Rng, dim: usize, n: usize, eps: f64) -> (Vec<f64>, Vec<f64>) {
    let nc = dim + 2;
    loop {
        let mut exact = Vec::with_capacity(n * nc);
        for _ in 0..n {
            let rho: f64 = 10f64.powf(rng.random_range(-2.0..0.5));
            let m: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let msq: f64 = m.iter().map(|v| v * v).sum();
            exact.push(rho);
            exact.extend(&m);
            exact.push(msq / (2.0 * rho) + 10f64.powf(rng.random_range(-2.0..0.0)) + 10.0 * eps);
        }
        let mut raw = exact.clone();
        for _ in 0..rng.random_range(1..=3) {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i == j {
                continue;
            }
            for c in 0..nc {
                let d = rng.random_range(-0.5..0.5) * exact[i * nc + c].abs().max(0.2);
                raw[i * nc + c] -= d;
                raw[j * nc + c] += d;
            }
        }
        if raw.chunks_exact(nc).any(|r| !crate::admissible(r, eps)) {
            return (exact, raw);
        }
    }
}
