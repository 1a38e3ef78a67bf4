//! Numerical projection used only when no closed-form candidate survives.
//!
//! For fixed `(rho, m)` the best energy is `max(w, eps + |m|^2 / (2 rho))`,
//! which leaves the convex, C^1 problem
//!   min_{rho >= eps, m}  phi = 1/2 (rho - u)^2 + 1/2 |m - v|^2 + 1/2 max(0, eps + |m|^2/(2 rho) - w)^2
//! solved by projected gradient with Armijo backtracking on the box `rho >= eps`.

use crate::state::ConservedState;

const MAX_ITER: usize = 10_000;
const TOL: f64 = 1e-12;
const STEP0: f64 = 0.1;

pub(super) fn project_numerically(s: &ConservedState, eps: f64) -> ConservedState {
    let u = s.rho();
    let w = s.energy();
    let dim = s.dim();
    let v = [s.momentum()[0], if dim == 2 { s.momentum()[1] } else { 0.0 }];

    let phi = |rho: f64, m: [f64; 2]| {
        let excess = (eps + (m[0] * m[0] + m[1] * m[1]) / (2.0 * rho) - w).max(0.0);
        0.5 * ((rho - u).powi(2) + (m[0] - v[0]).powi(2) + (m[1] - v[1]).powi(2) + excess * excess)
    };
    let grad = |rho: f64, m: [f64; 2]| {
        let msq = m[0] * m[0] + m[1] * m[1];
        let excess = (eps + msq / (2.0 * rho) - w).max(0.0);
        [
            rho - u - excess * msq / (2.0 * rho * rho),
            m[0] - v[0] + excess * m[0] / rho,
            m[1] - v[1] + excess * m[1] / rho,
        ]
    };

    let mut rho = u.max(eps);
    let mut m = v;
    let mut f = phi(rho, m);
    let mut step = STEP0;
    for _ in 0..MAX_ITER {
        let g = grad(rho, m);
        let mut accepted = false;
        for _ in 0..60 {
            let nr = (rho - step * g[0]).max(eps);
            let nm = [m[0] - step * g[1], m[1] - step * g[2]];
            let d = [nr - rho, nm[0] - m[0], nm[1] - m[1]];
            let decrease = g[0] * d[0] + g[1] * d[1] + g[2] * d[2];
            let nf = phi(nr, nm);
            if nf <= f + 1e-4 * decrease {
                let moved = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                rho = nr;
                m = nm;
                f = nf;
                accepted = true;
                if moved <= TOL * (1.0 + rho.abs() + m[0].abs() + m[1].abs()) {
                    return finish(rho, m, w, eps, dim);
                }
                step = (step * 2.0).min(1.0);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    finish(rho, m, w, eps, dim)
}

fn finish(rho: f64, m: [f64; 2], w: f64, eps: f64, dim: usize) -> ConservedState {
    let msq = m[0] * m[0] + m[1] * m[1];
    let mut e = w.max(eps + msq / (2.0 * rho));
    while 2.0 * rho * e - msq < 2.0 * rho * eps {
        e = e.next_up();
    }
    if dim == 1 {
        ConservedState::one_d(rho, m[0], e)
    } else {
        ConservedState::two_d(rho, m[0], m[1], e)
    }
}
