//! Slow, independent reference solvers used only by tests.
//!
//! None of these reuse the library's closed-form formulas. States are plain
//! slices `[rho, m.., E]`.

pub mod samples;

/// Projection onto `{rho >= eps, E - |m|^2/(2 rho) >= eps}` by bisection on
/// the energy multiplier `mu >= 0`.
///
/// For fixed `mu`, stationarity gives `E = w + mu`, `m = v rho / (rho + mu)`
/// and `rho = max(eps, r)` where `r` is the root of the increasing function
/// `rho - u - mu |v|^2 / (2 (rho + mu)^2)`. The constraint value
/// `eps - E + |m|^2 / (2 rho)` is nonincreasing in `mu`, so the optimal `mu`
/// is zero or the root of that value.
pub fn project_by_dual_bisection(x: &[f64], eps: f64) -> Vec<f64> {
    let n = x.len();
    assert!(n == 3 || n == 4, "state must have 3 or 4 components");
    let u = x[0];
    let w = x[n - 1];
    let v = &x[1..n - 1];
    let vsq: f64 = v.iter().map(|c| c * c).sum();

    let rho_of = |mu: f64| -> f64 {
        let h = |rho: f64| rho - u - mu * vsq / (2.0 * (rho + mu).powi(2));
        if mu == 0.0 {
            return u.max(eps);
        }
        if h(eps) >= 0.0 {
            return eps;
        }
        let mut hi = (0.5 * (u + (u * u + 0.5 * vsq).sqrt())).max(2.0 * eps) + 1.0;
        while h(hi) < 0.0 {
            hi *= 2.0;
        }
        bisect(h, eps, &mut hi);
        hi
    };
    let point = |mu: f64| -> Vec<f64> {
        let rho = rho_of(mu);
        let mut out = Vec::with_capacity(n);
        out.push(rho);
        out.extend(v.iter().map(|c| c * rho / (rho + mu)));
        out.push(w + mu);
        out
    };
    let g = |mu: f64| -> f64 {
        let p = point(mu);
        let msq: f64 = p[1..n - 1].iter().map(|c| c * c).sum();
        eps - p[n - 1] + msq / (2.0 * p[0])
    };

    if g(0.0) <= 0.0 {
        return point(0.0);
    }
    let mut hi = 1.0;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    bisect(|mu| -g(mu), 0.0, &mut hi);
    point(hi)
}

/// Bisection for an increasing function with `f(lo) < 0 <= f(hi)`; leaves the
/// smallest representable bracket end with `f >= 0` in `hi`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, hi: &mut f64) {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + *hi);
        if mid <= lo || mid >= *hi {
            break;
        }
        if f(mid) >= 0.0 {
            *hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Squared Euclidean distance.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact membership in the admissible set.
pub fn admissible(x: &[f64], eps: f64) -> bool {
    let n = x.len();
    let msq: f64 = x[1..n - 1].iter().map(|c| c * c).sum();
    x[0] >= eps && 2.0 * x[0] * x[n - 1] - msq >= 2.0 * x[0] * eps
}

/// Minimizer of `sum (x_i - u_i)^2` over `[lo, hi]^N` with `sum x = b`, by
/// enumerating all `3^N` assignments of each entry to lower bound, upper
/// bound or free. Free entries share one shift `x_i = u_i + nu`.
pub fn scalar_l2_active_set(u: &[f64], lo: f64, hi: f64, b: f64) -> Option<Vec<f64>> {
    let n = u.len();
    assert!(n <= 12, "exhaustive enumeration is exponential");
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut x = vec![0.0; n];
        let mut free = Vec::new();
        let mut fixed_sum = 0.0;
        for i in 0..n {
            match c % 3 {
                0 => {
                    x[i] = lo;
                    fixed_sum += lo;
                }
                1 => {
                    x[i] = hi;
                    fixed_sum += hi;
                }
                _ => free.push(i),
            }
            c /= 3;
        }
        let scale = 1.0 + b.abs();
        if free.is_empty() {
            if (fixed_sum - b).abs() > 1e-12 * scale {
                continue;
            }
        } else {
            let su: f64 = free.iter().map(|&i| u[i]).sum();
            let nu = (b - fixed_sum - su) / free.len() as f64;
            let mut ok = true;
            for &i in &free {
                x[i] = u[i] + nu;
                if x[i] < lo - 1e-12 || x[i] > hi + 1e-12 {
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
        }
        let obj = dist_sq(&x, u);
        if best.as_ref().is_none_or(|(bo, _)| obj < *bo) {
            best = Some((obj, x));
        }
    }
    best.map(|(_, x)| x)
}

/// Minimum of `sum |x_i - u_i|` over `[lo, hi]^N` with `sum x = b`, assuming
/// `N lo <= b <= N hi`: clipping costs `sum |clip(u_i) - u_i|` and moving the
/// remaining mismatch costs exactly its size.
pub fn scalar_l1_min(u: &[f64], lo: f64, hi: f64, b: f64) -> f64 {
    let clipped: Vec<f64> = u.iter().map(|x| x.clamp(lo, hi)).collect();
    let cost: f64 = clipped.iter().zip(u).map(|(c, x)| (c - x).abs()).sum();
    cost + (clipped.iter().sum::<f64>() - b).abs()
}

/// Euler l2 limiter reference: minimizes `sum_i |X_i - U_i|^2` subject to
/// every row admissible and column sums `b`, by ascent on the multiplier of
/// the column-sum constraint. Rows are `X_i = P(U_i + nu)`.
pub fn euler_l2_dual_ascent(rows: &[Vec<f64>], b: &[f64], eps: f64, max_iter: usize, tol: f64) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let nc = b.len();
    let mut nu = vec![0.0; nc];
    let mut out = Vec::new();
    for _ in 0..max_iter {
        out = rows
            .iter()
            .map(|r| {
                let shifted: Vec<f64> = r.iter().zip(&nu).map(|(a, s)| a + s).collect();
                project_by_dual_bisection(&shifted, eps)
            })
            .collect::<Vec<_>>();
        let mut worst: f64 = 0.0;
        for j in 0..nc {
            let s: f64 = out.iter().map(|r| r[j]).sum();
            let gap = b[j] - s;
            worst = worst.max(gap.abs() / (1.0 + b[j].abs()));
            nu[j] += gap / n;
        }
        if worst < tol {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_point_is_fixed() {
        assert_eq!(project_by_dual_bisection(&[1.0, 0.0, 1.0], 1e-13), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn density_clamp() {
        let p = project_by_dual_bisection(&[0.0, 0.0, 2.0], 0.1);
        assert_eq!(p, vec![0.1, 0.0, 2.0]);
    }

    #[test]
    fn corner() {
        let p = project_by_dual_bisection(&[0.0, 0.0, 0.0, 0.0], 0.1);
        assert!((p[0] - 0.1).abs() < 1e-15 && (p[3] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn result_is_nearly_admissible_and_beats_samples() {
        let x = [1.0, 2.0, 1.0];
        let eps = 1e-13;
        let p = project_by_dual_bisection(&x, eps);
        let msq = p[1] * p[1];
        assert!(p[2] - msq / (2.0 * p[0]) >= eps - 1e-12);
        let d = dist_sq(&p, &x);
        // Coarse grid of admissible points.
        for i in 1..60 {
            for j in -60..60 {
                let rho = i as f64 * 0.05;
                let m = j as f64 * 0.05;
                let e = (eps + m * m / (2.0 * rho)).max(1.0);
                assert!(dist_sq(&[rho, m, e], &x) >= d - 1e-12);
            }
        }
    }

    #[test]
    fn active_set_two_variables() {
        let x = scalar_l2_active_set(&[1.2, -0.2], 0.0, 1.0, 1.0).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14);
    }

    #[test]
    fn l1_min_four_variables() {
        assert!((scalar_l1_min(&[1.0, 1.0, 2.0, 2.1], 1.0, 2.0, 6.1) - 0.2).abs() < 1e-12);
    }
}

/// Star pressure of the ideal-gas Riemann problem with states `(rho, u, p)`,
/// by bisection of `f_L(p) + f_R(p) + u_R - u_L` on a log scale.
pub fn riemann_star_pressure_bisection(left: [f64; 3], right: [f64; 3], gamma: f64) -> f64 {
    let f_side = |p: f64, s: [f64; 3]| {
        let [rho, _, ps] = s;
        if p > ps {
            // Shock branch from the Rankine-Hugoniot mass flux.
            let mass_flux = (rho * ((gamma + 1.0) * p + (gamma - 1.0) * ps) / 2.0).sqrt();
            (p - ps) / mass_flux
        } else {
            let c = (gamma * ps / rho).sqrt();
            2.0 * c / (gamma - 1.0) * ((p / ps).powf((gamma - 1.0) / (2.0 * gamma)) - 1.0)
        }
    };
    let g = |p: f64| f_side(p, left) + f_side(p, right) + right[1] - left[1];
    let (mut lo, mut hi) = (1e-12f64, 1e6f64);
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo * hi).sqrt()
}
