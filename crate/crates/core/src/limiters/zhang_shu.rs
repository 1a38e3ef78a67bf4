//! Zhang-Shu scaling of DG polynomials about admissible cell averages.

use crate::dg::DgSolution;
use crate::error::{Error, Result};
use crate::state::AdmissibleSet;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZhangShuStats {
    /// Cells whose density deviations were scaled.
    pub density_scaled: usize,
    /// Cells whose full deviations were scaled for the energy constraint.
    pub energy_scaled: usize,
    pub min_theta: f64,
}

/// `f(t) = 2 rho E - |m|^2 - 2 eps rho` along `avg + t (q - avg)`, as
/// coefficients `(a2, a1, a0)`.
fn energy_quadratic(avg: &[f64], q: &[f64], eps: f64) -> (f64, f64, f64) {
    let n = avg.len();
    let (r, e) = (avg[0], avg[n - 1]);
    let (dr, de) = (q[0] - r, q[n - 1] - e);
    let (mut mm, mut md, mut dd) = (0.0, 0.0, 0.0);
    for k in 1..n - 1 {
        let d = q[k] - avg[k];
        mm += avg[k] * avg[k];
        md += avg[k] * d;
        dd += d * d;
    }
    let a2 = 2.0 * dr * de - dd;
    let a1 = 2.0 * (r * de + e * dr) - 2.0 * md - 2.0 * eps * dr;
    let a0 = 2.0 * r * e - mm - 2.0 * eps * r;
    (a2, a1, a0)
}

/// Smallest `t` in `[0, 1]` with `f(t) = 0`, given `f(0) >= 0 > f(1)`.
fn first_root(a2: f64, a1: f64, a0: f64) -> f64 {
    let f = |t: f64| (a2 * t + a1) * t + a0;
    let mut candidates = Vec::with_capacity(2);
    if a2 == 0.0 {
        if a1 != 0.0 {
            candidates.push(-a0 / a1);
        }
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc >= 0.0 {
            let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
            if q != 0.0 {
                candidates.push(q / a2);
                candidates.push(a0 / q);
            }
        }
    }
    let root = candidates
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .fold(f64::INFINITY, f64::min);
    if root.is_finite() {
        return root;
    }
    // Rounding left no root in [0, 1]; bisect the sign change instead.
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Scales every cell polynomial about its average so that all checked point
/// values (see [`crate::dg::Basis::check_points`]) lie in `set`: first the
/// density deviations by `theta1`, then all deviations by `theta2`. Cell
/// averages are kept (bit for bit for modal bases). Every cell average must
/// already be admissible.
pub fn zhang_shu_scaling(sol: &mut DgSolution, set: &AdmissibleSet) -> Result<ZhangShuStats> {
    let eps = set.epsilon();
    let nc = sol.n_comp;
    let nb = sol.n_basis();
    let points = sol.basis.check_points();
    let table = sol.basis.table(&points);
    let weights = sol.basis.average_weights();
    let modal = sol.basis.is_modal();
    let mut stats = ZhangShuStats { min_theta: 1.0, ..ZhangShuStats::default() };
    let mut values = vec![0.0; points.len() * nc];

    for cell in 0..sol.n_cells() {
        let coeffs = sol.cell_mut(cell);
        let avg: Vec<f64> = (0..nc)
            .map(|k| coeffs[k * nb..(k + 1) * nb].iter().zip(&weights).map(|(a, b)| a * b).sum())
            .collect();
        if !set.contains_row(&avg) {
            return Err(Error::Infeasible(format!("cell {cell} average {avg:?} is not admissible")));
        }
        let eval = |coeffs: &[f64], values: &mut [f64]| {
            for p in 0..points.len() {
                for k in 0..nc {
                    values[p * nc + k] = table.eval(p, &coeffs[k * nb..(k + 1) * nb]);
                }
            }
        };

        eval(coeffs, &mut values);
        let rho_min = (0..points.len()).map(|p| values[p * nc]).fold(f64::INFINITY, f64::min);
        if rho_min < eps {
            let theta1 = ((avg[0] - eps) / (avg[0] - rho_min)).clamp(0.0, 1.0);
            scale(&mut coeffs[..nb], avg[0], theta1, modal);
            stats.density_scaled += 1;
            stats.min_theta = stats.min_theta.min(theta1);
            eval(coeffs, &mut values);
        }

        // A point can also fail by a rounding error in the density scaling;
        // then the quadratic has no root and the shrinking below fixes it.
        let mut theta2: f64 = 1.0;
        let mut any_bad = false;
        for q in values.chunks_exact(nc) {
            if !set.contains_row(q) {
                any_bad = true;
                let (a2, a1, a0) = energy_quadratic(&avg, q, eps);
                theta2 = theta2.min(first_root(a2, a1, a0));
            }
        }
        if any_bad {
            let original = coeffs.to_vec();
            let mut shrink = 0.0;
            loop {
                let theta = (theta2 - shrink).max(0.0);
                coeffs.copy_from_slice(&original);
                for k in 0..nc {
                    scale(&mut coeffs[k * nb..(k + 1) * nb], avg[k], theta, modal);
                }
                eval(coeffs, &mut values);
                if theta == 0.0 || values.chunks_exact(nc).all(|q| set.contains_row(q)) {
                    stats.min_theta = stats.min_theta.min(theta);
                    break;
                }
                shrink = if shrink == 0.0 { 1e-14 * theta2.max(1e-300) } else { 2.0 * shrink };
            }
            stats.energy_scaled += 1;
        }
        if !modal {
            restore_admissible_average(coeffs, nc, &weights, set);
        }
    }
    Ok(stats)
}

/// Nodal averages are recomputed from point values, so a cell average set
/// exactly on the boundary of `G^eps` can come back outside it by a rounding
/// error, which is large when the point values are large (an inflow cell next
/// to near vacuum). Raises the density and then the energy values of the cell
/// by growing multiples of an ulp of the largest value until the recomputed
/// average passes the exact membership test. Raising `rho` or `E` keeps every
/// admissible point value admissible. Returns the energy added.
pub(crate) fn restore_admissible_average(coeffs: &mut [f64], nc: usize, weights: &[f64], set: &AdmissibleSet) -> f64 {
    let nb = weights.len();
    let average = |c: &[f64]| -> Vec<f64> {
        (0..nc).map(|k| c[k * nb..(k + 1) * nb].iter().zip(weights).map(|(a, b)| a * b).sum()).collect()
    };
    if set.contains_row(&average(coeffs)) {
        return 0.0;
    }
    let eps = set.epsilon();
    let mut added = 0.0;
    // Raise density first (it can only help the energy condition once E > eps),
    // then energy, each by the smallest doubling of one ulp that works.
    for (comp, done) in [
        (0, &(|a: &[f64]| a[0] >= eps) as &dyn Fn(&[f64]) -> bool),
        (nc - 1, &|a: &[f64]| set.contains_row(a)),
    ] {
        let scale = coeffs[comp * nb..(comp + 1) * nb].iter().fold(eps, |m, v| m.max(v.abs()));
        let mut delta = f64::EPSILON * scale;
        for _ in 0..64 {
            if done(&average(coeffs)) {
                break;
            }
            coeffs[comp * nb..(comp + 1) * nb].iter_mut().for_each(|v| *v += delta);
            if comp == nc - 1 {
                added += delta;
            }
            delta *= 2.0;
        }
    }
    added
}

/// `c <- avg + theta (c - avg)` for one component.
fn scale(c: &mut [f64], avg: f64, theta: f64, modal: bool) {
    if modal {
        c[1..].iter_mut().for_each(|v| *v *= theta);
    } else {
        c.iter_mut().for_each(|v| *v = avg + theta * (*v - avg));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{Basis, BasisKind, Mesh};

    fn one_cell(kind: BasisKind, f: impl Fn([f64; 2]) -> Vec<f64>) -> DgSolution {
        let mesh = Mesh::new_1d(1, -1.0, 1.0).unwrap();
        DgSolution::from_function(mesh, Basis::new(kind, 1).unwrap(), 3, f).unwrap()
    }

    #[test]
    fn admissible_polynomials_are_untouched() {
        let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
        let mut sol = one_cell(BasisKind::ModalP(2), |x| vec![1.0 + 0.5 * x[0], 0.1, 2.0]);
        let before = sol.coeffs.clone();
        let st = zhang_shu_scaling(&mut sol, &set).unwrap();
        assert_eq!(sol.coeffs, before);
        assert_eq!(st.min_theta, 1.0);
    }

    #[test]
    fn density_scaling_factor() {
        // Linear density with mean 1 and minimum -0.5 over the check points.
        let set = AdmissibleSet::with_epsilon(0.1).unwrap();
        let mut sol = one_cell(BasisKind::NodalGaussLobatto(1), |x| vec![1.0 + 1.5 * x[0], 0.0, 10.0]);
        let st = zhang_shu_scaling(&mut sol, &set).unwrap();
        assert!((st.min_theta - 0.6).abs() < 1e-15);
        assert!((sol.coeffs[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn energy_scaling_reaches_admissible_points() {
        let set = AdmissibleSet::with_epsilon(1e-8).unwrap();
        for kind in [BasisKind::ModalP(3), BasisKind::NodalGaussLobatto(3)] {
            let mut sol = one_cell(kind, |x| vec![1.0 + 0.9 * x[0], 3.0 * x[0] * x[0], 1.0 - 0.99 * x[0].powi(3)]);
            let avg = sol.averages();
            let st = zhang_shu_scaling(&mut sol, &set).unwrap();
            assert_eq!(st.energy_scaled, 1);
            for (a, b) in sol.averages().iter().zip(&avg) {
                assert!((a - b).abs() < 1e-13);
            }
            for p in sol.basis.check_points() {
                assert!(set.contains_row(&sol.eval_ref(0, p)));
            }
        }
    }

    #[test]
    fn inadmissible_average_is_an_error() {
        let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
        let mut sol = one_cell(BasisKind::ModalP(1), |_| vec![-1.0, 0.0, 1.0]);
        assert!(zhang_shu_scaling(&mut sol, &set).is_err());
    }

    #[test]
    fn first_root_cases() {
        assert!((first_root(0.0, -2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((first_root(1.0, -1.5, 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(first_root(-1.0, 0.0, 0.0), 0.0);
    }
}
