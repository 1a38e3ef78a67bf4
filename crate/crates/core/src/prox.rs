//! Closed-form proximal operators used by the splitting solvers.
//!
//! Vectors are plain slices. Euler fields are row-major `N x (2 + d)` slices
//! and the column-wise operators act on each conserved component separately.

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::field::ConservationTarget;
use crate::numerics::{pairwise_sum, pairwise_sum_strided};
use crate::projection::project_row;
use crate::state::AdmissibleSet;

/// Soft thresholding `sgn(a) max(|a| - gamma, 0)`.
#[inline]
pub fn shrinkage(a: f64, gamma: f64) -> f64 {
    if a > gamma {
        a - gamma
    } else if a < -gamma {
        a + gamma
    } else {
        0.0
    }
}

fn check_bounds(m: f64, big_m: f64) -> Result<()> {
    if m <= big_m {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lower bound {m} exceeds upper bound {big_m}")))
    }
}

/// Projection onto `{x : sum x = b}`: shifts every entry by `(b - sum x) / N`.
pub fn prox_conservation(x: &[f64], b: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    prox_conservation_in_place(&mut out, b);
    out
}

pub fn prox_conservation_in_place(x: &mut [f64], b: f64) {
    if x.is_empty() {
        return;
    }
    let shift = (b - pairwise_sum(x)) / x.len() as f64;
    x.iter_mut().for_each(|v| *v += shift);
}

/// Column-wise conservation projection of row-major data with `nc` columns.
pub fn prox_conservation_columns(data: &mut [f64], nc: usize, totals: &[f64]) {
    debug_assert_eq!(totals.len(), nc);
    let n = data.len() / nc;
    if n == 0 {
        return;
    }
    for (j, &b) in totals.iter().enumerate() {
        let shift = (b - pairwise_sum_strided(data, j, nc)) / n as f64;
        data[j..].iter_mut().step_by(nc).for_each(|v| *v += shift);
    }
}

/// Parameters shared by the prox operators of one limiter problem.
#[derive(Clone, Debug)]
pub struct ProxContext {
    pub gamma_step: f64,
    pub alpha_fid: f64,
    pub target: ConservationTarget,
    pub bounds: Option<(f64, f64)>,
    /// The data being limited, in the same layout as the iterates.
    pub reference: Vec<f64>,
}

impl ProxContext {
    pub fn new(gamma_step: f64, alpha_fid: f64, target: ConservationTarget, reference: Vec<f64>) -> Result<Self> {
        if !(gamma_step > 0.0) || !(alpha_fid > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step {gamma_step} and fidelity weight {alpha_fid} must be positive"
            )));
        }
        Ok(Self { gamma_step, alpha_fid, target, bounds: None, reference })
    }

    pub fn with_bounds(mut self, m: f64, big_m: f64) -> Result<Self> {
        check_bounds(m, big_m)?;
        self.bounds = Some((m, big_m));
        Ok(self)
    }
}

/// Prox of `1/(2 alpha) |x - ref|^2` plus the indicator of `sum x = b`:
/// `alpha/(gamma+alpha) P(x) + gamma/(gamma+alpha) ref`, where `P` is the
/// conservation projection. Assumes `sum ref = b`.
pub fn prox_quadratic_affine(x: &[f64], ctx: &ProxContext, column_ref: &[f64], b: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    blend_in_place(&mut out, column_ref, b, ctx.gamma_step, ctx.alpha_fid);
    out
}

fn blend_in_place(x: &mut [f64], reference: &[f64], b: f64, gamma: f64, alpha: f64) {
    prox_conservation_in_place(x, b);
    let (wa, wg) = (alpha / (gamma + alpha), gamma / (gamma + alpha));
    for (v, r) in x.iter_mut().zip(reference) {
        *v = wa * *v + wg * r;
    }
}

/// [`prox_quadratic_affine`] applied to every column of row-major data, using
/// `ctx.reference` and `ctx.target`.
pub fn prox_quadratic_affine_columns(data: &mut [f64], nc: usize, ctx: &ProxContext) {
    let (wa, wg) = (ctx.alpha_fid / (ctx.gamma_step + ctx.alpha_fid), ctx.gamma_step / (ctx.gamma_step + ctx.alpha_fid));
    prox_conservation_columns(data, nc, ctx.target.totals());
    for (v, r) in data.iter_mut().zip(&ctx.reference) {
        *v = wa * *v + wg * r;
    }
}

/// Component-wise clip to `[m, big_m]`.
pub fn prox_box(x: &[f64], m: f64, big_m: f64) -> Result<Vec<f64>> {
    check_bounds(m, big_m)?;
    Ok(x.iter().map(|v| v.clamp(m, big_m)).collect())
}

/// Prox of `gamma |x - u|_1`: `u_i + S_gamma(x_i - u_i)`.
pub fn prox_l1_shift(x: &[f64], u: &[f64], gamma: f64) -> Vec<f64> {
    x.iter().zip(u).map(|(xi, ui)| ui + shrinkage(xi - ui, gamma)).collect()
}

/// Prox of `gamma |x - u|_1` plus the indicator of `[m, big_m]^N`:
/// `clip(u_i + S_gamma(x_i - u_i))`. `u` is not required to lie in the box.
pub fn prox_l1_box(x: &[f64], u: &[f64], m: f64, big_m: f64, gamma: f64) -> Result<Vec<f64>> {
    check_bounds(m, big_m)?;
    Ok(x.iter()
        .zip(u)
        .map(|(xi, ui)| (ui + shrinkage(xi - ui, gamma)).clamp(m, big_m))
        .collect())
}

/// Row-wise projection of row-major data onto the admissible set. Counts one
/// row projection per row and returns the number of fallback projections.
pub fn prox_invariant_set_rows(data: &mut [f64], nc: usize, set: &AdmissibleSet) -> Result<u64> {
    let mut fallbacks = 0;
    for row in data.chunks_exact_mut(nc) {
        fallbacks += u64::from(project_row(row, set)?);
    }
    diagnostics::record_row_projections((data.len() / nc) as u64);
    Ok(fallbacks)
}

/// Row-wise projection of a field onto the admissible set.
pub fn prox_invariant_set(field: &crate::CellAverageField, set: &AdmissibleSet) -> Result<crate::CellAverageField> {
    let mut data = field.data().to_vec();
    prox_invariant_set_rows(&mut data, field.n_components(), set)?;
    field.with_data(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinkage_examples() {
        assert_eq!(shrinkage(3.0, 1.0), 2.0);
        assert_eq!(shrinkage(-0.5, 1.0), 0.0);
        for a in [-2.5, 0.0, 1e-300, 7.0] {
            assert_eq!(shrinkage(a, 0.0), a);
        }
    }

    #[test]
    fn conservation_examples() {
        assert_eq!(prox_conservation(&[1.0, 2.0], 3.0), vec![1.0, 2.0]);
        assert_eq!(prox_conservation(&[0.0, 1.0], 3.0), vec![1.0, 2.0]);
        assert_eq!(prox_conservation(&[1.0; 4], 0.0), vec![0.0; 4]);
    }

    #[test]
    fn quadratic_affine_examples() {
        let ctx = ProxContext::new(1.0, 1.0, ConservationTarget::new(vec![2.0]), vec![1.0, 1.0]).unwrap();
        assert_eq!(prox_quadratic_affine(&[2.0, 2.0], &ctx, &[1.0, 1.0], 2.0), vec![1.0, 1.0]);
        assert_eq!(prox_quadratic_affine(&[0.5, 1.5], &ctx, &[0.5, 1.5], 2.0), vec![0.5, 1.5]);
        let tiny = ProxContext::new(1e-14, 1.0, ConservationTarget::new(vec![3.0]), vec![3.0, 0.0]).unwrap();
        let got = prox_quadratic_affine(&[0.0, 1.0], &tiny, &[3.0, 0.0], 3.0);
        assert!((got[0] - 1.0).abs() < 1e-13 && (got[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn box_and_l1_examples() {
        assert_eq!(prox_box(&[1.5, 2.3, 0.2], 1.0, 2.0).unwrap(), vec![1.5, 2.0, 1.0]);
        assert!(prox_box(&[0.0], 2.0, 1.0).is_err());
        assert_eq!(prox_l1_shift(&[3.0, -0.5], &[0.0, 0.0], 1.0), vec![2.0, 0.0]);
        assert_eq!(prox_l1_shift(&[2.0, 0.8], &[1.0, 1.0], 0.5), vec![1.5, 1.0]);
        assert_eq!(prox_l1_box(&[2.0], &[0.0], -1.0, 1.0, 0.5).unwrap(), vec![1.0]);
        assert_eq!(prox_l1_box(&[0.5], &[0.0], -1.0, 1.0, 5.0).unwrap(), vec![0.0]);
        assert_eq!(prox_l1_box(&[0.3], &[0.3], -1.0, 1.0, 0.2).unwrap(), vec![0.3]);
    }

    #[test]
    fn column_conservation() {
        let mut data = vec![1.0, 0.0, 1.0, 2.0, 1.0, 3.0];
        prox_conservation_columns(&mut data, 3, &[4.0, 0.0, 4.0]);
        assert_eq!(data, vec![1.5, -0.5, 1.0, 2.5, 0.5, 3.0]);
    }
}
