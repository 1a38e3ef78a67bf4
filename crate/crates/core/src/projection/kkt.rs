//! KKT residual of a claimed projection, with multipliers rebuilt from the
//! stationarity equations.

use crate::state::{AdmissibleSet, ConservedState};

/// Max-norm residual of the KKT system for projecting `input` onto `set`,
/// evaluated at `output`.
///
/// The energy multiplier `mu` is rebuilt two ways: from momentum stationarity
/// `m - v + mu m / rho = 0` (least squares over components) and from energy
/// stationarity `mu = E - w`. The momentum form stays accurate when `mu` is
/// tiny next to `E`, where `E - w` cancels; the energy form stays accurate
/// when `m` is tiny and `v - m` cancels. The density multiplier follows from
/// stationarity in `rho`. For each estimate the residual collects every
/// stationarity equation, dual feasibility, complementary slackness and
/// primal feasibility, divided by `max(1, |input|_inf)`; the smaller of the
/// two is returned (any multiplier pair certifies the point). It is zero
/// exactly at the projection.
pub fn kkt_residual(input: &ConservedState, output: &ConservedState, set: &AdmissibleSet) -> f64 {
    let (rho, e) = (output.rho(), output.energy());
    if !(rho > 0.0) {
        return f64::INFINITY;
    }
    let msq = output.momentum_sq();
    let from_energy = residual_at(input, output, set, e - input.energy());
    if msq > 0.0 {
        let dot: f64 = output.momentum().iter().zip(input.momentum()).map(|(m, v)| m * (v - m)).sum();
        from_energy.min(residual_at(input, output, set, rho * dot / msq))
    } else {
        from_energy
    }
}

fn residual_at(input: &ConservedState, output: &ConservedState, set: &AdmissibleSet, mu: f64) -> f64 {
    let eps = set.epsilon();
    let (u, w) = (input.rho(), input.energy());
    let (rho, e) = (output.rho(), output.energy());
    let msq = output.momentum_sq();
    let lambda = rho - u - mu * msq / (2.0 * rho * rho);
    let rho_e = e - msq / (2.0 * rho);

    let mut r: f64 = 0.0;
    for (m, v) in output.momentum().iter().zip(input.momentum()) {
        r = r.max((m - v + mu * m / rho).abs());
    }
    r = r.max((e - w - mu).abs());
    r = r.max((-mu).max(0.0));
    r = r.max((-lambda).max(0.0));
    r = r.max((lambda * (rho - eps)).abs());
    r = r.max((mu * (rho_e - eps)).abs());
    r = r.max((eps - rho).max(0.0));
    r = r.max((eps - rho_e).max(0.0));

    let scale = input.components().iter().fold(1f64, |acc, c| acc.max(c.abs()));
    r / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_fixed_point_has_zero_residual() {
        let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
        let s = ConservedState::one_d(1.0, 0.3, 2.0);
        assert_eq!(kkt_residual(&s, &s, &set), 0.0);
    }

    #[test]
    fn density_clamp_residual() {
        let set = AdmissibleSet::with_epsilon(0.1).unwrap();
        let r = kkt_residual(&ConservedState::one_d(0.0, 0.0, 2.0), &ConservedState::one_d(0.1, 0.0, 2.0), &set);
        assert!(r < 1e-12);
    }

    #[test]
    fn tiny_momentum_near_the_corner() {
        // Momentum stationarity alone would give mu = 0 here and blame the
        // energy row for 6e-8.
        let set = AdmissibleSet::with_epsilon(1e-3).unwrap();
        let input = ConservedState::one_d(0.0010000000001740383, -7.062142012686827e-14, 0.0009999400598053527);
        let out = crate::projection::project(&input, &set).unwrap();
        assert!(kkt_residual(&input, &out, &set) < 1e-15);
    }

    #[test]
    fn wrong_point_has_positive_residual() {
        let set = AdmissibleSet::with_epsilon(0.1).unwrap();
        let r = kkt_residual(&ConservedState::one_d(0.0, 0.0, 2.0), &ConservedState::one_d(0.5, 0.0, 2.0), &set);
        assert!(r > 0.05);
    }
}
