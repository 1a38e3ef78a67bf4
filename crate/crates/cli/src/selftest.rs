//! Fast smoke checks: projection sample, cubic roots, prox identities and the
//! four-variable example.

use idplim_core::numerics::dist2;
use idplim_core::projection::cubic::{cubic_value, residual_scale};
use idplim_core::projection::{kkt_residual, project_detailed, solve_depressed_cubic, CubicBranch};
use idplim_core::prox::{prox_conservation, prox_l1_box, prox_l1_shift};
use idplim_core::solvers::{drs_l1_scalar, dys_l2_scalar, ScalarProblem};
use idplim_core::limiters::clip_and_assured_sum;
use idplim_core::{AdmissibleSet, ConservedState, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn run_all(seed: u64) -> Vec<Check> {
    vec![projection(seed), cubic(seed), prox(seed), four_variable()]
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim + 2).map(|_| rng.random_range(-3.0..3.0)).collect()
}

/// Output admissible, KKT residual small, no fallback, and the obtuse-angle
/// property `<x - P, y - P> <= 0` against random admissible `y`.
fn projection(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = AdmissibleSet::with_epsilon(1e-8).expect("valid epsilon");
    let (mut worst_kkt, mut worst_angle, mut failures) = (0.0f64, f64::NEG_INFINITY, 0usize);
    for i in 0..2000 {
        let dim = 1 + i % 2;
        let x = ConservedState::from_components(&random_state(&mut rng, dim)).expect("finite state");
        let o = match project_detailed(&x, &set) {
            Ok(o) => o,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let p = o.state.components();
        if o.fallback || !set.contains_row(&p) {
            failures += 1;
        }
        worst_kkt = worst_kkt.max(kkt_residual(&x, &o.state, &set));
        let xs = x.components();
        for _ in 0..10 {
            let mut y = random_state(&mut rng, dim);
            y[0] = y[0].abs() + 1e-3;
            let m2: f64 = y[1..=dim].iter().map(|v| v * v).sum();
            y[dim + 1] = m2 / (2.0 * y[0]) + y[0] * rng.random_range(1e-3..2.0);
            let dot: f64 = (0..dim + 2).map(|k| (xs[k] - p[k]) * (y[k] - p[k])).sum();
            let scale = 1.0 + dist2(&xs, &p) * dist2(&y, &p);
            worst_angle = worst_angle.max(dot / scale);
        }
    }
    let passed = failures == 0 && worst_kkt < 1e-9 && worst_angle <= 1e-9;
    Check {
        name: "projection sample",
        passed,
        detail: format!("2000 points, failures {failures}, max KKT {worst_kkt:.2e}, max angle {worst_angle:.2e}"),
    }
}

fn cubic(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (mut worst, mut bad_counts) = (0.0f64, 0usize);
    for _ in 0..20_000 {
        let p = rng.random_range(-10.0..10.0) * 10f64.powi(rng.random_range(-3..4));
        let q = rng.random_range(-10.0..10.0) * 10f64.powi(rng.random_range(-3..4));
        let r = solve_depressed_cubic(p, q);
        let want = match r.branch {
            CubicBranch::Triple | CubicBranch::OneReal => 1,
            CubicBranch::DoubleRoot => 2,
            CubicBranch::ThreeReal => 3,
        };
        bad_counts += (r.roots.len() != want) as usize;
        let scale = residual_scale(p, q);
        for &x in &r.roots {
            worst = worst.max(cubic_value(p, q, x).abs() / scale);
        }
    }
    Check {
        name: "cubic roots",
        passed: worst <= 1e-9 && bad_counts == 0,
        detail: format!("20000 cubics, max scaled residual {worst:.2e}, wrong root counts {bad_counts}"),
    }
}

fn prox(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0c5);
    let (mut mismatches, mut worst_sum, mut worst_idem) = (0usize, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let n = rng.random_range(1..8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let gamma = rng.random_range(1e-3..2.0);
        let boxed = prox_l1_box(&x, &u, -1.0, 1.5, gamma).expect("ordered bounds");
        let clipped: Vec<f64> = prox_l1_shift(&x, &u, gamma).iter().map(|v| v.clamp(-1.0, 1.5)).collect();
        mismatches += (boxed != clipped) as usize;
        let b = rng.random_range(-5.0..5.0);
        let once = prox_conservation(&x, b);
        let twice = prox_conservation(&once, b);
        worst_sum = worst_sum.max((once.iter().sum::<f64>() - b).abs());
        worst_idem = worst_idem.max(dist2(&once, &twice));
    }
    Check {
        name: "prox identities",
        passed: mismatches == 0 && worst_sum <= 1e-12 && worst_idem <= 1e-12,
        detail: format!("10000 tuples, box/shift mismatches {mismatches}, sum error {worst_sum:.1e}, idempotence {worst_idem:.1e}"),
    }
}

fn four_variable() -> Check {
    let u = [1.0, 1.0, 2.0, 2.1];
    let want = [1.05, 1.05, 2.0, 2.0];
    let cfg = SolverConfig { gamma_step: 1e-4, ..SolverConfig::default() };
    let run = || -> idplim_core::Result<(f64, f64, f64, f64)> {
        let p = ScalarProblem::new(&u, 1.0, 2.0, 6.1)?;
        let c = clip_and_assured_sum(&u, 1.0, 2.0, 6.1)?;
        let (x2, _) = dys_l2_scalar(&p, &cfg)?;
        let (x1, _) = drs_l1_scalar(&p, &cfg)?;
        Ok((dist2(&c, &want), dist2(&x2, &want), dist2(&x1, &want), (p.l1_objective(&x1) - 0.2).abs()))
    };
    match run() {
        Ok((a, b, c, d)) => Check {
            name: "four-variable example",
            passed: a.max(b).max(c).max(d) <= 1e-9,
            detail: format!("clip {a:.1e}, l2 {b:.1e}, l1 {c:.1e}, objective {d:.1e}"),
        },
        Err(e) => Check { name: "four-variable example", passed: false, detail: e.to_string() },
    }
}
