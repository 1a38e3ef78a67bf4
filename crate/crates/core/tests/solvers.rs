use idplim_core::numerics::dist2;
use idplim_core::solvers::{
    drs_l1_euler, drs_l1_scalar, drs_l2_euler, dys_l2_euler, dys_l2_scalar, EulerProblem, ScalarProblem,
};
use idplim_core::{AdmissibleSet, CellAverageField, ConservationTarget, SolverConfig};
use idplim_oracles::{euler_l2_dual_ascent, scalar_l1_min, scalar_l2_active_set};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(gamma: f64) -> SolverConfig {
    SolverConfig { gamma_step: gamma, ..SolverConfig::default() }
}

#[test]
fn four_variable_example() {
    let u = [1.0, 1.0, 2.0, 2.1];
    let want = [1.05, 1.05, 2.0, 2.0];
    let p = ScalarProblem::new(&u, 1.0, 2.0, 6.1).unwrap();
    let (x2, rep2) = dys_l2_scalar(&p, &cfg(1.0)).unwrap();
    assert!(rep2.converged);
    assert!(dist2(&x2, &want) < 1e-9, "{x2:?}");
    for gamma in [1e-10, 1e-4, 1.0] {
        let (x1, rep1) = drs_l1_scalar(&p, &cfg(gamma)).unwrap();
        assert!(rep1.converged, "gamma {gamma}");
        assert!(dist2(&x1, &want) < 1e-9, "gamma {gamma}: {x1:?}");
        assert!((p.l1_objective(&x1) - 0.2).abs() < 1e-9);
    }
}

fn random_scalar(rng: &mut ChaCha8Rng) -> (Vec<f64>, f64, f64, f64) {
    let n = rng.random_range(2..=6);
    let (m, big_m) = (1.0, 2.0);
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.7..2.3)).collect();
    let b = rng.random_range(n as f64 * m..n as f64 * big_m);
    (u, m, big_m, b)
}

#[test]
fn scalar_solvers_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let (u, m, big_m, b) = random_scalar(&mut rng);
        let p = ScalarProblem::new(&u, m, big_m, b).unwrap();
        let oracle = scalar_l2_active_set(&u, m, big_m, b).unwrap();
        let l1_min = scalar_l1_min(&u, m, big_m, b);
        let (x2, rep) = dys_l2_scalar(&p, &cfg(1.0)).unwrap();
        assert!(rep.converged);
        assert!(x2.iter().all(|v| (m..=big_m).contains(v)));
        assert!(p.l2_objective(&x2) <= p.l2_objective(&oracle) + 1e-8);
        assert!(dist2(&x2, &oracle) < 1e-8, "{u:?} {b}: {x2:?} vs {oracle:?}");
        // The l2 minimizer also minimizes the l1 objective.
        assert!((p.l1_objective(&x2) - l1_min).abs() < 1e-9);
        let (x1, rep) = drs_l1_scalar(&p, &cfg(1e-2)).unwrap();
        assert!(rep.converged);
        assert!((p.l1_objective(&x1) - l1_min).abs() < 1e-8, "{u:?} {b}");
    }
}

fn random_euler(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> (CellAverageField, ConservationTarget) {
    let nc = 2 + dim;
    let mut exact = Vec::with_capacity(n * nc);
    for _ in 0..n {
        let rho: f64 = rng.random_range(0.1..2.0);
        let m: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let msq: f64 = m.iter().map(|v| v * v).sum();
        exact.push(rho);
        exact.extend(&m);
        exact.push(msq / (2.0 * rho) + rng.random_range(0.05..1.0));
    }
    let h = 1.0 / n as f64;
    let domain = if dim == 1 { vec![0.0, 1.0] } else { vec![0.0, 1.0, 0.0, 1.0] };
    let f = CellAverageField::new(dim, h, domain, exact).unwrap();
    let target = ConservationTarget::from_field(&f);
    let mut raw = f.data().to_vec();
    // Conservative perturbations: move mass and energy between two cells.
    for _ in 0..2 {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        for c in 0..nc {
            let d = rng.random_range(-1.5..1.5);
            raw[i * nc + c] -= d;
            raw[j * nc + c] += d;
        }
    }
    (f.with_data(raw).unwrap(), target)
}

#[test]
fn euler_l2_matches_dual_ascent_and_drs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let set = AdmissibleSet::with_epsilon(1e-8).unwrap();
    let mut checked = 0;
    while checked < 60 {
        let dim = 1 + checked % 2;
        let n = rng.random_range(2..=6);
        let (raw, target) = random_euler(&mut rng, dim, n);
        if raw.violating_rows(&set).is_empty() {
            continue;
        }
        checked += 1;
        let p = EulerProblem::new(&raw, &target, &set).unwrap();
        let (x, rep) = dys_l2_euler(&p, 1.0, &cfg(1.0)).unwrap();
        assert!(rep.converged);
        assert!(x.violating_rows(&set).is_empty());
        for (r, b) in rep.conservation_residuals.iter().zip(target.totals()) {
            assert!(r.abs() <= 1e-11 * (1.0 + b.abs()), "conservation {r}");
        }
        let rows: Vec<Vec<f64>> = raw.rows().map(|r| r.to_vec()).collect();
        let oracle: Vec<f64> = euler_l2_dual_ascent(&rows, target.totals(), 1e-8, 200_000, 1e-14).concat();
        assert!(p.l2_objective(x.data()) <= p.l2_objective(&oracle) + 1e-8);
        assert!(dist2(x.data(), &oracle) < 1e-6, "dual ascent disagrees: {}", dist2(x.data(), &oracle));
        let (y, rep) = drs_l2_euler(&p, 1.0, &cfg(1.0)).unwrap();
        assert!(rep.converged);
        assert!(dist2(x.data(), y.data()) < 1e-8, "drs vs dys {}", dist2(x.data(), y.data()));
        // Random small instances are often degenerate for l1 (non-unique
        // minimizers), where the nested scheme converges slowly; a looser
        // tolerance keeps this cross-check fast.
        let l1_cfg = SolverConfig { tol: 1e-10, ..cfg(0.05) };
        let (z, rep) = drs_l1_euler(&p, &l1_cfg).unwrap();
        assert!(rep.converged);
        assert!(z.violating_rows(&set).is_empty());
        assert!(p.l1_objective(z.data()) <= p.l1_objective(x.data()) + 1e-9);
    }
}

#[test]
fn two_cell_energy_deficit() {
    let f = CellAverageField::new(1, 0.5, vec![0.0, 1.0], vec![1.0, 0.0, -0.5, 1.0, 0.0, 2.5]).unwrap();
    let t = ConservationTarget::new(vec![2.0, 0.0, 2.0]);
    let set = AdmissibleSet::with_epsilon(1e-13).unwrap();
    let p = EulerProblem::new(&f, &t, &set).unwrap();
    let (x, _) = dys_l2_euler(&p, 1.0, &cfg(1.0)).unwrap();
    let want = [1.0, 0.0, 1e-13, 1.0, 0.0, 2.0 - 1e-13];
    assert!(dist2(x.data(), &want) < 1e-12, "{:?}", x.data());
}

#[test]
fn dys_tail_is_geometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let set = AdmissibleSet::with_epsilon(1e-8).unwrap();
    let (raw, target) = loop {
        let (raw, t) = random_euler(&mut rng, 1, 40);
        if raw.violating_rows(&set).len() > 1 {
            break (raw, t);
        }
    };
    let p = EulerProblem::new(&raw, &target, &set).unwrap();
    let (_, rep) = dys_l2_euler(&p, 1.0, &cfg(1.0)).unwrap();
    assert!(rep.converged);
    assert!(*rep.residuals.last().unwrap() < rep.tol);
    println!("{} iterations, residuals {:?}", rep.iterations, rep.residuals);
}
