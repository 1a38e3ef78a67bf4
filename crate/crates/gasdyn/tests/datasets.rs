use idplim_core::limiters::{limit_cell_averages, LimiterOptions};
use idplim_core::field::ConservationTarget;
use idplim_core::state::AdmissibleSet;
use idplim_gasdyn::datasets::{advect_1d_rkdg, lax_base_field, lax_perturbation_dataset, triangle_square, AdvectionConfig, LaxConfig};

fn small_lax(n: usize) -> LaxConfig {
    LaxConfig { n_datasets: n, ..LaxConfig::default() }
}

#[test]
fn lax_datasets_are_infeasible_and_conservative() {
    let cfg = small_lax(50);
    let (base, _) = lax_base_field(&cfg).unwrap();
    let set = AdmissibleSet::with_epsilon(cfg.epsilon).unwrap();
    assert!(base.violating_rows(&set).is_empty());
    let sums = base.column_sums();
    let data = lax_perturbation_dataset(&cfg).unwrap();
    assert_eq!(data.len(), 50);
    for f in &data {
        assert!(!f.violating_rows(&set).is_empty());
        for (a, b) in f.column_sums().iter().zip(&sums) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn lax_datasets_are_reproducible() {
    let a = lax_perturbation_dataset(&small_lax(3)).unwrap();
    let b = lax_perturbation_dataset(&small_lax(3)).unwrap();
    assert_eq!(a, b);
    let c = lax_perturbation_dataset(&LaxConfig { seed: 7, ..small_lax(3) }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn zero_amplitude_gives_feasible_fields_and_a_noop_limiter() {
    let cfg = LaxConfig { amplitudes: [0.0; 3], ..small_lax(2) };
    let set = AdmissibleSet::with_epsilon(cfg.epsilon).unwrap();
    for f in lax_perturbation_dataset(&cfg).unwrap() {
        assert!(f.violating_rows(&set).is_empty());
        let (out, rep) = limit_cell_averages(&f, &ConservationTarget::from_field(&f), &LimiterOptions::default()).unwrap();
        assert_eq!(out, f);
        assert_eq!(rep.iterations, 0);
    }
}

#[test]
fn advection_reference_run_leaves_the_bounds() {
    let cfg = AdvectionConfig { n_steps: 200, ..AdvectionConfig::default() };
    let run = advect_1d_rkdg(&cfg, triangle_square).unwrap();
    assert_eq!(run.snapshots.len(), 200);
    assert!(run.warning.is_none());
    let out_of_bounds = run.snapshots.iter().filter(|s| s.iter().any(|v| *v < 1.0 || *v > 2.0)).count();
    assert!(out_of_bounds > 0);
    // Periodic advection conserves the total.
    let total0: f64 = run.snapshots[0].iter().sum();
    for s in &run.snapshots {
        assert!((s.iter().sum::<f64>() - total0).abs() < 1e-10);
    }
}

#[test]
fn advection_self_convergence() {
    // Smooth periodic data advected for a short time; errors of P2 and P3 on
    // two meshes decay at least like h^(k + 1/2).
    let smooth = |x: f64| 1.5 + 0.5 * (2.0 * std::f64::consts::PI * x / 3.0).sin();
    for degree in [2, 3] {
        let err = |n: usize| {
            let cfg = AdvectionConfig { n_cells: n, degree, dt: 1e-4, n_steps: 500, ..AdvectionConfig::default() };
            let run = advect_1d_rkdg(&cfg, smooth).unwrap();
            let t = cfg.dt * cfg.n_steps as f64;
            run.final_solution.errors(0, |x| smooth(x[0] - cfg.velocity * t)).1
        };
        let (e1, e2) = (err(20), err(40));
        let rate = (e1 / e2).log2();
        assert!(rate >= degree as f64 + 0.5, "P{degree}: {e1} -> {e2}, rate {rate}");
    }
}
