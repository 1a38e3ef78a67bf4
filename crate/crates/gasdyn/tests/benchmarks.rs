use idplim_core::dg::{Basis, BasisKind, DgSolution, Mesh};
use idplim_core::field::CellAverageField;
use idplim_core::limiters::{LimiterAudit, Norm};
use idplim_core::state::AdmissibleSet;
use idplim_gasdyn::benchmarks::{jet_inflow_state, jet_simulation, run_benchmark, sedov_simulation, SEDOV_ENERGY};
use idplim_gasdyn::time::TimeScheme;
use idplim_gasdyn::{Boundaries, Boundary, DgOperator, Euler, EulerSimulation, SimConfig};

fn assert_feasible(sim: &EulerSimulation, eps: f64) {
    let set = AdmissibleSet::with_epsilon(eps).unwrap();
    let f = sim.average_field().unwrap();
    assert!(f.violating_rows(&set).is_empty());
    assert!(sim.sol.coeffs.iter().all(|v| v.is_finite()));
}

#[test]
fn sedov_initial_energy_sits_in_the_corner() {
    let cfg = SimConfig { mesh_n: 10, ..SimConfig::sedov() };
    let sim = sedov_simulation(&cfg).unwrap();
    let f = sim.average_field().unwrap();
    let h: f64 = 1.1 / 10.0;
    assert_eq!(f.row(0)[3], SEDOV_ENERGY / (h * h));
    for i in 1..f.n_cells() {
        assert_eq!(f.row(i), &[1.0, 0.0, 0.0, 1e-12]);
    }
}

#[test]
fn sedov_step_at_tiny_dt_is_feasible() {
    let cfg = SimConfig { mesh_n: 12, ..SimConfig::sedov() };
    let mut sim = sedov_simulation(&cfg).unwrap();
    let mass = sim.totals()[0];
    for _ in 0..3 {
        sim.step(1e-6).unwrap();
    }
    assert_feasible(&sim, cfg.limiter.epsilon);
    let s = sim.stats();
    assert_eq!(s.stages, 1 + 3 * 3);
    assert!((sim.totals()[0] - mass).abs() < 1e-12 * mass);
    assert!(s.max_relative_drift.iter().all(|d| *d < 1e-12));
}

#[test]
fn jet_inflow_is_the_nozzle_state() {
    let g = 5.0 / 3.0;
    let u = jet_inflow_state(0.04, g);
    let e = 0.4127 / (g - 1.0) + 0.5 * 4000.0 * 4000.0 / 5.0;
    assert_eq!(&u[..3], &[5.0, 4000.0, 0.0]);
    assert!((u[3] - e).abs() < 1e-12 * e);
    let amb = jet_inflow_state(-0.3, g);
    assert_eq!(&amb[..3], &[0.5, 0.0, 0.0]);
}

#[test]
fn reduced_jet_steps_are_feasible_and_conservative() {
    for norm in [Norm::L2, Norm::L1] {
        let mut cfg = SimConfig { mesh_n: 16, t_end: 2e-5, ..SimConfig::jet() };
        cfg.limiter.norm = norm;
        let mut sim = jet_simulation(&cfg).unwrap();
        let dt0 = sim.stable_dt(cfg.cfl).unwrap();
        // The time step sees the inflow speed.
        assert!(dt0 < cfg.cfl * (1.0 / 16.0) / 800.0);
        sim.run_to(cfg.t_end, cfg.cfl, None, 1, |_, _| Ok(())).unwrap();
        assert_feasible(&sim, cfg.limiter.epsilon);
        let s = sim.stats();
        assert_eq!(sim.time, cfg.t_end);
        assert!(s.max_relative_drift[0] < 1e-12 && s.max_relative_drift[3] < 1e-12, "{:?}", s.max_relative_drift);
        assert!(s.min_density >= cfg.limiter.epsilon);
    }
}

#[test]
fn pipeline_limits_injected_bad_averages_and_keeps_other_cells() {
    // Quiescent Sedov background (internal energy 1e-12, outside the limiting
    // region) with a hot corner where a conservative transfer leaves one cell
    // with negative energy. The driver limits it on construction.
    let mut cfg = SimConfig { mesh_n: 8, ..SimConfig::sedov() };
    for norm in [Norm::L2, Norm::L1] {
        cfg.limiter.norm = norm;
        let mesh = Mesh::new_2d(8, 8, [0.0, 0.0], [1.1, 1.1]).unwrap();
        let basis = Basis::new(BasisKind::ModalP(2), 2).unwrap();
        let op = DgOperator::new(Euler::new(2, 1.4), mesh.clone(), basis.clone(), Boundaries::uniform(Boundary::Reflective)).unwrap();
        let mut sol = DgSolution::zeros(mesh.clone(), basis, 4).unwrap();
        let mut avg = Vec::new();
        for cell in 0..64 {
            let (ix, iy) = mesh.cell_coords(cell);
            let hot = ix < 3 && iy < 3;
            avg.extend([1.0, if hot { 0.1 } else { 0.0 }, 0.0, if hot { 1.0 + 0.1 * (ix + iy) as f64 } else { 1e-12 }]);
        }
        let (bad, donor) = (mesh.cell_index(1, 1) * 4 + 3, mesh.cell_index(2, 1) * 4 + 3);
        let d = avg[bad] + 0.05;
        avg[bad] -= d;
        avg[donor] += d;
        sol.set_averages(&avg).unwrap();
        let sums_before: Vec<f64> = (0..4).map(|k| avg.iter().skip(k).step_by(4).sum()).collect();
        let sim = EulerSimulation::new(op, sol, TimeScheme::SspRk3, Some(cfg.limiter)).unwrap();
        assert_feasible(&sim, cfg.limiter.epsilon);
        let audit: &[LimiterAudit] = sim.audit();
        assert_eq!(audit.len(), 1);
        assert_eq!((audit[0].time_step, audit[0].rk_stage, audit[0].n_violations), (0, 0, 1));
        assert!(audit[0].iterations > 0 && audit[0].projections > 0);
        let s = sim.stats();
        assert_eq!(s.limited_stages, 1);
        assert_eq!(s.max_excluded_change, 0.0);
        let after = sim.sol.averages();
        for k in 0..4 {
            let t: f64 = after.iter().skip(k).step_by(4).sum();
            assert!((t - sums_before[k]).abs() < 1e-12 * (1.0 + sums_before[k].abs()));
        }
        for cell in 0..64 {
            let (ix, iy) = mesh.cell_coords(cell);
            if ix >= 3 || iy >= 3 {
                assert_eq!(&after[cell * 4..cell * 4 + 4], &avg[cell * 4..cell * 4 + 4]);
            }
        }
        assert_ne!(after[bad], avg[bad]);
    }
}

#[test]
fn run_writes_snapshots_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimConfig { mesh_n: 8, t_end: 2e-3, snapshots: 2, ..SimConfig::sedov() };
    let sim = sedov_simulation(&cfg).unwrap();
    let summary = run_benchmark("sedov", sim, &cfg, Some(dir.path())).unwrap();
    assert_eq!(summary.snapshots.len(), 3);
    assert_eq!(summary.stats.final_time, 2e-3);
    for name in &summary.snapshots {
        let (f, meta) = CellAverageField::load(&dir.path().join(name)).unwrap();
        assert_eq!(f.n_cells(), 64);
        assert_eq!(meta.dim, 2);
    }
    let audit = std::fs::read_to_string(dir.path().join("audit.jsonl")).unwrap();
    assert_eq!(audit.lines().count(), summary.n_audit_records);
    let steps = std::fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    assert_eq!(steps.lines().count(), summary.stats.steps + 1);
    assert!(steps.starts_with("step,time,dt,limited_stages,iterations,projections"));
}

#[test]
fn identical_configs_give_identical_snapshots() {
    let cfg = SimConfig { mesh_n: 8, t_end: 1e-3, ..SimConfig::sedov() };
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        run_benchmark("sedov", sedov_simulation(&cfg).unwrap(), &cfg, Some(dir.path())).unwrap();
        std::fs::read(dir.path().join("snapshots/snapshot_0001.csv")).unwrap()
    };
    assert_eq!(run(), run());
}
