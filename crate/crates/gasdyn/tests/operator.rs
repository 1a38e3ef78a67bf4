use std::sync::Arc;

use idplim_core::dg::{Basis, BasisKind, DgSolution, Mesh};
use idplim_gasdyn::manufactured::{discrete_errors, manufactured_simulation, rate, Manufactured};
use idplim_gasdyn::physics::llf_flux;
use idplim_gasdyn::time::{self, no_hook, TimeScheme};
use idplim_gasdyn::{Boundaries, Boundary, BoundaryKind, DgOperator, Euler, Physics, SimConfig};

fn euler_op(kind: BasisKind, n: usize, b: Boundaries) -> DgOperator<Euler> {
    let mesh = Mesh::new_2d(n, n, [0.0, 0.0], [1.0, 1.0]).unwrap();
    DgOperator::new(Euler::new(2, 1.4), mesh, Basis::new(kind, 2).unwrap(), b).unwrap()
}

#[test]
fn flux_is_consistent() {
    let e = Euler::new(2, 1.4);
    let u = e.conserved(0.8, &[0.3, -1.2], 2.5);
    let (mut fa, mut fb, mut out, mut f) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
    for axis in 0..2 {
        llf_flux(&e, &u, &u, axis, &mut fa, &mut fb, &mut out);
        e.flux(&u, axis, &mut f);
        assert_eq!(out, f);
    }
}

#[test]
fn free_stream_is_preserved_by_both_steppers() {
    let state = Euler::new(2, 1.4).conserved(1.3, &[0.4, -0.7], 0.9);
    for kind in [BasisKind::ModalP(2), BasisKind::NodalGaussLobatto(3)] {
        for bc in [Boundaries::periodic(), Boundaries::uniform(Boundary::Outflow)] {
            let op = euler_op(kind, 6, bc);
            let s = state.clone();
            let sol = DgSolution::from_function(op.mesh.clone(), op.basis.clone(), 4, move |_| s.clone()).unwrap();
            let mut l = vec![0.0; sol.coeffs.len()];
            op.rhs(&sol, 0.0, &mut l).unwrap();
            assert!(l.iter().all(|v| v.abs() < 1e-12), "{kind:?}: {:e}", l.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            for scheme in [TimeScheme::SspRk3, TimeScheme::Rk4] {
                let mut u = sol.coeffs.clone();
                let mut rhs = |c: &[f64], t: f64, out: &mut [f64]| op.rhs_coeffs(c, t, out);
                time::step(scheme, &mut u, 0.0, 1e-2, &mut rhs, &mut no_hook).unwrap();
                let diff = u.iter().zip(&sol.coeffs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(diff < 1e-13, "{kind:?} {scheme:?}: {diff:e}");
            }
        }
    }
}

#[test]
fn boundary_flux_accounts_for_the_change_of_totals() {
    let e = Euler::new(2, 1.4);
    let inflow = Arc::new(move |x: [f64; 2], t: f64| e.conserved(1.0 + 0.2 * x[1], &[2.0, 0.3 * t], 1.0));
    let bc = Boundaries([Boundary::Dirichlet(inflow), Boundary::Outflow, Boundary::Reflective, Boundary::Outflow]);
    for kind in [BasisKind::ModalP(2), BasisKind::NodalGaussLobatto(3)] {
        let op = euler_op(kind, 7, bc.clone());
        let sol = DgSolution::from_function(op.mesh.clone(), op.basis.clone(), 4, |x| {
            e.conserved(1.0 + 0.3 * (3.0 * x[0]).sin() * x[1], &[0.5 - x[1], 0.2 * x[0]], 1.0 + 0.1 * x[0] * x[1])
        })
        .unwrap();
        let mut l = vec![0.0; sol.coeffs.len()];
        op.rhs(&sol, 0.4, &mut l).unwrap();
        let rate = DgSolution { coeffs: l, ..sol.clone() }.averages();
        let b = op.boundary_flux(&sol.coeffs, 0.4).unwrap();
        for k in 0..4 {
            let d: f64 = rate.iter().skip(k).step_by(4).sum();
            assert!((d + b[k]).abs() < 1e-11 * (1.0 + b[k].abs()), "{kind:?} comp {k}: {d} vs {}", -b[k]);
        }
        assert!(b[0].abs() > 1.0);
    }
    // Periodic meshes have no boundary.
    let op = euler_op(BasisKind::ModalP(1), 4, Boundaries::periodic());
    let sol = DgSolution::from_function(op.mesh.clone(), op.basis.clone(), 4, |_| e.conserved(1.0, &[1.0, 1.0], 1.0)).unwrap();
    assert_eq!(op.boundary_flux(&sol.coeffs, 0.0).unwrap(), vec![0.0; 4]);
}

#[test]
fn manufactured_source_gives_self_convergence() {
    // A moving density wave whose phase speed differs from the flow speed, so
    // the source is nonzero; comfortable pressure, no limiter.
    let m = Manufactured { wave_speed: 1.5, pressure: 1.0, floor: 0.5, power: 2, ..Manufactured::default() };
    for degree in [1, 2] {
        let err = |n: usize| {
            let cfg = SimConfig {
                mesh_n: n,
                degree,
                t_end: 0.05,
                dt: Some(1e-3),
                limiter_enabled: false,
                boundary: [BoundaryKind::Inflow; 4],
                ..SimConfig::convergence()
            };
            let mut sim = manufactured_simulation(&cfg, &m).unwrap();
            sim.run_to(cfg.t_end, cfg.cfl, cfg.dt, 1, |_, _| Ok(())).unwrap();
            let t = sim.time;
            discrete_errors(&sim.sol, |x| m.state(x, t)).l2_state
        };
        let (e1, e2) = (err(8), err(16));
        let r = rate(e1, e2);
        assert!(r >= degree as f64 + 0.5, "P{degree}: {e1:e} -> {e2:e}, rate {r}");
    }
}

#[test]
fn dimension_and_periodicity_mismatches_are_rejected() {
    let mesh = Mesh::new_2d(4, 4, [0.0, 0.0], [1.0, 1.0]).unwrap();
    let basis1 = Basis::new(BasisKind::ModalP(1), 1).unwrap();
    assert!(DgOperator::new(Euler::new(2, 1.4), mesh.clone(), basis1, Boundaries::periodic()).is_err());
    let basis = Basis::new(BasisKind::ModalP(1), 2).unwrap();
    let half = Boundaries([Boundary::Periodic, Boundary::Outflow, Boundary::Periodic, Boundary::Periodic]);
    assert!(DgOperator::new(Euler::new(2, 1.4), mesh, basis, half).is_err());
}
