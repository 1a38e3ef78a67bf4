use idplim_core::projection::cubic::{cubic_discriminant, cubic_value, residual_scale, solve_depressed_cubic, CubicBranch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(p: f64, q: f64) {
    let out = solve_depressed_cubic(p, q);
    let scale = residual_scale(p, q);
    for &r in &out.roots {
        let res = cubic_value(p, q, r).abs();
        assert!(res <= 1e-9 * scale, "p={p} q={q} root {r}: residual {res}");
    }
    let raw = 4.0 * p * p * p + 27.0 * q * q;
    let size = 4.0 * (p * p * p).abs() + 27.0 * q * q;
    // Check the branch against the raw discriminant wherever its sign is not
    // in doubt (no overflow or underflow, not within rounding of zero).
    let clear_sign = size.is_normal() && raw.abs() > 1e-12 * size;
    let expected = if p == 0.0 && q == 0.0 {
        Some(CubicBranch::Triple)
    } else if raw == 0.0 && size.is_normal() {
        Some(CubicBranch::DoubleRoot)
    } else if clear_sign {
        Some(if raw > 0.0 { CubicBranch::OneReal } else { CubicBranch::ThreeReal })
    } else {
        None
    };
    if let Some(e) = expected {
        assert_eq!(out.branch, e, "p={p} q={q}");
    }
    assert_eq!(cubic_discriminant(p, q).signum() == raw.signum() || !clear_sign, true);
    let count = match out.branch {
        CubicBranch::Triple | CubicBranch::OneReal => 1,
        CubicBranch::DoubleRoot => 2,
        CubicBranch::ThreeReal => 3,
    };
    assert_eq!(out.roots.len(), count);
    if out.branch == CubicBranch::OneReal {
        // Deflating by the real root leaves x^2 + r x + (r^2 + p), whose
        // discriminant -3 r^2 - 4 p must not be clearly positive.
        let r = out.roots[0];
        let disc = -3.0 * r * r - 4.0 * p;
        assert!(disc <= 1e-7 * scale.powf(2.0 / 3.0), "p={p} q={q}: missed real roots, disc {disc}");
    }
}

fn signed_log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    let mag = 10f64.powf(rng.random_range(-8.0..8.0));
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

#[test]
fn random_coefficients() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..100_000 {
        let (p, q) = if k % 2 == 0 {
            (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0))
        } else {
            (signed_log_uniform(&mut rng), signed_log_uniform(&mut rng))
        };
        check(p, q);
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn case_boundaries() {
    check(0.0, 0.0);
    // Exact double roots: p = -3 t^2, q = 2 t^3 gives (x - t)^2 (x + 2 t).
    for t in [1.0, -1.0, 2.0, 0.5, -4.0, 1024.0] {
        let (p, q) = (-3.0 * t * t, 2.0 * t * t * t);
        assert_eq!(4.0 * p * p * p + 27.0 * q * q, 0.0);
        check(p, q);
        let mut roots = solve_depressed_cubic(p, q).roots.to_vec();
        roots.sort_by(f64::total_cmp);
        let mut want = vec![t, -2.0 * t];
        want.sort_by(f64::total_cmp);
        assert_eq!(roots, want);
    }
    // Either side of the double-root boundary.
    for rel in [1e-15, 1e-12, 1e-8, 1e-3] {
        check(-3.0, 2.0 * (1.0 + rel));
        check(-3.0, 2.0 * (1.0 - rel));
    }
    // Axis cases.
    for v in [1e-300, 1e-10, 1.0, 1e10] {
        check(0.0, v);
        check(0.0, -v);
        check(v, 0.0);
        check(-v, 0.0);
    }
}
