//! Real roots of the depressed cubic `x^3 + p x + q = 0` using real arithmetic only.

use arrayvec::ArrayVec;

/// Which closed-form branch produced the roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubicBranch {
    /// `p = q = 0`: triple root at zero.
    Triple,
    /// `4p^3 + 27q^2 > 0`: a single real root.
    OneReal,
    /// `4p^3 + 27q^2 = 0`, not both zero: a simple and a double root.
    DoubleRoot,
    /// `4p^3 + 27q^2 < 0`: three distinct real roots.
    ThreeReal,
}

/// Roots with multiplicity collapsed, in the order the formulas produce them.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicRoots {
    pub branch: CubicBranch,
    pub roots: ArrayVec<f64, 3>,
}

/// `4p^3 + 27q^2` evaluated on the rescaled cubic (see [`solve_depressed_cubic`]).
/// Same sign as the raw expression but immune to overflow and underflow.
pub fn cubic_discriminant(p: f64, q: f64) -> f64 {
    let (p, q, _) = rescale(p, q);
    4.0 * p * p * p + 27.0 * q * q
}

/// Substitutes `x = s y`, giving `y^3 + (p / s^2) y + q / s^3 = 0` with
/// coefficients of order one. `s` is the power of two nearest
/// `max(|p|^{1/2}, |q|^{1/3})`, so the substitution itself is exact.
fn rescale(p: f64, q: f64) -> (f64, f64, f64) {
    let size = p.abs().sqrt().max(q.abs().cbrt());
    if size == 0.0 || !size.is_finite() {
        return (p, q, 1.0);
    }
    let s = 2f64.powi(size.log2().round() as i32);
    (p / s / s, q / s / s / s, s)
}

/// All real roots of `x^3 + p x + q = 0`.
///
/// Total for finite input. The cubic is rescaled to order-one coefficients
/// first; the formulas are homogeneous, so this changes only rounding. In the
/// single-root branch the smaller of `Y1`, `Y2` comes from `Y1 Y2 = -27 p^3`
/// to avoid cancellation, and `f64::cbrt` is sign-aware as the radicands may
/// be negative.
pub fn solve_depressed_cubic(p: f64, q: f64) -> CubicRoots {
    let mut roots = ArrayVec::new();
    if p == 0.0 && q == 0.0 {
        roots.push(0.0);
        return CubicRoots { branch: CubicBranch::Triple, roots };
    }
    let (p, q, scale) = rescale(p, q);
    let disc = 4.0 * p * p * p + 27.0 * q * q;
    let branch = if disc > 0.0 {
        let s = (12.0 * p * p * p + 81.0 * q * q).sqrt();
        let big = 1.5 * (9.0 * q + if q >= 0.0 { s } else { -s });
        let small = if big != 0.0 { -27.0 * p * p * p / big } else { 0.0 };
        roots.push(-(big.cbrt() + small.cbrt()) / 3.0);
        CubicBranch::OneReal
    } else if disc == 0.0 {
        roots.push(3.0 * q / p);
        roots.push(-1.5 * q / p);
        CubicBranch::DoubleRoot
    } else {
        let sqrt_neg_p = (-p).sqrt();
        let arg = (-3.0 * 3f64.sqrt() * q / (2.0 * p * sqrt_neg_p)).clamp(-1.0, 1.0);
        let third = arg.acos() / 3.0;
        let r = (-3.0 * p).sqrt() / 3.0;
        let (s, c) = third.sin_cos();
        roots.push(-2.0 * r * c);
        roots.push(r * (c + 3f64.sqrt() * s));
        roots.push(r * (c - 3f64.sqrt() * s));
        CubicBranch::ThreeReal
    };
    for r in roots.iter_mut() {
        *r *= scale;
    }
    CubicRoots { branch, roots }
}

/// Scale used to judge a root residual: `max(1, |p|, |q|)^{3/2}`.
pub fn residual_scale(p: f64, q: f64) -> f64 {
    1f64.max(p.abs()).max(q.abs()).powf(1.5)
}

/// `r^3 + p r + q`.
#[inline]
pub fn cubic_value(p: f64, q: f64, r: f64) -> f64 {
    (r * r + p) * r + q
}

/// Newton refinement of a root, kept only while it lowers the residual.
pub fn polish_root(p: f64, q: f64, mut r: f64) -> f64 {
    let mut f = cubic_value(p, q, r).abs();
    for _ in 0..4 {
        let d = 3.0 * r * r + p;
        if d == 0.0 || f == 0.0 {
            break;
        }
        let next = r - cubic_value(p, q, r) / d;
        let fn_ = cubic_value(p, q, next).abs();
        if !(fn_ < f) {
            break;
        }
        r = next;
        f = fn_;
    }
    r
}
