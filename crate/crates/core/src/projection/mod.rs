//! Euclidean projection onto the admissible set `G^eps` by enumerating the
//! closed-form KKT candidates and keeping the closest one.
//!
//! The 1D problem is the 2D problem with a single momentum component, so both
//! go through one candidate generator. In 2D the optimal momentum is parallel
//! to the input momentum; the generator works with the dominant component
//! `y1` (`|y1| >= |y2|`) and recovers the other from `m2 = (y2 / y1) m1`.
//!
//! Every Case 1/3/4 candidate lies on the boundary of `G^eps` by construction,
//! so admitting a spurious candidate can never beat the true projection. This
//! is why the sign filters of the KKT cases are relaxed by a small tolerance,
//! while the feasibility filters (`rho >= eps`, Case 1 energy) are enforced.

pub mod cubic;
mod fallback;
pub mod kkt;

use arrayvec::ArrayVec;
use serde::Serialize;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::state::{AdmissibleSet, ConservedState};

pub use cubic::{solve_depressed_cubic, CubicBranch, CubicRoots};
pub use kkt::kkt_residual;

/// Which KKT case produced a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseId {
    /// Density clamped to `eps`, momentum and energy kept.
    Case1,
    /// The input itself (already admissible).
    Case2,
    /// Corner `(eps, 0, eps)` for zero momentum.
    Case3V0,
    /// Both constraints active, momentum from the cubic.
    Case3Cubic,
    /// `(u, 0, eps)` for zero momentum.
    Case4V0,
    /// Energy constraint active, density from the quadratic.
    Case4Quadratic,
}

/// One KKT candidate together with its multipliers `(lambda, mu)` when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionCandidate {
    pub state: ConservedState,
    pub case_id: CaseId,
    pub multipliers: Option<(f64, f64)>,
}

/// Result of a projection with provenance, for diagnostics and tests.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOutcome {
    pub state: ConservedState,
    /// `None` when the numerical fallback produced the point.
    pub case_id: Option<CaseId>,
    pub fallback: bool,
}

/// Relative tolerance used to relax candidate filters.
pub const FILTER_RTOL: f64 = 1e-12;

/// `min(max(x, lo), hi)`.
pub fn clip_scalar(x: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
    }
    Ok(x.max(lo).min(hi))
}

/// Projection of the 1D state `(u, v, w)`.
pub fn project_1d(u: f64, v: f64, w: f64, set: &AdmissibleSet) -> Result<ConservedState> {
    project(&ConservedState::one_d(u, v, w), set)
}

/// Projection of the 2D state `(u, v1, v2, w)`.
pub fn project_2d(u: f64, v1: f64, v2: f64, w: f64, set: &AdmissibleSet) -> Result<ConservedState> {
    project(&ConservedState::two_d(u, v1, v2, w), set)
}

/// Projection of `s` onto `set`.
pub fn project(s: &ConservedState, set: &AdmissibleSet) -> Result<ConservedState> {
    Ok(project_detailed(s, set)?.state)
}

/// Projects a field row `[rho, m.., E]` in place. Returns whether the
/// numerical fallback was needed.
pub fn project_row(row: &mut [f64], set: &AdmissibleSet) -> Result<bool> {
    if set.contains_row(row) {
        return Ok(false);
    }
    let s = ConservedState::from_components(row)?;
    let out = project_detailed(&s, set)?;
    out.state.write_components(row);
    Ok(out.fallback)
}

/// Projection of `s` with the case that produced it.
pub fn project_detailed(s: &ConservedState, set: &AdmissibleSet) -> Result<ProjectionOutcome> {
    check_input(s, set)?;
    if set.contains(s) {
        return Ok(ProjectionOutcome { state: *s, case_id: Some(CaseId::Case2), fallback: false });
    }
    let cands = projection_candidates(s, set)?;
    match pick_closest(s, &cands, set) {
        Some(c) => Ok(ProjectionOutcome { state: c.state, case_id: Some(c.case_id), fallback: false }),
        None => {
            diagnostics::record_fallback();
            let state = fallback::project_numerically(s, set.epsilon());
            Ok(ProjectionOutcome { state, case_id: None, fallback: true })
        }
    }
}

/// Closest candidate. Near-ties in distance (two roots of a tangency that
/// agree to rounding) go to the candidate with the smaller KKT residual.
fn pick_closest<'a>(
    s: &ConservedState,
    cands: &'a [ProjectionCandidate],
    set: &AdmissibleSet,
) -> Option<&'a ProjectionCandidate> {
    let best = cands.iter().map(|c| c.state.distance_sq(s)).fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * best.max(f64::MIN_POSITIVE);
    cands
        .iter()
        .filter(|c| c.state.distance_sq(s) <= best + slack)
        .min_by(|a, b| kkt_residual(s, &a.state, set).total_cmp(&kkt_residual(s, &b.state, set)))
}

fn check_input(s: &ConservedState, set: &AdmissibleSet) -> Result<()> {
    if !(set.epsilon() > 0.0) {
        return Err(Error::InvalidArgument("projection needs epsilon > 0".into()));
    }
    if !s.is_finite() {
        return Err(Error::NonFinite(format!("projection input {:?}", s.components())));
    }
    Ok(())
}

/// All admissible KKT candidates for `s` (Case 2 only if `s` is admissible).
///
/// Every returned state passes `set.contains` exactly.
pub fn projection_candidates(s: &ConservedState, set: &AdmissibleSet) -> Result<Vec<ProjectionCandidate>> {
    check_input(s, set)?;
    if set.contains(s) {
        return Ok(vec![ProjectionCandidate {
            state: *s,
            case_id: CaseId::Case2,
            multipliers: Some((0.0, 0.0)),
        }]);
    }
    let eps = set.epsilon();
    let x = s.rho();
    let z = s.energy();
    let (y1, y2, swapped) = match s.momentum() {
        [m] => (*m, 0.0, false),
        [a, b] if a.abs() >= b.abs() => (*a, *b, false),
        [a, b] => (*b, *a, true),
        _ => unreachable!("states are 1D or 2D"),
    };
    let raw = reduced_candidates(x, y1, y2, z, eps);
    let mut out = Vec::with_capacity(raw.len());
    for c in raw {
        let Some([rho, m1, m2, e]) = snap(c.point, set) else { continue };
        let state = match (s.dim(), swapped) {
            (1, _) => ConservedState::one_d(rho, m1, e),
            (_, false) => ConservedState::two_d(rho, m1, m2, e),
            (_, true) => ConservedState::two_d(rho, m2, m1, e),
        };
        out.push(ProjectionCandidate { state, case_id: c.case_id, multipliers: c.multipliers });
    }
    Ok(out)
}

struct RawCandidate {
    point: [f64; 4],
    case_id: CaseId,
    multipliers: Option<(f64, f64)>,
}

/// Candidate points in reduced coordinates `[rho, m1, m2, E]` with `|y1| >= |y2|`.
fn reduced_candidates(x: f64, y1: f64, y2: f64, z: f64, eps: f64) -> ArrayVec<RawCandidate, 12> {
    let scale = 1f64.max(x.abs()).max(y1.abs()).max(y2.abs()).max(z.abs());
    let tol = FILTER_RTOL * scale;
    let ysq = y1 * y1 + y2 * y2;
    let mut out = ArrayVec::new();

    // Case 1: only the density constraint is active.
    if x < eps && z - ysq / (2.0 * eps) >= eps - tol {
        out.push(RawCandidate { point: [eps, y1, y2, z], case_id: CaseId::Case1, multipliers: Some((eps - x, 0.0)) });
    }

    if y1 == 0.0 {
        // Zero momentum (|y2| <= |y1| forces y2 = 0 as well).
        if x < eps + tol && z < eps + tol {
            out.push(RawCandidate {
                point: [eps, 0.0, 0.0, eps],
                case_id: CaseId::Case3V0,
                multipliers: Some((eps - x, eps - z)),
            });
        }
        if x >= eps - tol && z < eps + tol {
            out.push(RawCandidate {
                point: [x.max(eps), 0.0, 0.0, eps],
                case_id: CaseId::Case4V0,
                multipliers: Some((0.0, eps - z)),
            });
        }
        return out;
    }

    let ratio = y2 / y1;
    let a = 1.0 + ratio * ratio;

    // Case 3: rho = eps and the energy constraint is active.
    let p = (4.0 * eps * eps - 2.0 * eps * z) / a;
    let q = -2.0 * eps * eps * y1 / a;
    let roots = cubic_roots_with_tangency(p, q);
    for m1 in roots {
        if m1 == 0.0 {
            continue;
        }
        let gap = m1 * (y1 - m1);
        let ok_mu = gap > -tol * m1.abs().max(eps);
        let ok_lambda = 2.0 * eps * x + a * gap < 2.0 * eps * eps + tol * eps;
        if !(ok_mu && ok_lambda) {
            continue;
        }
        let m2 = ratio * m1;
        let e = eps + (m1 * m1 + m2 * m2) / (2.0 * eps);
        let mu = eps * (y1 / m1 - 1.0);
        let lambda = eps - x - a * gap / (2.0 * eps);
        out.push(RawCandidate { point: [eps, m1, m2, e], case_id: CaseId::Case3Cubic, multipliers: Some((lambda, mu)) });
    }

    // Case 4: only the energy constraint is active. rho solves
    // rho^2 - x rho + c = 0 with c = (2 x y1^2 (z - eps) - a y1^4) / (4 K).
    let y1sq = y1 * y1;
    let k = 2.0 * y1sq + (eps + x - z).powi(2) / a;
    if k > 0.0 && k.is_finite() {
        let c = (2.0 * x * y1sq * (z - eps) - a * y1sq * y1sq) / (4.0 * k);
        for rho in stable_quadratic_roots(x, c, tol * scale) {
            if !(rho >= eps - tol) {
                continue;
            }
            let rho = rho.max(eps);
            let delta = clamp_small_negative(-8.0 * a * rho * rho + 8.0 * a * x * rho + a * a * y1sq, tol * scale * scale);
            if delta < 0.0 {
                continue;
            }
            // m solves a m^2 - a y1 m + 2 rho (rho - x) = 0.
            let big = 0.5 * (y1 + y1.signum() * delta.sqrt() / a);
            let small = if big != 0.0 { 2.0 * rho * (rho - x) / (a * big) } else { 0.0 };
            for m1 in [small, big] {
                let m2 = ratio * m1;
                let e = eps + (m1 * m1 + m2 * m2) / (2.0 * rho);
                if !(e > z - tol) {
                    continue;
                }
                let point = polish_case4([rho, m1, m2, e], x, y1, y2, z, eps);
                out.push(RawCandidate {
                    point,
                    case_id: CaseId::Case4Quadratic,
                    multipliers: Some((0.0, point[3] - z)),
                });
            }
        }
    }
    out
}

/// Roots of the depressed cubic, polished, plus the double-root pair when the
/// discriminant is zero up to rounding (a tangency the sign test can miss).
fn cubic_roots_with_tangency(p: f64, q: f64) -> ArrayVec<f64, 5> {
    let mut out: ArrayVec<f64, 5> = solve_depressed_cubic(p, q)
        .roots
        .into_iter()
        .map(|r| cubic::polish_root(p, q, r))
        .collect();
    let d = cubic::cubic_discriminant(p, q);
    let d_scale = 4.0 * (p * p * p).abs() + 27.0 * q * q;
    if p != 0.0 && d != 0.0 && d.abs() <= 1e-10 * d_scale {
        out.push(cubic::polish_root(p, q, 3.0 * q / p));
        out.push(cubic::polish_root(p, q, -1.5 * q / p));
    }
    out
}

/// Real roots of `r^2 - b r + c = 0`, computed without cancellation.
fn stable_quadratic_roots(b: f64, c: f64, tol: f64) -> ArrayVec<f64, 2> {
    let mut out = ArrayVec::new();
    let disc = clamp_small_negative(b * b - 4.0 * c, tol);
    if disc < 0.0 || !disc.is_finite() {
        return out;
    }
    let sq = disc.sqrt();
    let big = 0.5 * (b + if b >= 0.0 { sq } else { -sq });
    out.push(big);
    if big != 0.0 {
        out.push(c / big);
    } else {
        out.push(0.0);
    }
    out
}

fn clamp_small_negative(v: f64, tol: f64) -> f64 {
    if v < 0.0 && v >= -tol {
        0.0
    } else {
        v
    }
}

/// Newton refinement of a Case 4 point on the system in `(rho, mu)`:
///   rho - x - mu |y|^2 / (2 (rho + mu)^2) = 0
///   eps - z - mu + |y|^2 rho / (2 (rho + mu)^2) = 0
/// with `m = y rho / (rho + mu)` and `E = z + mu`. Steps are kept only while
/// the residual shrinks, so the closed-form value is never made worse.
fn polish_case4(pt: [f64; 4], x: f64, y1: f64, y2: f64, z: f64, eps: f64) -> [f64; 4] {
    let v = y1 * y1 + y2 * y2;
    let resid = |rho: f64, mu: f64| {
        let s = rho + mu;
        let f1 = rho - x - mu * v / (2.0 * s * s);
        let f2 = eps - z - mu + v * rho / (2.0 * s * s);
        (f1, f2)
    };
    let (mut rho, mut mu) = (pt[0], pt[3] - z);
    if !(mu > 0.0) || !(rho > 0.0) {
        return pt;
    }
    let (mut f1, mut f2) = resid(rho, mu);
    let mut norm = f1.abs().max(f2.abs());
    for _ in 0..3 {
        if norm == 0.0 {
            break;
        }
        let s = rho + mu;
        let s2 = s * s;
        let s3 = s2 * s;
        let j11 = 1.0 + mu * v / s3;
        let j12 = -v / (2.0 * s2) + mu * v / s3;
        let j21 = v / (2.0 * s2) - v * rho / s3;
        let j22 = -1.0 - v * rho / s3;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let nr = rho - (f1 * j22 - f2 * j12) / det;
        let nm = mu - (j11 * f2 - j21 * f1) / det;
        if !(nr >= eps) || !(nm > 0.0) {
            break;
        }
        let (g1, g2) = resid(nr, nm);
        let nn = g1.abs().max(g2.abs());
        if !(nn < norm) {
            break;
        }
        (rho, mu, f1, f2, norm) = (nr, nm, g1, g2, nn);
    }
    if rho == pt[0] && mu == pt[3] - z {
        return pt;
    }
    let s = rho + mu;
    let m1 = y1 * rho / s;
    let m2 = y2 * rho / s;
    [rho, m1, m2, eps + (m1 * m1 + m2 * m2) / (2.0 * rho)]
}

/// Makes a candidate pass the exact membership test, or rejects it when it is
/// infeasible by more than rounding. Density below `eps` by rounding is set to
/// `eps`; missing internal energy is added to `E`, then `E` is nudged up by
/// ulps until the exact test passes.
fn snap(pt: [f64; 4], set: &AdmissibleSet) -> Option<[f64; 4]> {
    let eps = set.epsilon();
    let [mut rho, m1, m2, mut e] = pt;
    if !pt.iter().all(|v| v.is_finite()) {
        return None;
    }
    let scale = 1f64.max(rho.abs()).max(m1.abs()).max(m2.abs()).max(e.abs());
    if rho < eps {
        if rho < eps - FILTER_RTOL * scale {
            return None;
        }
        rho = eps;
    }
    let msq = m1 * m1 + m2 * m2;
    let needed = eps + msq / (2.0 * rho);
    if e < needed {
        if e < needed - FILTER_RTOL * scale.max(needed.abs()) {
            return None;
        }
        e = needed;
    }
    for _ in 0..64 {
        if set.contains_parts(rho, msq, e) {
            return Some([rho, m1, m2, e]);
        }
        e = e.next_up();
    }
    None
}
