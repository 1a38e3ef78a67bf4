//! Picking the DRS step size from a few sample problems.

use serde::Serialize;

use crate::error::{Error, Result};

use super::SolveReport;

/// Iteration totals per grid value; `None` where some sample did not converge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuneOutcome {
    pub best_gamma: f64,
    pub totals: Vec<(f64, Option<usize>)>,
}

/// Runs `solve(sample, gamma)` for every sample and grid value and returns
/// the value with the fewest total iterations among those that converged on
/// every sample. Ties go to the larger `gamma`.
pub fn tune_gamma<S>(
    samples: &[S],
    grid: &[f64],
    mut solve: impl FnMut(&S, f64) -> Result<SolveReport>,
) -> Result<TuneOutcome> {
    if samples.is_empty() || grid.is_empty() {
        return Err(Error::InvalidArgument("tuning needs samples and a grid".into()));
    }
    let mut totals = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let mut total = Some(0usize);
        for s in samples {
            match solve(s, gamma) {
                Ok(rep) if rep.converged => total = total.map(|t| t + rep.iterations),
                Ok(_) | Err(Error::NotConverged { .. }) => {
                    total = None;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        totals.push((gamma, total));
    }
    let best = totals
        .iter()
        .filter_map(|&(g, t)| t.map(|t| (g, t)))
        .min_by(|a, b| a.1.cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .ok_or_else(|| Error::NotConverged { iterations: 0, residual: f64::NAN })?;
    Ok(TuneOutcome { best_gamma: best.0, totals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(iters: usize, converged: bool) -> SolveReport {
        SolveReport { iterations: iters, converged, ..SolveReport::default() }
    }

    #[test]
    fn single_value_grid() {
        let out = tune_gamma(&[()], &[0.3], |_, _| Ok(fake(5, true))).unwrap();
        assert_eq!(out.best_gamma, 0.3);
    }

    #[test]
    fn fewest_iterations_then_largest_gamma() {
        let iters = |g: f64| if g == 1e-4 { 10 } else { 40 };
        let out = tune_gamma(&[(), ()], &[1e-6, 1e-4, 1e-2], |_, g| Ok(fake(iters(g), true))).unwrap();
        assert_eq!(out.best_gamma, 1e-4);
        let out = tune_gamma(&[()], &[1e-6, 1e-2], |_, _| Ok(fake(3, true))).unwrap();
        assert_eq!(out.best_gamma, 1e-2);
    }

    #[test]
    fn all_failing_is_an_error() {
        assert!(tune_gamma(&[()], &[1.0, 2.0], |_, _| Ok(fake(9, false))).is_err());
    }
}
