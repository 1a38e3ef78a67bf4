//! Process-wide counters for run reports.
//!
//! Counters are monotone; callers that need per-run numbers take a snapshot
//! before and after and subtract.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

static ROW_PROJECTIONS: AtomicU64 = AtomicU64::new(0);
static PROJECTION_FALLBACKS: AtomicU64 = AtomicU64::new(0);

/// Counts `n` single-state projections onto the admissible set.
pub fn record_row_projections(n: u64) {
    ROW_PROJECTIONS.fetch_add(n, Ordering::Relaxed);
}

/// Counts one use of the numerical fallback projection.
pub fn record_fallback() {
    PROJECTION_FALLBACKS.fetch_add(1, Ordering::Relaxed);
}

/// Current counter values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CounterSnapshot {
    pub row_projections: u64,
    pub fallbacks: u64,
}

impl CounterSnapshot {
    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &CounterSnapshot) -> CounterSnapshot {
        CounterSnapshot {
            row_projections: self.row_projections - earlier.row_projections,
            fallbacks: self.fallbacks - earlier.fallbacks,
        }
    }
}

pub fn snapshot() -> CounterSnapshot {
    CounterSnapshot {
        row_projections: ROW_PROJECTIONS.load(Ordering::Relaxed),
        fallbacks: PROJECTION_FALLBACKS.load(Ordering::Relaxed),
    }
}

/// Total fallback projections since process start.
pub fn fallback_count() -> u64 {
    PROJECTION_FALLBACKS.load(Ordering::Relaxed)
}
