//! Sample sizes from the exponential tail bounds.
//!
//! The first-bit vote errs with probability at most `exp(-l/288)` and the run
//! average strays by `D/2` with probability at most `2 exp(-k D^2 / (2 n^2))`.
//! Setting both to `n^-c` gives the sizes below.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DEFAULT_PLAN_C: f64 = 2.0;
/// Minimum gap between expected run counts of same-first-bit codewords.
pub const DEFAULT_DELTA: f64 = 0.028;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    /// Traces used by the first-bit vote.
    pub ell: u64,
    /// Traces averaged for the run statistic.
    pub k: u64,
}

fn ceil_at_least_one(v: f64) -> u64 {
    (v.ceil() as u64).max(1)
}

/// `l = ceil(288 c ln n)` and `k = ceil((2c / D^2) n^2 ln n)`, each at least 1.
pub fn plan_sample_sizes(n: usize, c: f64, delta: f64) -> Result<SamplePlan> {
    if n < 16 {
        return Err(invalid(format!("planner needs n >= 16, got {n}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("target exponent must be positive, got {c}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!("gap must be positive, got {delta}")));
    }
    let nf = n as f64;
    let ln = nf.ln();
    Ok(SamplePlan {
        ell: ceil_at_least_one(288.0 * c * ln),
        k: ceil_at_least_one(2.0 * c / (delta * delta) * nf * nf * ln),
    })
}

/// Planned sizes with `l` clamped to at most `k`, for an explicit `k`.
pub fn plan_with_k(n: usize, c: f64, k: u64) -> Result<SamplePlan> {
    let plan = plan_sample_sizes(n, c, DEFAULT_DELTA)?;
    Ok(SamplePlan {
        ell: plan.ell.min(k).max(1),
        k: k.max(1),
    })
}
