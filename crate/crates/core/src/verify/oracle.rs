//! Expected run counts by enumerating every deletion pattern.

use crate::bitseq::{BitSeq, RunCounts};
use crate::channel::extract_bits;
use crate::error::{invalid, Error, Result};
use crate::runstats::ExpectedRuns;
use crate::scalar::{pow, Scalar};

/// Longest input accepted by [`brute_force_expected_runs`].
pub const ORACLE_MAX_LEN: usize = 20;

fn word_runs(t: u64, len: usize) -> RunCounts {
    if len == 0 {
        return RunCounts::default();
    }
    let inner = if len > 1 {
        ((t ^ (t >> 1)) & ((1u64 << (len - 1)) - 1)).count_ones() as usize
    } else {
        0
    };
    RunCounts::from_total(inner + 1, t & 1 == 1)
}

/// `sum_w Pr(w) R(T_x(w))` over all `2^n` deletion patterns `w`.
///
/// Patterns are grouped by the number of deletions so each probability
/// `q^d (1-q)^(n-d)` is formed once. Works for any `q` in `[0, 1]`.
pub fn brute_force_expected_runs<T: Scalar>(x: &BitSeq, q: T) -> Result<ExpectedRuns<T>> {
    let n = x.len();
    if n > ORACLE_MAX_LEN {
        return Err(Error::ResourceLimit(format!(
            "brute force over 2^{n} deletion patterns exceeds the limit of length {ORACLE_MAX_LEN}"
        )));
    }
    if !(q >= T::zero() && q <= T::one()) {
        return Err(invalid(format!("deletion probability must lie in [0, 1], got {q:?}")));
    }
    let word = x.words().first().copied().unwrap_or(0);
    let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    // zero-run and one-run totals, indexed by deletion count
    let mut zeros = vec![0u64; n + 1];
    let mut ones = vec![0u64; n + 1];
    for del in 0..(1u64 << n) {
        let keep = !del & full;
        let kept = keep.count_ones() as usize;
        let runs = word_runs(extract_bits(word, keep), kept);
        zeros[n - kept] += runs.zeros as u64;
        ones[n - kept] += runs.ones as u64;
    }
    let p = T::one() - q.clone();
    let mut ez = T::zero();
    let mut eo = T::zero();
    for d in 0..=n {
        let w = pow(&q, d as u64) * pow(&p, (n - d) as u64);
        ez = ez + w.clone() * T::from_count(zeros[d] as usize);
        eo = eo + w * T::from_count(ones[d] as usize);
    }
    Ok(ExpectedRuns {
        total: ez.clone() + eo.clone(),
        zeros: ez,
        ones: eo,
        q,
    })
}
