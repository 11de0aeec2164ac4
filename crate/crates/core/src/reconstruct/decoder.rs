//! First-bit majority vote followed by nearest expected run count.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitseq::BitSeq;
use crate::dyadic::Dyadic;
use crate::error::{invalid, Error, Result};
use crate::rmcode::RmCodebook;
use crate::runstats::expected_runs_half;

/// Smallest `m` for which the run statistic is known to separate codewords.
pub const MIN_M: u32 = 4;

/// Strict majority of the first symbols of the first `ell` traces; a tie
/// yields 0.
pub fn step1_first_bit(traces: &[BitSeq], ell: usize) -> Result<bool> {
    if ell == 0 {
        return Err(invalid("the first-bit vote needs ell >= 1"));
    }
    if traces.len() < ell {
        return Err(invalid(format!(
            "the first-bit vote needs {ell} traces, got {}",
            traces.len()
        )));
    }
    let mut ones = 0usize;
    for (i, t) in traces[..ell].iter().enumerate() {
        match t.first() {
            Some(bit) => ones += usize::from(bit),
            None => return Err(invalid(format!("trace {i} is empty"))),
        }
    }
    Ok(2 * ones > ell)
}

/// Mean total run count over the traces.
pub fn mean_runs(traces: &[BitSeq]) -> Result<f64> {
    if traces.is_empty() {
        return Err(invalid("no traces"));
    }
    let sum: usize = traces.iter().map(|t| t.count_runs().total()).sum();
    Ok(sum as f64 / traces.len() as f64)
}

/// Outcome of decoding one trace set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub first_bit: bool,
    pub mean_runs: f64,
    pub index: usize,
    pub codeword: BitSeq,
}

/// A codebook with the exact expected run count of every codeword.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    codebook: RmCodebook,
    exact: Vec<Dyadic>,
    approx: Vec<f64>,
    min_gap: Dyadic,
}

impl Reconstructor {
    pub fn new(m: u32) -> Result<Self> {
        if m < MIN_M {
            return Err(Error::Unsupported(format!(
                "reconstruction is only supported for m >= {MIN_M}, got {m}"
            )));
        }
        let codebook = RmCodebook::new(m)?;
        let exact: Vec<Dyadic> = codebook
            .codewords()
            .par_iter()
            .map(|w| expected_runs_half(w).total)
            .collect();
        let approx = exact.iter().map(Dyadic::to_f64).collect();
        let min_gap = [false, true]
            .iter()
            .map(|&bit| {
                let mut half = exact[codebook.first_bit_range(bit)].to_vec();
                half.sort();
                half.windows(2)
                    .map(|w| &w[1] - &w[0])
                    .min()
                    .expect("at least two codewords per half")
            })
            .min()
            .expect("two halves");
        Ok(Reconstructor {
            codebook,
            exact,
            approx,
            min_gap,
        })
    }

    pub fn codebook(&self) -> &RmCodebook {
        &self.codebook
    }

    pub fn m(&self) -> u32 {
        self.codebook.m()
    }

    pub fn n(&self) -> usize {
        self.codebook.n()
    }

    /// Exact expected total runs of the codeword at `index`.
    pub fn expected_runs(&self, index: usize) -> &Dyadic {
        &self.exact[index]
    }

    pub fn expected_runs_f64(&self, index: usize) -> f64 {
        self.approx[index]
    }

    /// Smallest gap between expected run counts of same-first-bit codewords.
    pub fn min_gap(&self) -> &Dyadic {
        &self.min_gap
    }

    /// Whether the gap meets `0.028` exactly.
    pub fn separated(&self) -> bool {
        self.min_gap.to_rational() >= BigRational::new(BigInt::from(28), BigInt::from(1000))
    }

    /// Index of the codeword with first bit `b` whose expected run count is
    /// nearest `mean`; the earliest in canonical order wins ties.
    pub fn nearest(&self, b: bool, mean: f64) -> usize {
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for i in self.codebook.first_bit_range(b) {
            let dist = (self.approx[i] - mean).abs();
            if dist < best_dist {
                best = i;
                best_dist = dist;
            }
        }
        best
    }

    pub fn step2_nearest(&self, traces: &[BitSeq], b: bool) -> Result<BitSeq> {
        let mean = mean_runs(traces)?;
        Ok(self.codebook.get(self.nearest(b, mean)).clone())
    }

    /// Vote on the first `ell` traces, then match the mean run count of all.
    pub fn reconstruct(&self, traces: &[BitSeq], ell: usize) -> Result<Reconstruction> {
        if traces.is_empty() {
            return Err(invalid("no traces"));
        }
        if let Some(i) = traces.iter().position(BitSeq::is_empty) {
            return Err(invalid(format!("trace {i} is empty")));
        }
        let n = self.n();
        if let Some(i) = traces.iter().position(|t| t.len() > n) {
            return Err(invalid(format!("trace {i} is longer than the blocklength {n}")));
        }
        let first_bit = step1_first_bit(traces, ell)?;
        let mean = mean_runs(traces)?;
        let index = self.nearest(first_bit, mean);
        Ok(Reconstruction {
            first_bit,
            mean_runs: mean,
            index,
            codeword: self.codebook.get(index).clone(),
        })
    }
}

/// Decode `traces` of a codeword of RM(m,1).
pub fn reconstruct(traces: &[BitSeq], m: u32, ell: usize) -> Result<BitSeq> {
    Ok(Reconstructor::new(m)?.reconstruct(traces, ell)?.codeword)
}
