//! First-order Reed-Muller codes RM(m, 1).
//!
//! Canonical codeword order is lexicographic in the coefficient tuple
//! `(u0, u1, ..., um)`. With `u0` as the most significant bit of the index,
//! the first `n` codewords start with 0 and the last `n` start with 1.

use std::collections::HashMap;
use std::collections::HashSet;

use crate::bitseq::BitSeq;
use crate::error::{invalid, Error, Result};

/// Largest `m` accepted by [`RmCodebook::new`] unless overridden.
pub const DEFAULT_MAX_M: u32 = 14;

/// Evaluation vector of `u0 + u1 x1 + ... + um xm` over `F_2^m` in lexicographic
/// order with `x1` most significant.
pub fn encode(m: u32, u0: bool, u: &[bool]) -> Result<BitSeq> {
    if m < 1 {
        return Err(invalid("m must be at least 1"));
    }
    if m >= usize::BITS - 1 {
        return Err(Error::ResourceLimit(format!("m = {m} is too large")));
    }
    if u.len() != m as usize {
        return Err(invalid(format!(
            "expected {m} linear coefficients, got {}",
            u.len()
        )));
    }
    let mask = u
        .iter()
        .fold(0usize, |acc, &bit| (acc << 1) | usize::from(bit));
    Ok(encode_mask(m, u0, mask))
}

fn encode_mask(m: u32, u0: bool, mask: usize) -> BitSeq {
    let n = 1usize << m;
    BitSeq::from_bits((0..n).map(|p| u0 ^ ((p & mask).count_ones() & 1 == 1)))
}

/// All codewords of RM(m, 1), materialized.
#[derive(Debug, Clone)]
pub struct RmCodebook {
    m: u32,
    codewords: Vec<BitSeq>,
    index: HashMap<BitSeq, usize>,
}

impl RmCodebook {
    pub fn new(m: u32) -> Result<Self> {
        Self::with_limit(m, DEFAULT_MAX_M)
    }

    /// Builds the codebook by polynomial evaluation and by the doubling
    /// recursion, and fails unless both give the same set.
    pub fn with_limit(m: u32, max_m: u32) -> Result<Self> {
        if m < 1 {
            return Err(invalid("m must be at least 1"));
        }
        if m > max_m {
            return Err(Error::ResourceLimit(format!(
                "m = {m} exceeds the configured maximum {max_m}"
            )));
        }
        let codewords = by_evaluation(m);
        let recursive: HashSet<BitSeq> = by_recursion(m).into_iter().collect();
        let evaluated: HashSet<&BitSeq> = codewords.iter().collect();
        if recursive.len() != evaluated.len() || !recursive.iter().all(|c| evaluated.contains(c)) {
            return Err(Error::ConstructionMismatch(m));
        }
        let index = codewords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(RmCodebook {
            m,
            codewords,
            index,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Blocklength `2^m`.
    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[BitSeq] {
        &self.codewords
    }

    pub fn get(&self, index: usize) -> &BitSeq {
        &self.codewords[index]
    }

    pub fn index_of(&self, word: &BitSeq) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &BitSeq) -> bool {
        self.index.contains_key(word)
    }

    /// Canonical index range of the codewords whose first bit is `bit`.
    pub fn first_bit_range(&self, bit: bool) -> std::ops::Range<usize> {
        let n = self.n();
        if bit {
            n..2 * n
        } else {
            0..n
        }
    }

    pub fn with_first_bit(&self, bit: bool) -> &[BitSeq] {
        &self.codewords[self.first_bit_range(bit)]
    }

    /// Coefficients `(u0, u1..um)` of the codeword at `index`.
    pub fn coefficients(&self, index: usize) -> (bool, Vec<bool>) {
        let m = self.m as usize;
        let u0 = (index >> m) & 1 == 1;
        let u = (0..m).map(|i| (index >> (m - 1 - i)) & 1 == 1).collect();
        (u0, u)
    }
}

fn by_evaluation(m: u32) -> Vec<BitSeq> {
    let n = 1usize << m;
    (0..2 * n)
        .map(|idx| encode_mask(m, idx >= n, idx & (n - 1)))
        .collect()
}

fn by_recursion(m: u32) -> Vec<BitSeq> {
    let mut code: Vec<BitSeq> = ["00", "01", "10", "11"]
        .iter()
        .map(|s| s.parse().expect("literal"))
        .collect();
    for _ in 1..m {
        code = code
            .iter()
            .map(BitSeq::hat)
            .chain(code.iter().map(BitSeq::check))
            .collect();
    }
    code
}
