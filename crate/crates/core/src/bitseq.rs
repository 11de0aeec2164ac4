//! Packed binary sequences and run counting.
//!
//! Position `i` (0-based) lives in word `i / 64`, bit `i % 64`, so the first
//! symbol of a sequence is the least significant bit of word 0. Bits past
//! `len` are always zero, which keeps the derived `Eq`/`Hash` meaningful.
//!
//! Index sets returned by [`BitSeq::support`] and [`BitSeq::cosupport`] are
//! 1-based so they line up with the pairwise sums in `runstats`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSeq {
    words: Vec<u64>,
    len: usize,
}

/// Number of maximal runs of each symbol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunCounts {
    pub zeros: usize,
    pub ones: usize,
}

impl RunCounts {
    pub fn total(&self) -> usize {
        self.zeros + self.ones
    }

    /// Runs alternate, so the total and the first symbol fix the split.
    pub fn from_total(total: usize, first: bool) -> Self {
        let lead = total.div_ceil(2);
        let other = total / 2;
        if first {
            RunCounts {
                zeros: other,
                ones: lead,
            }
        } else {
            RunCounts {
                zeros: lead,
                ones: other,
            }
        }
    }
}

#[inline]
fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl BitSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitSeq {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = BitSeq {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        s.clear_tail();
        s
    }

    /// Build from packed words; bits at or beyond `len` are discarded.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut s = BitSeq { words, len };
        s.clear_tail();
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = BitSeq::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= low_mask(rem);
            }
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Append the low `count` bits of `bits`, least significant first.
    pub fn push_bits(&mut self, bits: u64, count: usize) {
        debug_assert!(count <= 64);
        if count == 0 {
            return;
        }
        let bits = bits & low_mask(count);
        let offset = self.len % 64;
        if offset == 0 {
            self.words.push(bits);
        } else {
            *self.words.last_mut().expect("non-empty") |= bits << offset;
            if offset + count > 64 {
                self.words.push(bits >> (64 - offset));
            }
        }
        self.len += count;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Symbol at 0-based position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn first(&self) -> Option<bool> {
        (self.len > 0).then(|| self.get(0))
    }

    pub fn last(&self) -> Option<bool> {
        (self.len > 0).then(|| self.get(self.len - 1))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// 1-based positions holding a 1.
    pub fn support(&self) -> Vec<usize> {
        self.positions(true)
    }

    /// 1-based positions holding a 0.
    pub fn cosupport(&self) -> Vec<usize> {
        self.positions(false)
    }

    fn positions(&self, symbol: bool) -> Vec<usize> {
        self.iter()
            .enumerate()
            .filter(|&(_, b)| b == symbol)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn complement(&self) -> Self {
        let mut s = BitSeq {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        s.clear_tail();
        s
    }

    pub fn concat(&self, other: &BitSeq) -> Self {
        if self.len.is_multiple_of(64) {
            let mut words = self.words.clone();
            words.extend_from_slice(&other.words);
            return BitSeq {
                words,
                len: self.len + other.len,
            };
        }
        let mut s = self.clone();
        for b in other.iter() {
            s.push(b);
        }
        s
    }

    /// `x || x`
    pub fn hat(&self) -> Self {
        self.concat(self)
    }

    /// `x || complement(x)`
    pub fn check(&self) -> Self {
        self.concat(&self.complement())
    }

    /// Number of positions `i >= 1` with `x[i] != x[i - 1]`.
    pub fn transitions(&self) -> usize {
        let mut count = 0usize;
        let mut carry = 0u64;
        let full = self.len / 64;
        for (wi, &w) in self.words.iter().enumerate() {
            let shifted = (w << 1) | carry;
            let mut diff = w ^ shifted;
            if wi == 0 {
                diff &= !1;
            }
            if wi == full {
                diff &= low_mask(self.len % 64);
            }
            count += diff.count_ones() as usize;
            carry = w >> 63;
        }
        count
    }

    /// Maximal runs of 0s and 1s; the empty sequence has none.
    pub fn count_runs(&self) -> RunCounts {
        match self.first() {
            None => RunCounts::default(),
            Some(first) => RunCounts::from_total(self.transitions() + 1, first),
        }
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSeq(\"{self}\")")
    }
}

impl FromStr for BitSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitSeq::new();
        for c in s.trim().chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => {
                    return Err(Error::InvalidFormat(format!(
                        "bit string may only contain 0 and 1, found {c:?}"
                    )))
                }
            }
        }
        Ok(out)
    }
}

impl Serialize for BitSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
