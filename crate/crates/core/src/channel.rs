//! The i.i.d. deletion channel.
//!
//! Draw `d` of a channel reads a fixed-width window of the `(seed, stream_id)`
//! keystream starting at `d * width(n)`, so a trace is a pure function of
//! `(seed, stream_id, d, x)`. For `q = 1/2` each keystream bit is one deletion
//! decision; for other `q` each position consumes one 64-bit uniform.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitseq::BitSeq;
use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// Consecutive empty traces tolerated by rejection sampling before giving up.
pub const DEFAULT_RETRY_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub q: f64,
    pub seed: u64,
    pub stream_id: u64,
    pub retry_budget: u64,
}

impl ChannelConfig {
    pub fn new(q: f64, seed: u64, stream_id: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid(format!("deletion probability {q} is not in [0, 1]")));
        }
        Ok(ChannelConfig {
            q,
            seed,
            stream_id,
            retry_budget: DEFAULT_RETRY_BUDGET,
        })
    }

    pub fn with_stream(mut self, stream_id: u64) -> Self {
        self.stream_id = stream_id;
        self
    }
}

/// `1` marks a deleted position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeletionMask(BitSeq);

impl DeletionMask {
    pub fn new(mask: BitSeq) -> Self {
        DeletionMask(mask)
    }

    pub fn bits(&self) -> &BitSeq {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn deletions(&self) -> usize {
        self.0.weight()
    }
}

/// The subsequence of `x` at the positions `mask` keeps.
pub fn apply_mask(x: &BitSeq, mask: &DeletionMask) -> Result<BitSeq> {
    if x.len() != mask.len() {
        return Err(invalid(format!(
            "mask length {} does not match sequence length {}",
            mask.len(),
            x.len()
        )));
    }
    let ext = Extractor::detect();
    let mut out = BitSeq::new();
    for (i, (&w, &del)) in x.words().iter().zip(mask.bits().words()).enumerate() {
        let keep = !del & valid_bits(x.len(), i);
        out.push_bits(ext.pext(w, keep), keep.count_ones() as usize);
    }
    Ok(out)
}

#[inline]
fn valid_bits(len: usize, word_index: usize) -> u64 {
    let start = word_index * 64;
    let rem = len.saturating_sub(start);
    if rem >= 64 {
        u64::MAX
    } else {
        (1u64 << rem) - 1
    }
}

/// Length, leading symbol and run count of one trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStats {
    pub len: usize,
    pub first: bool,
    pub runs: usize,
}

#[derive(Clone, Copy)]
struct Extractor {
    #[cfg_attr(not(target_arch = "x86_64"), allow(dead_code))]
    bmi2: bool,
}

impl Extractor {
    fn detect() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            Extractor {
                bmi2: std::arch::is_x86_feature_detected!("bmi2"),
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        {
            Extractor { bmi2: false }
        }
    }

    /// Parallel bit extract: gather the bits of `value` selected by `mask`
    /// into the low end of the result.
    #[inline]
    fn pext(self, value: u64, mask: u64) -> u64 {
        #[cfg(target_arch = "x86_64")]
        if self.bmi2 {
            // SAFETY: bmi2 support was checked at construction.
            return unsafe { pext_bmi2(value, mask) };
        }
        pext_soft(value, mask)
    }
}

/// Gather the bits of `value` selected by `mask` into the low end.
pub(crate) fn extract_bits(value: u64, mask: u64) -> u64 {
    Extractor::detect().pext(value, mask)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "bmi2")]
unsafe fn pext_bmi2(value: u64, mask: u64) -> u64 {
    std::arch::x86_64::_pext_u64(value, mask)
}

fn pext_soft(value: u64, mut mask: u64) -> u64 {
    let mut out = 0u64;
    let mut k = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if value & low != 0 {
            out |= 1 << k;
        }
        k += 1;
        mask ^= low;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    KeepAll,
    DeleteAll,
    Half,
    Threshold(u64),
}

#[inline]
fn word_stats(t: u64, len: usize) -> TraceStats {
    if len == 0 {
        return TraceStats {
            len: 0,
            first: false,
            runs: 0,
        };
    }
    let inner = (t ^ (t >> 1)) & ((1u64 << (len - 1)) - 1);
    TraceStats {
        len,
        first: t & 1 == 1,
        runs: inner.count_ones() as usize + 1,
    }
}

/// Traces drawn from a batch, plus the number of channel uses spent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub traces: Vec<BitSeq>,
    pub channel_uses: u64,
}

/// A deletion channel bound to one keystream.
pub struct DeletionChannel {
    cfg: ChannelConfig,
    mode: Mode,
    rng: ChaCha8Rng,
    // keystream position in 32-bit words, tracked to avoid needless seeks
    cursor: u128,
    next_draw: u64,
    ext: Extractor,
    mask_buf: Vec<u64>,
}

impl DeletionChannel {
    pub fn new(cfg: ChannelConfig) -> Result<Self> {
        let cfg = ChannelConfig::new(cfg.q, cfg.seed, cfg.stream_id).map(|c| ChannelConfig {
            retry_budget: cfg.retry_budget,
            ..c
        })?;
        let mode = if cfg.q == 0.0 {
            Mode::KeepAll
        } else if cfg.q == 1.0 {
            Mode::DeleteAll
        } else if cfg.q == 0.5 {
            Mode::Half
        } else {
            // deleted iff u < q * 2^64
            let t = cfg.q * 18_446_744_073_709_551_616.0;
            Mode::Threshold(if t >= u64::MAX as f64 { u64::MAX } else { t as u64 })
        };
        Ok(DeletionChannel {
            cfg,
            mode,
            rng: stream_rng(cfg.seed, cfg.stream_id),
            cursor: 0,
            next_draw: 0,
            ext: Extractor::detect(),
            mask_buf: Vec::new(),
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    /// Index of the next draw.
    pub fn draw_index(&self) -> u64 {
        self.next_draw
    }

    /// Position the channel so the next draw is `draw`.
    pub fn seek(&mut self, draw: u64) {
        self.next_draw = draw;
    }

    fn width(&self, n: usize) -> u128 {
        match self.mode {
            Mode::KeepAll | Mode::DeleteAll => 0,
            Mode::Half => n.div_ceil(64) as u128,
            Mode::Threshold(_) => n as u128,
        }
    }

    /// Move the keystream to the start of the next draw of `width` words.
    #[inline]
    fn advance(&mut self, width: u128) {
        let start = self.next_draw as u128 * width * 2;
        if width > 0 && start != self.cursor {
            self.rng.set_word_pos(start);
        }
        self.cursor = start + width * 2;
        self.next_draw += 1;
    }

    /// Fill `mask_buf` with the deletion mask of the next draw for length `n`.
    fn draw_mask_words(&mut self, n: usize) {
        self.advance(self.width(n));

        let words = n.div_ceil(64);
        self.mask_buf.clear();
        match self.mode {
            Mode::KeepAll => self.mask_buf.resize(words, 0),
            Mode::DeleteAll => self.mask_buf.resize(words, u64::MAX),
            Mode::Half => {
                for _ in 0..words {
                    self.mask_buf.push(self.rng.next_u64());
                }
            }
            Mode::Threshold(t) => {
                let mut word = 0u64;
                for i in 0..n {
                    if self.rng.next_u64() < t {
                        word |= 1 << (i % 64);
                    }
                    if i % 64 == 63 || i + 1 == n {
                        self.mask_buf.push(word);
                        word = 0;
                    }
                }
            }
        }
        for (i, w) in self.mask_buf.iter_mut().enumerate() {
            *w &= valid_bits(n, i);
        }
    }

    pub fn next_mask(&mut self, n: usize) -> DeletionMask {
        self.draw_mask_words(n);
        DeletionMask(BitSeq::from_words(self.mask_buf.clone(), n))
    }

    pub fn sample_trace(&mut self, x: &BitSeq) -> BitSeq {
        self.sample_with_mask(x).0
    }

    pub fn sample_with_mask(&mut self, x: &BitSeq) -> (BitSeq, DeletionMask) {
        let mask = self.next_mask(x.len());
        let trace = apply_mask(x, &mask).expect("mask drawn for this length");
        (trace, mask)
    }

    /// Statistics of the next trace without materializing it.
    pub fn next_stats(&mut self, x: &BitSeq) -> TraceStats {
        let n = x.len();
        if self.mode == Mode::Half && (1..=64).contains(&n) {
            self.advance(1);
            let keep = !self.rng.next_u64() & valid_bits(n, 0);
            return word_stats(self.ext.pext(x.words()[0], keep), keep.count_ones() as usize);
        }
        self.draw_mask_words(n);
        let mut len = 0usize;
        let mut first = false;
        let mut last = false;
        let mut transitions = 0usize;
        for (i, (&w, &del)) in x.words().iter().zip(&self.mask_buf).enumerate() {
            let keep = !del & valid_bits(n, i);
            let l = keep.count_ones() as usize;
            if l == 0 {
                continue;
            }
            let t = self.ext.pext(w, keep);
            let head = t & 1 == 1;
            if len == 0 {
                first = head;
            } else if head != last {
                transitions += 1;
            }
            if l > 1 {
                let inner = (t ^ (t >> 1)) & ((1u64 << (l - 1)) - 1);
                transitions += inner.count_ones() as usize;
            }
            last = (t >> (l - 1)) & 1 == 1;
            len += l;
        }
        TraceStats {
            len,
            first,
            runs: if len == 0 { 0 } else { transitions + 1 },
        }
    }

    /// `k` traces. With `nonempty_only`, empty traces are discarded and drawing
    /// continues until `k` non-empty traces are collected.
    pub fn sample_batch(&mut self, x: &BitSeq, k: usize, nonempty_only: bool) -> Result<Batch> {
        let mut traces = Vec::with_capacity(k);
        let mut uses = 0u64;
        let mut empty_streak = 0u64;
        while traces.len() < k {
            let t = self.sample_trace(x);
            uses += 1;
            if nonempty_only && t.is_empty() {
                empty_streak += 1;
                if empty_streak > self.cfg.retry_budget {
                    return Err(degenerate(empty_streak));
                }
                continue;
            }
            empty_streak = 0;
            traces.push(t);
        }
        Ok(Batch {
            traces,
            channel_uses: uses,
        })
    }
}

pub(crate) fn degenerate(streak: u64) -> Error {
    Error::ChannelDegenerate(format!(
        "{streak} consecutive empty traces; the channel deletes everything"
    ))
}
