//! Monte Carlo success rate of the decoder over the deletion channel at
//! `q = 1/2`.
//!
//! Trial `t` draws its traces from channel stream `t` and picks its codeword
//! from a separate stream, so every trial is reproducible on its own and the
//! report does not depend on how trials are spread over threads.

use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitseq::BitSeq;
use crate::channel::{degenerate, ChannelConfig, DeletionChannel, DEFAULT_RETRY_BUDGET};
use crate::error::{invalid, Result};
use crate::reconstruct::decoder::Reconstructor;
use crate::reconstruct::plan::SamplePlan;
use crate::rng::stream_rng;

/// Stream reserved for codeword selection.
pub const SELECTION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum CodewordSelection {
    /// Trial `t` uses codeword `t mod 2n`.
    All,
    RandomPerTrial,
    Fixed { codeword: BitSeq },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: u32,
    pub q: String,
    pub ell: u64,
    pub k: u64,
    pub seed: u64,
    pub trials: u64,
    pub selection: CodewordSelection,
    pub retry_budget: u64,
}

impl ExperimentConfig {
    pub fn new(m: u32, plan: SamplePlan, seed: u64, trials: u64) -> Self {
        ExperimentConfig {
            m,
            q: "1/2".to_string(),
            ell: plan.ell,
            k: plan.k,
            seed,
            trials,
            selection: CodewordSelection::RandomPerTrial,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }

    pub fn with_selection(mut self, selection: CodewordSelection) -> Self {
        self.selection = selection;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    /// The first-bit vote was wrong.
    Step1Error,
    /// The vote was right but the nearest codeword was not the input.
    Step2Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub codeword_index: usize,
    pub decoded_index: usize,
    pub first_bit: u8,
    pub decoded_first_bit: u8,
    pub mean_runs: f64,
    pub expected_runs: f64,
    pub abs_dev: f64,
    pub channel_uses: u64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub trials: u64,
    pub successes: u64,
    pub step1_errors: u64,
    pub step2_errors: u64,
    /// Average of `|mean runs - E[R_x]|` over trials.
    pub mean_abs_dev: f64,
    pub channel_uses: u64,
    pub config: ExperimentConfig,
    pub wall_time_ms: u64,
    pub rows: Vec<TrialRow>,
}

impl ExperimentReport {
    /// The same report with the timing zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        ExperimentReport {
            wall_time_ms: 0,
            ..self.clone()
        }
    }
}

fn select(r: &Reconstructor, cfg: &ExperimentConfig, trial: u64) -> Result<usize> {
    let count = r.codebook().len();
    match &cfg.selection {
        CodewordSelection::All => Ok((trial % count as u64) as usize),
        CodewordSelection::RandomPerTrial => {
            let mut rng = stream_rng(cfg.seed, SELECTION_STREAM);
            rng.set_word_pos(trial as u128 * 2);
            Ok((rng.next_u64() % count as u64) as usize)
        }
        CodewordSelection::Fixed { codeword } => r
            .codebook()
            .index_of(codeword)
            .ok_or_else(|| invalid(format!("{codeword} is not a codeword of RM({}, 1)", r.m()))),
    }
}

/// One trial, streaming trace statistics instead of storing traces.
pub fn run_trial(r: &Reconstructor, cfg: &ExperimentConfig, trial: u64) -> Result<TrialRow> {
    let index = select(r, cfg, trial)?;
    let x = r.codebook().get(index);
    let mut channel_cfg = ChannelConfig::new(0.5, cfg.seed, trial)?;
    channel_cfg.retry_budget = cfg.retry_budget;
    let mut ch = DeletionChannel::new(channel_cfg)?;

    let (mut kept, mut uses, mut ones, mut runs, mut streak) = (0u64, 0u64, 0u64, 0u64, 0u64);
    while kept < cfg.k {
        let s = ch.next_stats(x);
        uses += 1;
        if s.len == 0 {
            streak += 1;
            if streak > cfg.retry_budget {
                return Err(degenerate(streak));
            }
            continue;
        }
        streak = 0;
        if kept < cfg.ell {
            ones += u64::from(s.first);
        }
        runs += s.runs as u64;
        kept += 1;
    }

    let decoded_first = 2 * ones > cfg.ell;
    let mean = runs as f64 / cfg.k as f64;
    let decoded = r.nearest(decoded_first, mean);
    let first = x.first().expect("codewords are non-empty");
    let expected = r.expected_runs_f64(index);
    let outcome = if decoded == index {
        Outcome::Success
    } else if decoded_first != first {
        Outcome::Step1Error
    } else {
        Outcome::Step2Error
    };
    Ok(TrialRow {
        trial,
        codeword_index: index,
        decoded_index: decoded,
        first_bit: u8::from(first),
        decoded_first_bit: u8::from(decoded_first),
        mean_runs: mean,
        expected_runs: expected,
        abs_dev: (mean - expected).abs(),
        channel_uses: uses,
        outcome,
    })
}

pub fn run_experiment(r: &Reconstructor, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.m != r.m() {
        return Err(invalid(format!(
            "configuration is for m = {} but the decoder is for m = {}",
            cfg.m,
            r.m()
        )));
    }
    if cfg.ell == 0 || cfg.k < cfg.ell {
        return Err(invalid(format!(
            "need 1 <= ell <= k, got ell = {} and k = {}",
            cfg.ell, cfg.k
        )));
    }
    if cfg.q != "1/2" {
        return Err(invalid(format!("experiments run at q = 1/2, got {}", cfg.q)));
    }
    let start = Instant::now();
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(r, cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let count = |o: Outcome| rows.iter().filter(|r| r.outcome == o).count() as u64;
    let mean_abs_dev = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.abs_dev).sum::<f64>() / rows.len() as f64
    };
    Ok(ExperimentReport {
        trials: cfg.trials,
        successes: count(Outcome::Success),
        step1_errors: count(Outcome::Step1Error),
        step2_errors: count(Outcome::Step2Error),
        mean_abs_dev,
        channel_uses: rows.iter().map(|r| r.channel_uses).sum(),
        config: cfg.clone(),
        wall_time_ms: start.elapsed().as_millis() as u64,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub label: String,
    pub k: u64,
    pub ell: u64,
    pub successes: u64,
    pub step1_errors: u64,
    pub step2_errors: u64,
    pub reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub m: u32,
    pub seed: u64,
    pub trials: u64,
    pub target: u64,
    pub levels: Vec<SweepLevel>,
    /// Smallest budget whose success count reached the target.
    pub min_k: Option<u64>,
    pub min_label: Option<String>,
}

/// The budgets `n ln n`, `n^2 ln n / 100`, `n^2 ln n / 10` and `n^2 ln n`.
pub fn sweep_budgets(n: usize) -> Vec<(String, u64)> {
    let nf = n as f64;
    let base = nf * nf * nf.ln();
    vec![
        ("n ln n".to_string(), nf * nf.ln()),
        ("n^2 ln n / 100".to_string(), base / 100.0),
        ("n^2 ln n / 10".to_string(), base / 10.0),
        ("n^2 ln n".to_string(), base),
    ]
    .into_iter()
    .map(|(label, k)| (label, (k.ceil() as u64).max(1)))
    .collect()
}

fn sweep_level(
    r: &Reconstructor,
    label: String,
    k: u64,
    planned_ell: u64,
    trials: u64,
    seed: u64,
    target: u64,
) -> Result<SweepLevel> {
    let plan = SamplePlan {
        ell: planned_ell.min(k).max(1),
        k,
    };
    let rep = run_experiment(r, &ExperimentConfig::new(r.m(), plan, seed, trials))?;
    Ok(SweepLevel {
        label,
        k: plan.k,
        ell: plan.ell,
        successes: rep.successes,
        step1_errors: rep.step1_errors,
        step2_errors: rep.step2_errors,
        reached: rep.successes >= target,
    })
}

/// Success counts at each budget, with `ell` clamped to `k`.
///
/// If no budget reaches `target` and `extend_to` is set, the largest budget
/// keeps doubling until one does or `extend_to` is exceeded.
pub fn budget_sweep(
    r: &Reconstructor,
    budgets: &[(String, u64)],
    planned_ell: u64,
    trials: u64,
    seed: u64,
    target: u64,
    extend_to: Option<u64>,
) -> Result<SweepReport> {
    let mut levels = Vec::with_capacity(budgets.len());
    for (label, k) in budgets {
        levels.push(sweep_level(r, label.clone(), *k, planned_ell, trials, seed, target)?);
    }
    if let (Some(cap), Some((base_label, base))) = (extend_to, budgets.iter().max_by_key(|b| b.1)) {
        let mut factor = 2u64;
        while !levels.iter().any(|l| l.reached) && base * factor <= cap {
            let label = format!("{factor} x {base_label}");
            levels.push(sweep_level(r, label, base * factor, planned_ell, trials, seed, target)?);
            factor *= 2;
        }
    }
    let best = levels.iter().filter(|l| l.reached).min_by_key(|l| l.k);
    Ok(SweepReport {
        m: r.m(),
        seed,
        trials,
        target,
        min_k: best.map(|l| l.k),
        min_label: best.map(|l| l.label.clone()),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(m: u32, k: u64, ell: u64, trials: u64) -> ExperimentConfig {
        ExperimentConfig::new(m, SamplePlan { ell, k }, 17, trials)
    }

    #[test]
    fn zero_trials() {
        let r = Reconstructor::new(4).unwrap();
        let rep = run_experiment(&r, &small(4, 10, 5, 0)).unwrap();
        assert_eq!((rep.trials, rep.successes, rep.channel_uses), (0, 0, 0));
        assert!(rep.rows.is_empty());
    }

    #[test]
    fn outcomes_are_attributed_once() {
        let r = Reconstructor::new(4).unwrap();
        let rep = run_experiment(&r, &small(4, 50, 7, 64)).unwrap();
        assert_eq!(rep.successes + rep.step1_errors + rep.step2_errors, 64);
        for row in &rep.rows {
            let wrong_bit = row.decoded_first_bit != row.first_bit;
            match row.outcome {
                Outcome::Success => assert_eq!(row.decoded_index, row.codeword_index),
                Outcome::Step1Error => assert!(wrong_bit),
                Outcome::Step2Error => assert!(!wrong_bit && row.decoded_index != row.codeword_index),
            }
            assert!(row.channel_uses >= 50);
        }
    }

    #[test]
    fn streaming_matches_materialized_traces() {
        let r = Reconstructor::new(4).unwrap();
        let cfg = small(4, 300, 31, 6).with_selection(CodewordSelection::All);
        let rep = run_experiment(&r, &cfg).unwrap();
        for row in &rep.rows {
            let x = r.codebook().get(row.codeword_index);
            let mut ch = DeletionChannel::new(ChannelConfig::new(0.5, 17, row.trial).unwrap()).unwrap();
            let batch = ch.sample_batch(x, 300, true).unwrap();
            assert_eq!(batch.channel_uses, row.channel_uses);
            let out = r.reconstruct(&batch.traces, 31).unwrap();
            assert_eq!(out.index, row.decoded_index);
            assert_eq!(out.mean_runs, row.mean_runs);
        }
    }

    #[test]
    fn selection_policies() {
        let r = Reconstructor::new(4).unwrap();
        let cfg = small(4, 5, 1, 40).with_selection(CodewordSelection::All);
        let rep = run_experiment(&r, &cfg).unwrap();
        assert_eq!(rep.rows[33].codeword_index, 1);
        let x: BitSeq = "0011001100110011".parse().unwrap();
        let cfg = small(4, 5, 1, 3).with_selection(CodewordSelection::Fixed { codeword: x.clone() });
        let rep = run_experiment(&r, &cfg).unwrap();
        assert!(rep.rows.iter().all(|row| r.codebook().get(row.codeword_index) == &x));
        let bad = small(4, 5, 1, 3).with_selection(CodewordSelection::Fixed {
            codeword: "0000000000000001".parse().unwrap(),
        });
        assert!(run_experiment(&r, &bad).is_err());
    }

    #[test]
    fn rejects_inconsistent_config() {
        let r = Reconstructor::new(4).unwrap();
        assert!(run_experiment(&r, &small(5, 10, 5, 1)).is_err());
        assert!(run_experiment(&r, &small(4, 3, 5, 1)).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let r = Reconstructor::new(5).unwrap();
        let cfg = small(5, 2000, 100, 12);
        let a = run_experiment(&r, &cfg).unwrap().without_timing();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_experiment(&r, &cfg)).unwrap().without_timing();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_extends_until_target() {
        let r = Reconstructor::new(4).unwrap();
        let budgets = vec![("tiny".to_string(), 4)];
        let s = budget_sweep(&r, &budgets, 1598, 20, 5, 20, Some(4096)).unwrap();
        assert!(s.levels.len() > 1);
        let last = s.levels.last().unwrap();
        assert!(last.reached || last.k * 2 > 4096);
        assert_eq!(s.min_k.is_some(), s.levels.iter().any(|l| l.reached));
        let plain = budget_sweep(&r, &budgets, 1598, 20, 5, 20, None).unwrap();
        assert_eq!(plain.levels.len(), 1);
    }

    #[test]
    fn sweep_budgets_for_16() {
        let b = sweep_budgets(16);
        let ks: Vec<u64> = b.iter().map(|(_, k)| *k).collect();
        assert_eq!(ks, vec![45, 8, 71, 710]);
    }
}
