//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::RngCore;
use serde::Serialize;

use rmtrace::reconstruct::{
    budget_sweep, plan_sample_sizes, run_experiment, sweep_budgets, ExperimentConfig,
    ExperimentReport, Outcome, Reconstructor, SweepReport, DEFAULT_DELTA,
};
use rmtrace::rng::stream_rng;
use rmtrace::verify::{
    brute_force_expected_runs, check_conditions, check_table1, identity_suite, random_sequence,
    Condition, ConditionOptions, ScanMode,
};
use rmtrace::{
    an_bn, coefficients, expected_runs, expected_runs_half, BitSeq, ChannelConfig,
    DeletionChannel, Dyadic,
};

const SEED: u64 = 20_240_611;

struct Verdict {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn table() -> Verdict {
    let r = check_table1();
    for diff in &r.diffs {
        println!(
            "    mismatch {} {}: expected {}, got {}",
            diff.codeword, diff.coefficient, diff.expected, diff.actual
        );
    }
    outcome(r.passed(), r.summary())
}

fn base_margins() -> Verdict {
    let r = check_conditions(
        4,
        &ConditionOptions {
            scan: Some(ScanMode::Full),
            ..Default::default()
        },
    )
    .unwrap();
    let c1 = &r.condition(Condition::C1).margin;
    let c2 = &r.condition(Condition::C2).margin;
    let c3 = &r.condition(Condition::C3).margin;
    let c4 = &r.condition(Condition::C4).margin;
    let ok = *c1 == d("2025/32768")
        && *c3 == d("2003/32768")
        && *c4 == d("2003/32768")
        && *c2 >= Dyadic::from_integer(0);
    outcome(
        ok,
        format!("min|da| = {c1}, min(|da|-|bx-gy|) = {c3}, min|bx-gx| = {c4}, min(|da|-|db|) = {c2}"),
    )
}

fn oracle_equivalence() -> Verdict {
    let qs = [ratio(1, 4), ratio(1, 2), ratio(3, 4)];
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for n in 0..=8usize {
        for bits in 0..(1u64 << n) {
            let x = BitSeq::from_words(vec![bits], n);
            for q in &qs {
                let formula = expected_runs(&x, q.clone()).unwrap();
                let oracle = brute_force_expected_runs(&x, q.clone()).unwrap();
                checked += 1;
                if formula != oracle {
                    failures.push(format!("{x} at q = {q}"));
                }
            }
        }
    }
    let mut rng = stream_rng(SEED, 3);
    for _ in 0..200 {
        let x = random_sequence(&mut rng, 16);
        let formula = expected_runs(&x, ratio(1, 2)).unwrap();
        let oracle = brute_force_expected_runs(&x, ratio(1, 2)).unwrap();
        checked += 1;
        if formula != oracle {
            failures.push(format!("{x} at q = 1/2"));
        }
    }
    for f in failures.iter().take(10) {
        println!("    mismatch {f}");
    }
    outcome(
        failures.is_empty(),
        format!("{} of {checked} exact matches", checked - failures.len()),
    )
}

fn recursion() -> Verdict {
    let mut rng = stream_rng(SEED, 4);
    let mut checked = 0usize;
    let mut failures = 0usize;
    for e in 1..=9 {
        let n = 1usize << e;
        for _ in 0..500 {
            let x = random_sequence(&mut rng, n);
            let (hat, check) = coefficients(&x).recurse();
            checked += 1;
            if hat != coefficients(&x.hat()) || check != coefficients(&x.check()) {
                failures += 1;
                if failures <= 5 {
                    println!("    mismatch for {x}");
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!("{} of {checked} sequences, lengths 2..512", checked - failures),
    )
}

fn conditions_small_m() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 4..=6 {
        let r = check_conditions(
            m,
            &ConditionOptions {
                scan: Some(ScanMode::Full),
                ..Default::default()
            },
        )
        .unwrap();
        let gap_ok = r.min_run_gap.to_rational() >= ratio(28, 1000);
        let alpha_ok = r.condition(Condition::C1).margin.to_rational() >= ratio(57, 1000);
        let strong = r.min_run_gap.to_rational() >= ratio(57, 2000);
        ok &= r.passed() && gap_ok && alpha_ok;
        for c in &r.conditions {
            println!(
                "    m={m} {:?}: margin {} (~{:.6}) vs bound {} -> {}",
                c.condition,
                c.margin,
                c.margin_approx,
                c.bound,
                if c.passed { "ok" } else { "FAIL" }
            );
        }
        println!(
            "    m={m} min|E[Rx]-E[Ry]| = {} (~{:.6}); >= 0.028: {gap_ok}; >= 0.0285: {strong}; min|da| >= 0.057: {alpha_ok}",
            r.min_run_gap,
            r.min_run_gap.to_f64()
        );
        parts.push(format!("m={m} {}", r.verdict()));
    }
    outcome(ok, parts.join(", "))
}

fn identities() -> Verdict {
    let mut rng = stream_rng(SEED, 6);
    let mut failures = 0usize;
    for _ in 0..1000 {
        let n = 1 + (rng.next_u64() % 256) as usize;
        let x = random_sequence(&mut rng, n);
        let y = random_sequence(&mut rng, n);
        let r = identity_suite(&x, &y).unwrap();
        let (a, b) = an_bn(n).unwrap();
        let (cx, cy) = (coefficients(&x), coefficients(&y));
        let sums = &cx.alpha + &cx.delta == a && &cy.beta + &cy.gamma == b;
        if !r.passed() || !sums {
            failures += 1;
            println!("    n={n}: {:?}", r.failures());
        }
    }
    outcome(failures == 0, format!("{} of 1000 pairs", 1000 - failures))
}

#[derive(Serialize)]
struct ChannelStats {
    input: BitSeq,
    traces: u64,
    mean_len: f64,
    len_se: f64,
    mean_runs: f64,
    runs_se: f64,
    expected_runs: f64,
}

fn channel_stats() -> ChannelStats {
    let mut rng = stream_rng(SEED, 7);
    let x = random_sequence(&mut rng, 64);
    let mut ch = DeletionChannel::new(ChannelConfig::new(0.5, SEED, 7).unwrap()).unwrap();
    let traces = 100_000u64;
    let batch = ch.sample_batch(&x, traces as usize, false).unwrap();
    let (mut len_sum, mut runs_sum, mut runs_sq) = (0f64, 0f64, 0f64);
    for t in &batch.traces {
        len_sum += t.len() as f64;
        let r = t.count_runs().total() as f64;
        runs_sum += r;
        runs_sq += r * r;
    }
    let k = traces as f64;
    let mean_runs = runs_sum / k;
    let var = (runs_sq / k - mean_runs * mean_runs) * k / (k - 1.0);
    ChannelStats {
        expected_runs: expected_runs_half(&x).total.to_f64(),
        input: x,
        traces,
        mean_len: len_sum / k,
        len_se: 4.0 / k.sqrt(),
        mean_runs,
        runs_se: (var / k).sqrt(),
    }
}

fn channel_check(s: &ChannelStats) -> Verdict {
    let len_z = (s.mean_len - 32.0) / s.len_se;
    let runs_z = (s.mean_runs - s.expected_runs) / s.runs_se;
    outcome(
        len_z.abs() < 5.0 && runs_z.abs() < 5.0,
        format!(
            "mean length {:.4} (z = {len_z:.2}), mean runs {:.4} vs {:.4} (z = {runs_z:.2})",
            s.mean_len, s.mean_runs, s.expected_runs
        ),
    )
}

struct EndToEnd {
    reports: Vec<ExperimentReport>,
    sweeps: Vec<SweepReport>,
}

fn end_to_end() -> EndToEnd {
    let mut reports = Vec::new();
    let mut sweeps = Vec::new();
    for m in 4..=6u32 {
        let n = 1usize << m;
        let r = Reconstructor::new(m).unwrap();
        let plan = plan_sample_sizes(n, 2.0, DEFAULT_DELTA).unwrap();
        let cfg = ExperimentConfig::new(m, plan, SEED + m as u64, 100);
        reports.push(run_experiment(&r, &cfg).unwrap());
        sweeps.push(
            budget_sweep(&r, &sweep_budgets(n), plan.ell, 100, SEED + m as u64, 95, Some(plan.k))
                .unwrap(),
        );
    }
    EndToEnd { reports, sweeps }
}

fn end_to_end_check(e: &EndToEnd) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (rep, sweep) in e.reports.iter().zip(&e.sweeps) {
        let m = rep.config.m;
        ok &= rep.successes >= 99;
        println!(
            "    m={m}: ell={} k={} successes {}/{} (step 1 errors {}, step 2 errors {}), mean |Rbar-E[R]| {:.3e}, {} ms",
            rep.config.ell,
            rep.config.k,
            rep.successes,
            rep.trials,
            rep.step1_errors,
            rep.step2_errors,
            rep.mean_abs_dev,
            rep.wall_time_ms
        );
        for row in rep.rows.iter().filter(|r| r.outcome != Outcome::Success) {
            println!(
                "      trial {} codeword {} decoded {} ({:?})",
                row.trial, row.codeword_index, row.decoded_index, row.outcome
            );
        }
        for l in &sweep.levels {
            println!(
                "      budget {:<22} k={:<9} ell={:<5} successes {}/{} (step 1 {}, step 2 {})",
                l.label, l.k, l.ell, l.successes, sweep.trials, l.step1_errors, l.step2_errors
            );
        }
        match (&sweep.min_k, &sweep.min_label) {
            (Some(k), Some(label)) => {
                println!("      smallest budget with >= 95/100: k = {k} ({label})")
            }
            _ => println!("      no swept budget reached 95/100"),
        }
        parts.push(format!("m={m} {}/100", rep.successes));
    }
    outcome(ok, parts.join(", "))
}

fn serialize_all(stats: &ChannelStats, e: &EndToEnd) -> String {
    let reports: Vec<ExperimentReport> = e.reports.iter().map(|r| r.without_timing()).collect();
    serde_json::to_string(&(stats, reports, &e.sweeps)).unwrap()
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id} ({name}): {} [{secs:.1}s]", o.detail);
        if !o.passed {
            failed += 1;
        }
    };

    report(1, "coefficient table", &mut table);
    report(2, "base-case margins", &mut base_margins);
    report(3, "oracle equivalence", &mut oracle_equivalence);
    report(4, "doubling recursion", &mut recursion);
    report(5, "separation conditions", &mut conditions_small_m);
    report(6, "coefficient identities", &mut identities);

    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();

    let mut first = None;
    report(7, "channel statistics", &mut || {
        let s = one.install(channel_stats);
        let o = channel_check(&s);
        first = Some(s);
        o
    });
    let stats = first.expect("criterion 7 ran");

    let mut e2e = None;
    report(8, "end-to-end reconstruction", &mut || {
        let e = one.install(end_to_end);
        let o = end_to_end_check(&e);
        e2e = Some(e);
        o
    });
    let e2e = e2e.expect("criterion 8 ran");

    report(9, "determinism", &mut || {
        let again = many.install(|| (channel_stats(), end_to_end()));
        let a = serialize_all(&stats, &e2e);
        let b = serialize_all(&again.0, &again.1);
        outcome(
            a == b,
            format!("1-thread and 4-thread reruns {} ({} bytes)", if a == b { "identical" } else { "differ" }, a.len()),
        )
    });

    if let Some(dir) = option_env!("CARGO_TARGET_TMPDIR") {
        let path = std::path::Path::new(dir).join("acceptance-experiments.json");
        let json = serde_json::to_string_pretty(&(&stats, &e2e.reports, &e2e.sweeps)).unwrap();
        if std::fs::write(&path, json).is_ok() {
            println!("experiment reports written to {}", path.display());
        }
    }

    if failed == 0 {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
