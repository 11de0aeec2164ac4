mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use rmtrace::reconstruct::{
    budget_sweep, plan_sample_sizes, run_experiment, run_trial, sweep_budgets, CodewordSelection,
    ExperimentConfig, Reconstructor, SamplePlan, DEFAULT_DELTA, DEFAULT_PLAN_C,
};
use rmtrace::rmcode::DEFAULT_MAX_M;
use rmtrace::verify::{check_conditions, check_table1, ConditionOptions, ScanMode};
use rmtrace::{
    coefficients, encode, expected_runs, parse_rational, BitSeq, ChannelConfig, DeletionChannel,
    Dyadic, Error, RmCodebook,
};

use report::{render_report, write_csv, Format, Report, ReportEnvelope};

#[derive(Parser)]
#[command(name = "rmtrace", version, about = "Trace reconstruction of first-order Reed-Muller codewords from run counts")]
struct Cli {
    /// Worker threads for parallel scans and experiments (default: all cores)
    #[arg(long, global = true, env = "RMTRACE_THREADS")]
    threads: Option<usize>,

    /// Output format for reports
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the codewords of RM(m,1) in canonical order, one per line
    Codewords {
        #[arg(long)]
        m: u32,
        /// Only codewords starting with this bit
        #[arg(long, value_parser = ["0", "1"])]
        first_bit: Option<String>,
        /// Largest m allowed
        #[arg(long, default_value_t = DEFAULT_MAX_M)]
        max_m: u32,
    },
    /// Evaluate u0 + u1 x1 + ... + um xm over all points
    Encode {
        #[arg(long)]
        m: u32,
        #[arg(long, value_parser = ["0", "1"])]
        u0: String,
        /// Linear coefficients u1..um as a bit string
        #[arg(long)]
        u: String,
    },
    /// Pass a sequence through the deletion channel and print the traces
    Trace {
        #[arg(long)]
        x: BitSeq,
        /// Deletion probability, as p/q or a decimal
        #[arg(long)]
        q: String,
        /// Number of traces
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Print each deletion mask (1 = deleted) before its trace
        #[arg(long)]
        mask: bool,
        /// Discard empty traces and keep drawing until k are collected
        #[arg(long)]
        nonempty: bool,
    },
    /// Count the runs of a sequence
    Runs {
        #[arg(long)]
        x: BitSeq,
    },
    /// Exact expected run counts of a trace
    ExpectedRuns {
        #[arg(long)]
        x: BitSeq,
        /// Deletion probability in (0, 1), as p/q or a decimal
        #[arg(long, default_value = "1/2")]
        q: String,
    },
    /// The coefficients alpha, beta, gamma, delta of a sequence
    Coeffs {
        #[arg(long)]
        x: BitSeq,
    },
    /// Scan RM(m,1) for the pairwise separation conditions
    VerifyLemma {
        #[arg(long)]
        m: u32,
        /// Scan every pair (default for m <= 6)
        #[arg(long, conflicts_with = "sample")]
        full: bool,
        /// Scan this many random pairs per half (default 100000 for m > 6)
        #[arg(long)]
        sample: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        /// Largest m allowed
        #[arg(long, default_value_t = rmtrace::verify::conditions::DEFAULT_MAX_M)]
        max_m: u32,
    },
    /// Recompute the coefficient table of the first-bit-0 half of RM(4,1)
    CheckTable1,
    /// Decode a codeword from traces
    Reconstruct {
        #[arg(long)]
        m: u32,
        /// File with one trace per line; blank lines are skipped
        #[arg(long, conflicts_with = "x", required_unless_present = "x")]
        traces: Option<PathBuf>,
        /// Codeword to transmit at q = 1/2 instead of reading traces
        #[arg(long)]
        x: Option<BitSeq>,
        /// Traces to draw with --x (default: planned size)
        #[arg(long)]
        k: Option<u64>,
        /// Traces used by the first-bit vote (default: planned size, at most k)
        #[arg(long)]
        ell: Option<u64>,
        /// Target exponent of the sample-size planner
        #[arg(long, default_value_t = DEFAULT_PLAN_C)]
        plan_c: f64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Success rate of reconstruction over repeated trials at q = 1/2
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Random seed (generated and reported when omitted)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selection {
    All,
    Random,
    Fixed,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Traces per trial (default: planned size)
    #[arg(long)]
    k: Option<u64>,
    /// Traces used by the first-bit vote (default: planned size, at most k)
    #[arg(long)]
    ell: Option<u64>,
    /// Target exponent of the sample-size planner
    #[arg(long, default_value_t = DEFAULT_PLAN_C)]
    plan_c: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// How each trial picks its codeword
    #[arg(long, value_enum, default_value_t = Selection::Random)]
    selection: Selection,
    /// Codeword for --selection fixed
    #[arg(long, required_if_eq("selection", "fixed"))]
    x: Option<BitSeq>,
    /// Also record success counts over a grid of smaller budgets
    #[arg(long)]
    sweep: bool,
    /// Write the JSON report here as well
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-trial rows as CSV here
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Verification(Box<Report>),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidFormat(_)
            | Error::Unsupported(_)
            | Error::ResourceLimit(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

enum Output {
    Lines(Vec<String>),
    Report(Report),
}

fn seed_or_fresh(arg: &SeedArg) -> u64 {
    arg.seed.unwrap_or_else(|| {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        let seed = now ^ (u64::from(std::process::id()) << 32);
        eprintln!("seed: {seed}");
        seed
    })
}

fn probability(text: &str) -> Result<BigRational, Failure> {
    let q = parse_rational(text)?;
    if q < BigRational::from_integer(0.into()) || q > BigRational::from_integer(1.into()) {
        return Err(Failure::Usage(format!("probability must lie in [0, 1], got {text}")));
    }
    Ok(q)
}

fn to_f64(q: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

fn bit(text: &str) -> bool {
    text == "1"
}

fn envelope(argv: &[String], seeds: Vec<u64>, payload: Value, rows: Option<Vec<Value>>) -> Report {
    Report {
        envelope: ReportEnvelope::new(argv.to_vec(), seeds, payload),
        rows,
    }
}

fn value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("values serialize")
}

fn planned(m: u32, plan_c: f64, k: Option<u64>, ell: Option<u64>) -> Result<SamplePlan, Failure> {
    let n = 1usize << m;
    let plan = plan_sample_sizes(n, plan_c, DEFAULT_DELTA)?;
    let k = k.unwrap_or(plan.k);
    let ell = ell.unwrap_or(plan.ell.min(k));
    if k == 0 || ell == 0 || ell > k {
        return Err(Failure::Usage(format!("need 1 <= ell <= k, got ell = {ell}, k = {k}")));
    }
    Ok(SamplePlan { ell, k })
}

fn run(cli: &Cli, argv: &[String]) -> Result<Output, Failure> {
    match &cli.command {
        Command::Codewords { m, first_bit, max_m } => {
            let book = RmCodebook::with_limit(*m, *max_m)?;
            let words = match first_bit {
                Some(b) => book.with_first_bit(bit(b)),
                None => book.codewords(),
            };
            Ok(Output::Lines(words.iter().map(ToString::to_string).collect()))
        }
        Command::Encode { m, u0, u } => {
            let coeffs: BitSeq = u.parse()?;
            let word = encode(*m, bit(u0), &coeffs.iter().collect::<Vec<_>>())?;
            Ok(Output::Lines(vec![word.to_string()]))
        }
        Command::Trace {
            x,
            q,
            k,
            seed,
            mask,
            nonempty,
        } => {
            let q = probability(q)?;
            let seed = seed_or_fresh(seed);
            let mut ch = DeletionChannel::new(ChannelConfig::new(to_f64(&q), seed, 0)?)?;
            let mut lines = Vec::with_capacity(*k);
            let mut uses = 0u64;
            let mut streak = 0u64;
            while lines.len() < *k {
                let (t, w) = ch.sample_with_mask(x);
                uses += 1;
                if *nonempty && t.is_empty() {
                    streak += 1;
                    if streak > ch.config().retry_budget {
                        return Err(Failure::Runtime(format!(
                            "{streak} consecutive empty traces; the channel deletes everything"
                        )));
                    }
                    continue;
                }
                streak = 0;
                lines.push(if *mask { format!("{} {t}", w.bits()) } else { t.to_string() });
            }
            if *nonempty {
                eprintln!("channel uses: {uses}");
            }
            Ok(Output::Lines(lines))
        }
        Command::Runs { x } => {
            let r = x.count_runs();
            let payload = json!({"x": x, "zeros": r.zeros, "ones": r.ones, "total": r.total()});
            Ok(Output::Report(envelope(argv, vec![], payload, None)))
        }
        Command::ExpectedRuns { x, q } => {
            let q = probability(q)?;
            let payload = match Dyadic::from_rational(&q) {
                Some(d) => {
                    let r = expected_runs(x, d)?;
                    json!({"x": x, "q": r.q, "zeros": r.zeros, "ones": r.ones, "total": r.total,
                           "total_approx": r.total.to_f64()})
                }
                None => {
                    let r = expected_runs(x, q)?;
                    json!({"x": x, "q": r.q.to_string(), "zeros": r.zeros.to_string(),
                           "ones": r.ones.to_string(), "total": r.total.to_string(),
                           "total_approx": to_f64(&r.total)})
                }
            };
            Ok(Output::Report(envelope(argv, vec![], payload, None)))
        }
        Command::Coeffs { x } => {
            let c = coefficients(x);
            let payload = json!({"x": x, "n": c.n, "alpha": c.alpha, "beta": c.beta,
                                 "gamma": c.gamma, "delta": c.delta});
            Ok(Output::Report(envelope(argv, vec![], payload, None)))
        }
        Command::VerifyLemma {
            m,
            full,
            sample,
            seed,
            max_m,
        } => {
            let (scan, seeds) = match (full, sample) {
                (true, _) => (Some(ScanMode::Full), vec![]),
                (false, Some(pairs)) => {
                    let seed = seed_or_fresh(seed);
                    (Some(ScanMode::Sampled { pairs: *pairs, seed }), vec![seed])
                }
                (false, None) => match ScanMode::default_for(*m) {
                    ScanMode::Full => (Some(ScanMode::Full), vec![]),
                    ScanMode::Sampled { pairs, .. } => {
                        let seed = seed_or_fresh(seed);
                        (Some(ScanMode::Sampled { pairs, seed }), vec![seed])
                    }
                },
            };
            let r = check_conditions(*m, &ConditionOptions { scan, max_m: *max_m })?;
            let rows = r
                .conditions
                .iter()
                .map(|c| {
                    json!({"condition": c.condition, "margin": c.margin, "margin_approx": c.margin_approx,
                           "bound": c.bound, "passed": c.passed, "x": c.witness.x, "y": c.witness.y})
                })
                .collect();
            let mut payload = value(&r);
            payload["verdict"] = json!(r.verdict());
            let report = envelope(argv, seeds, payload, Some(rows));
            if r.passed() {
                Ok(Output::Report(report))
            } else {
                Err(Failure::Verification(Box::new(report)))
            }
        }
        Command::CheckTable1 => {
            let r = check_table1();
            let rows = r.diffs.iter().map(value).collect();
            let mut payload = value(&r);
            payload["result"] = json!(r.summary());
            let report = envelope(argv, vec![], payload, Some(rows));
            if r.passed() {
                Ok(Output::Report(report))
            } else {
                Err(Failure::Verification(Box::new(report)))
            }
        }
        Command::Reconstruct {
            m,
            traces,
            x,
            k,
            ell,
            plan_c,
            seed,
        } => {
            let r = Reconstructor::new(*m)?;
            if let Some(path) = traces {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                let traces = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<BitSeq>, _>>()?;
                let count = traces.len() as u64;
                let plan = planned(*m, *plan_c, Some(count.max(1)), *ell)?;
                let out = r.reconstruct(&traces, plan.ell as usize)?;
                let payload = json!({"m": m, "k": count, "ell": plan.ell, "first_bit": u8::from(out.first_bit),
                                     "mean_runs": out.mean_runs, "decoded_index": out.index,
                                     "decoded": out.codeword});
                return Ok(Output::Report(envelope(argv, vec![], payload, None)));
            }
            let x = x.clone().expect("clap requires --x without --traces");
            let plan = planned(*m, *plan_c, *k, *ell)?;
            let seed = seed_or_fresh(seed);
            let cfg = ExperimentConfig::new(*m, plan, seed, 1)
                .with_selection(CodewordSelection::Fixed { codeword: x.clone() });
            let row = run_trial(&r, &cfg, 0)?;
            let payload = json!({"m": m, "k": plan.k, "ell": plan.ell, "input": x,
                                 "first_bit": row.decoded_first_bit, "mean_runs": row.mean_runs,
                                 "expected_runs": row.expected_runs, "decoded_index": row.decoded_index,
                                 "decoded": r.codebook().get(row.decoded_index),
                                 "correct": row.decoded_index == row.codeword_index,
                                 "channel_uses": row.channel_uses});
            Ok(Output::Report(envelope(argv, vec![seed], payload, None)))
        }
        Command::Experiment(a) => experiment(a, argv),
    }
}

fn experiment(a: &ExperimentArgs, argv: &[String]) -> Result<Output, Failure> {
    let r = Reconstructor::new(a.m)?;
    let plan = planned(a.m, a.plan_c, a.k, a.ell)?;
    let seed = seed_or_fresh(&a.seed);
    let selection = match a.selection {
        Selection::All => CodewordSelection::All,
        Selection::Random => CodewordSelection::RandomPerTrial,
        Selection::Fixed => CodewordSelection::Fixed {
            codeword: a.x.clone().expect("clap requires --x for fixed selection"),
        },
    };
    let cfg = ExperimentConfig::new(a.m, plan, seed, a.trials).with_selection(selection);
    let rep = run_experiment(&r, &cfg)?;
    let rows: Vec<Value> = rep.rows.iter().map(value).collect();
    eprintln!("wall time: {} ms", rep.wall_time_ms);
    let mut payload = value(&rep.without_timing());
    if a.sweep {
        let full = plan_sample_sizes(r.n(), a.plan_c, DEFAULT_DELTA)?;
        let sweep = budget_sweep(&r, &sweep_budgets(r.n()), full.ell, a.trials, seed, a.trials * 95 / 100, Some(full.k))?;
        payload["sweep"] = value(&sweep);
    }
    let report = envelope(argv, vec![seed], payload, Some(rows.clone()));
    if let Some(path) = &a.out {
        let bytes = render_report(&report, Format::Json).expect("json always renders");
        std::fs::write(path, bytes)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &a.csv {
        let file = std::fs::File::create(path)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
        write_csv(&rows, file).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(Output::Report(report))
}

fn emit(report: &Report, format: Format) -> ExitCode {
    match render_report(report, format) {
        Ok(bytes) => {
            use std::io::Write;
            let _ = std::io::stdout().write_all(&bytes);
            ExitCode::SUCCESS
        }
        Err(_) => {
            eprintln!("error: --format csv needs a tabular report");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli, &argv[1..]) {
        Ok(Output::Lines(lines)) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Ok(Output::Report(report)) => emit(&report, cli.format),
        Err(Failure::Verification(report)) => {
            let code = emit(&report, cli.format);
            if code == ExitCode::SUCCESS {
                ExitCode::from(1)
            } else {
                code
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
