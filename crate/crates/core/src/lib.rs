//! Reconstruction of first-order Reed-Muller codewords from deletion-channel
//! traces using only run counts.
//!
//! The formulas are generic over [`Scalar`], so the same code evaluates in
//! `f32`, `f64`, exact rationals, or [`Dyadic`] numbers.

pub mod bitseq;
pub mod channel;
pub mod dyadic;
pub mod error;
pub mod reconstruct;
pub mod rmcode;
pub mod rng;
pub mod runstats;
pub mod scalar;
pub mod verify;

pub use bitseq::{BitSeq, RunCounts};
pub use channel::{apply_mask, Batch, ChannelConfig, DeletionChannel, DeletionMask, TraceStats};
pub use dyadic::{parse_rational, Dyadic};
pub use error::{Error, Result};
pub use reconstruct::{
    plan_sample_sizes, reconstruct, run_experiment, CodewordSelection, ExperimentConfig,
    ExperimentReport, Reconstructor, SamplePlan,
};
pub use rmcode::{encode, RmCodebook};
pub use runstats::{
    an_bn, coefficient_recursion, coefficients, expected_runs, expected_runs_half, pair_sum,
    pair_sums, CoefficientSet, ExpectedRuns, PairSums,
};
pub use scalar::Scalar;
pub use verify::{
    brute_force_expected_runs, check_conditions, check_table1, identity_suite, ConditionOptions,
    ConditionReport, TableReport,
};

/// Arbitrary-precision rational numbers.
pub type Rational = num_rational::BigRational;
pub type ExpectedRunsF64 = ExpectedRuns<f64>;
pub type ExpectedRunsExact = ExpectedRuns<Rational>;
pub type ExpectedRunsDyadic = ExpectedRuns<Dyadic>;
