//! Decoding RM(m,1) codewords from traces, sample-size planning and the
//! success-rate experiment.

pub mod decoder;
pub mod experiment;
pub mod plan;

pub use decoder::{mean_runs, reconstruct, step1_first_bit, Reconstruction, Reconstructor, MIN_M};
pub use experiment::{
    budget_sweep, run_experiment, run_trial, sweep_budgets, CodewordSelection, ExperimentConfig,
    ExperimentReport, Outcome, SweepLevel, SweepReport, TrialRow,
};
pub use plan::{plan_sample_sizes, plan_with_k, SamplePlan, DEFAULT_DELTA, DEFAULT_PLAN_C};
