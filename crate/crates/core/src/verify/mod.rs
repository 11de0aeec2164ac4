//! Independent checks of the run-count formulas and the coefficient claims.

pub mod conditions;
pub mod identities;
pub mod oracle;
pub mod table;

pub use conditions::{
    check_conditions, condition_tail, tail_after, tail_sum, Condition, ConditionOptions,
    ConditionReport, ConditionResult, ScanMode, ThresholdCheck, Witness,
};
pub use identities::{identity_suite, identity_suite_random, random_sequence, IdentityReport};
pub use oracle::{brute_force_expected_runs, ORACLE_MAX_LEN};
pub use table::{check_table1, TableReport, TABLE1};
