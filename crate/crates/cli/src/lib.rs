//! Orchestration layer for the PASS sensing simulator: configuration,
//! seeded scenario sampling, run records, and sweep execution. The `pass-sense`
//! binary is a thin wrapper over this library, so integration tests drive
//! the exact code paths the CLI exposes.

// `!(x > 0.0)` guards reject NaN as well; `x <= 0.0` would not
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod record;
pub mod runner;
pub mod sampler;

pub use config::{ExperimentConfig, OutputFormat, ProblemChoice, ProtocolChoice, SamplerBlock};
pub use record::{record_csv_row, RunRecord, RunResult, RECORD_CSV_HEADER};
pub use runner::{
    eval_bcrb, gh_selftest, optimize_single, run, run_baseline, summarize, sweep, BaselineMethod,
    SweepParam,
};
