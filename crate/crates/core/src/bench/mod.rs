//! Experiment harness: run configuration, replicated runs, grid search,
//! CSV output and the `gradagrad-bench` command line.

pub mod cli;
mod config;
mod grid;
mod runner;
pub mod schema;

pub use config::{
    parse_config_file, Budget, DomainSpec, ProblemSpec, RunConfig, DEFAULT_EVAL_EVERY,
};
pub use grid::{grid, powers_of_two, GridParam, GridPoint, GridResult, GridSpec, SELECTION_WINDOW};
pub use runner::{
    replicate_seed, run, run_on, run_replicate, summary_text, trace_path, write_outputs, EvalRow,
    RunOutput, RunRecord, RunSummary,
};
