//! Experiment harness behind the `adareg` binary.

pub mod cli;
pub mod curves;
pub mod experiment;
pub mod output;
pub mod verify;

pub use experiment::{
    matched_problem, run_experiment, Experiment, ExperimentResult, ExperimentSpec, SetKind,
};
pub use verify::{verify, Suite, VerifyOptions, VerifyReport};
