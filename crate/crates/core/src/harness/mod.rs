//! Experiment orchestration: lifelong-regret runs, grid searches, scaling
//! studies, output files and the command-line front end.

pub mod cli;
pub mod output;
mod run;
mod study;
mod sweep;

pub use cli::{dispatch, run_cli, Cli, Command, Settings, OUT_DIR_ENV};
pub use output::{write_output, Manifest};
pub use run::{
    run_lifelong, run_lifelong_with, run_reinforce, RegretTrace, ReinforceRun, RunOptions, TraceRow,
};
pub use study::{
    linear_fit, loglog_fit, mixing_scaling_study, Axis, Fit, Quantity, ScalingStudy, StudyFit,
    StudyPoint, StudyPolicy, StudySpec,
};
pub use sweep::{describe, mean_std, replicate_seed, sweep, ConfigResult, SweepGrid, SweepResult};
