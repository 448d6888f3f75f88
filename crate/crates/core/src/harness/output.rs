//! CSV documents and run manifests.
//!
//! Every CSV starts with a `# polymix-<kind>-csv v<N>` line followed by the
//! header. Floats use Rust's shortest round-trip formatting, so parsing a
//! value back gives the identical `f64`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::{RegretTrace, ReinforceRun, TraceRow};
use super::study::ScalingStudy;
use super::sweep::SweepResult;
use crate::Result;

pub const REGRET_SCHEMA: &str = "# polymix-regret-csv v1";
pub const REGRET_HEADER: &str = "algorithm,seed,steps,rho_star,reward_sum,regret_per_step,truncated";
pub const TRACE_SCHEMA: &str = "# polymix-trace-csv v1";
pub const TRACE_HEADER: &str = "step,reward,epsilon,rho_hat";
pub const SWEEP_SCHEMA: &str = "# polymix-sweep-csv v1";
pub const SWEEP_HEADER: &str = "config,label,algorithm,seed,regret_per_step";
pub const SWEEP_SUMMARY_SCHEMA: &str = "# polymix-sweep-summary-csv v1";
pub const SWEEP_SUMMARY_HEADER: &str = "config,label,algorithm,n_seeds,mean,std,best,truncated";
pub const SCALE_SCHEMA: &str = "# polymix-scale-csv v1";
pub const SCALE_HEADER: &str =
    "axis,axis_value,quantity,relative_error,n_states,tau,n_tasks,seed,value,normalized";
pub const FIT_SCHEMA: &str = "# polymix-fit-csv v1";
pub const FIT_HEADER: &str = "axis,quantity,relative_error,fit,slope,intercept,r2";
pub const REINFORCE_SCHEMA: &str = "# polymix-reinforce-csv v1";
pub const REINFORCE_HEADER: &str = "seed,steps,train_reward_rate,final_reward_rate";

fn doc(schema: &str, header: &str) -> String {
    format!("{schema}\n{header}\n")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn regret_csv(traces: &[RegretTrace]) -> String {
    let mut out = doc(REGRET_SCHEMA, REGRET_HEADER);
    for t in traces {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.algorithm, t.seed, t.steps, t.rho_star, t.reward_sum, t.regret_per_step, t.truncated
        );
    }
    out
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = doc(TRACE_SCHEMA, TRACE_HEADER);
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.step, r.reward, r.epsilon, opt(r.rho_hat));
    }
    out
}

/// Per-seed rows and the per-configuration summary.
pub fn sweep_csv(result: &SweepResult) -> (String, String) {
    let mut rows = doc(SWEEP_SCHEMA, SWEEP_HEADER);
    let mut summary = doc(SWEEP_SUMMARY_SCHEMA, SWEEP_SUMMARY_HEADER);
    for (i, c) in result.configs.iter().enumerate() {
        for (seed, r) in result.seeds.iter().zip(&c.regrets) {
            let _ = writeln!(rows, "{i},{},{},{seed},{r}", c.label, c.config.algorithm);
        }
        let best = result.best.iter().any(|&(_, b)| b == i);
        let _ = writeln!(
            summary,
            "{i},{},{},{},{},{},{best},{}",
            c.label,
            c.config.algorithm,
            c.regrets.len(),
            c.mean,
            c.std,
            c.truncated
        );
    }
    (rows, summary)
}

/// Per-seed points (seed column filled) plus mean rows (seed empty), and
/// the fits.
pub fn scale_csv(study: &ScalingStudy) -> (String, String) {
    let spec = &study.spec;
    let mut points = doc(SCALE_SCHEMA, SCALE_HEADER);
    for p in &study.points {
        let prefix = format!(
            "{},{},{},{},{},{},{}",
            spec.axis,
            p.axis_value,
            spec.quantity,
            opt(p.relative_error),
            p.n_states,
            opt(p.tau),
            p.n_tasks
        );
        for (seed, v) in spec.seeds.iter().zip(&p.per_seed) {
            let norm = p.tau.map(|t| v / (t * p.n_tasks) as f64);
            let _ = writeln!(points, "{prefix},{seed},{v},{}", opt(norm));
        }
        let _ = writeln!(points, "{prefix},,{},{}", p.value, opt(p.normalized));
    }
    let mut fits = doc(FIT_SCHEMA, FIT_HEADER);
    for f in &study.fits {
        for (name, fit) in [("linear", f.linear), ("loglog_states", f.loglog)] {
            let _ = writeln!(
                fits,
                "{},{},{},{name},{},{},{}",
                spec.axis,
                spec.quantity,
                opt(f.relative_error),
                fit.slope,
                fit.intercept,
                fit.r2
            );
        }
    }
    (points, fits)
}

pub fn reinforce_csv(runs: &[ReinforceRun]) -> String {
    let mut out = doc(REINFORCE_SCHEMA, REINFORCE_HEADER);
    for r in runs {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.seed, r.steps, r.train_reward_rate, r.final_reward_rate
        );
    }
    out
}

/// JSON record written next to every command's outputs.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Effective settings after merging the config file and flags.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub env_id: Option<String>,
    pub rho_star: Option<f64>,
    pub outputs: Vec<String>,
    pub truncated: bool,
    pub wall_time_secs: f64,
}

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            seeds: Vec::new(),
            env_id: None,
            rho_star: None,
            outputs: Vec::new(),
            truncated: false,
            wall_time_secs: 0.0,
        }
    }
}

/// Write `contents` to `dir/name`, creating `dir`.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
