//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE` (TOML whose keys are the long
//! flag names in snake_case) and `--out DIR`; flags given on the command
//! line override the file. Without `--out` the directory comes from
//! `POLYMIX_OUT_DIR`, falling back to `polymix-out`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::*;
use super::run::{run_lifelong_with, run_reinforce, RunOptions};
use super::study::{mixing_scaling_study, Axis, Quantity, StudyPolicy, StudySpec};
use super::sweep::{replicate_seed, sweep, SweepGrid};
use crate::agents::{AgentConfig, Algorithm};
use crate::chain::{
    bottleneck_ratio, cesaro_mixing_time, exact_mixing_time, min_diameter, policy_diameter,
    residence_time_simulated, return_mixing_time_empirical, return_mixing_time_exact, spectral_gap, to_csv, CsvRow, EpsilonGrid,
    ToCsvRows, SPECTRAL_LIMIT,
};
use crate::envs::{build, make_task_grid, EnvInstance, EnvParams, Family, RoomKind, TabularSim};
use crate::mdp::{
    induce_chain, read_mdp_file, steady_state, write_mdp, MdpLayout, PolicyTable, TabularMdp,
};
use crate::{invalid, Result};

pub const OUT_DIR_ENV: &str = "POLYMIX_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "polymix-out";

#[derive(Debug, Parser)]
#[command(name = "polymix", version, about = "Average-reward RL and mixing-time experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact chain quantities of an MDP file or generated environment.
    Analyze(Settings),
    /// Empirical return mixing time from simulated rollouts.
    Mix(Settings),
    /// Lifelong regret of one agent configuration over several seeds.
    Regret(Settings),
    /// Hyperparameter grid search.
    Sweep(Settings),
    /// Mixing or diameter scaling study along one parameter axis.
    Scale(Settings),
    /// Write a generated environment in the MDP text format.
    Gen(Settings),
}

impl Command {
    fn parts(self) -> (&'static str, Settings) {
        match self {
            Command::Analyze(s) => ("analyze", s),
            Command::Mix(s) => ("mix", s),
            Command::Regret(s) => ("regret", s),
            Command::Sweep(s) => ("sweep", s),
            Command::Scale(s) => ("scale", s),
            Command::Gen(s) => ("gen", s),
        }
    }
}

/// All settings. Unset values fall back to the config file, then to the
/// subcommand's default.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// TOML file with default settings.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of replicate seeds.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    /// Wall-time limit per run, in seconds.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_secs: Option<f64>,

    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    /// Read the MDP from a file instead of generating one.
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mdp_file: Option<PathBuf>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Number of rooms.
    #[arg(long = "N", help_heading = "Environment")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n_rooms: Option<usize>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<RoomKind>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_tasks: Option<usize>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    /// Construction seed (defaults to the master seed).
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_seed: Option<u64>,
    /// Use this optimal reward rate instead of solving for it.
    #[arg(long, help_heading = "Environment")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_star: Option<f64>,

    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planning_steps: Option<usize>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_step: Option<usize>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discount: Option<f64>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_init: Option<f64>,
    #[arg(long, help_heading = "Agent", num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update_model_always: Option<bool>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_prior: Option<f64>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_smoothing: Option<f64>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_coef: Option<f64>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_clip: Option<f64>,
    #[arg(long, help_heading = "Agent")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episode_len: Option<usize>,
    /// Write a per-step trace CSV for every seed (regret).
    #[arg(long, help_heading = "Agent", num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<bool>,

    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithms: Option<Vec<Algorithm>>,
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discount_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planning_steps_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_step_grid: Option<Vec<usize>>,

    /// Tolerances relative to ρ(π) (mix, analyze, scale).
    #[arg(long, value_delimiter = ',', help_heading = "Mixing")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_errors: Option<Vec<f64>>,
    /// Total-variation threshold for t_mix and t_ces (analyze).
    #[arg(long, help_heading = "Mixing")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long, help_heading = "Mixing")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<StudyPolicy>,
    /// Reservoir size of tracked start points (mix).
    #[arg(long, help_heading = "Mixing")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tracked: Option<usize>,
    /// Rollout length (mix) or t_ret horizon cap (analyze, scale).
    #[arg(long, help_heading = "Mixing")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Simulated steps for residence times (analyze; 0 skips).
    #[arg(long, help_heading = "Mixing")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate_steps: Option<usize>,

    #[arg(long, help_heading = "Scaling")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[arg(long, value_delimiter = ',', help_heading = "Scaling")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[arg(long, help_heading = "Scaling")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<Quantity>,
    /// t_ret horizon cap as a multiple of τ·|Z|.
    #[arg(long, help_heading = "Scaling")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_factor: Option<usize>,
}

impl Settings {
    /// Overlay these (command-line) settings on the config file, if any.
    pub fn merged(self) -> Result<Settings> {
        let mut table = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| invalid(format!("config {}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        let flags = toml::Table::try_from(&self).map_err(|e| invalid(e.to_string()))?;
        table.extend(flags);
        let mut merged: Settings = table
            .try_into()
            .map_err(|e: toml::de::Error| invalid(format!("config: {e}")))?;
        merged.config = self.config;
        Ok(merged)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn budget(&self) -> Result<Option<Duration>> {
        self.budget_secs
            .map(|s| {
                Duration::try_from_secs_f64(s).map_err(|_| invalid(format!("bad budget_secs {s}")))
            })
            .transpose()
    }

    fn env_params(&self) -> EnvParams {
        let d = EnvParams::default();
        EnvParams {
            d: self.d,
            n_rooms: self.n_rooms,
            kind: self.kind,
            c: self.c,
            x: self.x,
            tau: self.tau,
            n_tasks: self.n_tasks,
            dim: self.dim,
            smoothing: self.smoothing.unwrap_or(d.smoothing),
        }
    }

    fn family(&self) -> Result<Family> {
        self.family.ok_or_else(|| invalid("--family is required"))
    }

    fn env(&self) -> Result<EnvInstance> {
        let env = build(
            self.family()?,
            &self.env_params(),
            self.env_seed.unwrap_or(self.master_seed()),
        )?;
        Ok(match self.rho_star {
            Some(r) => {
                let pi = PolicyTable::uniform(env.n_states(), env.n_actions());
                env.with_rho_star(r, pi)
            }
            None => env,
        })
    }

    fn agent(&self) -> AgentConfig {
        let mut c = AgentConfig::new(self.algorithm.unwrap_or(Algorithm::RhoOffPolicy));
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(
            epsilon,
            learning_rate,
            batch,
            planning_steps,
            n_step,
            discount,
            q_init,
            update_model_always,
            reward_prior,
            model_smoothing,
            entropy_coef,
            grad_clip,
            episode_len
        );
        c
    }

    fn steps(&self) -> Result<usize> {
        match self.steps {
            Some(0) => Err(invalid("steps must be positive")),
            Some(s) => Ok(s),
            None => Ok(100_000),
        }
    }

    fn n_seeds(&self) -> Result<usize> {
        match self.seeds {
            Some(0) => Err(invalid("seeds must be positive")),
            Some(n) => Ok(n),
            None => Ok(10),
        }
    }
}

/// A model to analyse: a file (start state 0) or a generated instance.
enum Target {
    File(String, TabularMdp),
    Env(EnvInstance),
}

impl Target {
    fn load(s: &Settings) -> Result<Self> {
        match &s.mdp_file {
            Some(path) => {
                let id = path
                    .file_stem()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "mdp".into());
                Ok(Target::File(id, read_mdp_file(path)?))
            }
            None => Ok(Target::Env(s.env()?)),
        }
    }

    fn mdp(&self) -> &TabularMdp {
        match self {
            Target::File(_, m) => m,
            Target::Env(e) => &e.mdp,
        }
    }

    fn id(&self) -> String {
        match self {
            Target::File(id, _) => id.clone(),
            Target::Env(e) => e.id(),
        }
    }

    fn policy(&self, which: StudyPolicy) -> Result<PolicyTable> {
        let m = self.mdp();
        match (which, self) {
            (StudyPolicy::Uniform, _) => Ok(PolicyTable::uniform(m.n_states(), m.n_actions())),
            (StudyPolicy::Optimal, Target::Env(e)) => Ok(e.optimal_policy()?.clone()),
            (StudyPolicy::Optimal, Target::File(..)) => {
                Ok(crate::mdp::optimal_average_reward(m)?.1)
            }
        }
    }
}

/// Parse `args` and run; returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(manifest) => {
            for o in &manifest.outputs {
                println!("{o}");
            }
            if manifest.truncated {
                eprintln!("warning: wall-time budget reached; results are partial");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Run one subcommand and write its outputs and manifest.
pub fn dispatch(command: Command) -> Result<Manifest> {
    let (name, settings) = command.parts();
    let s = settings.merged()?;
    let start = Instant::now();
    let dir = s.out_dir();
    let mut m = Manifest::new(name, serde_json::to_value(&s)?);
    match name {
        "analyze" => analyze(&s, &dir, &mut m)?,
        "mix" => mix(&s, &dir, &mut m)?,
        "regret" => regret(&s, &dir, &mut m)?,
        "sweep" => run_sweep(&s, &dir, &mut m)?,
        "scale" => scale(&s, &dir, &mut m)?,
        _ => gen(&s, &dir, &mut m)?,
    }
    m.wall_time_secs = start.elapsed().as_secs_f64();
    let path = write_output(&dir, &format!("{name}.manifest.json"), &serde_json::to_string_pretty(&m)?)?;
    m.outputs.push(path.display().to_string());
    Ok(m)
}

fn record(m: &mut Manifest, dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = write_output(dir, name, contents)?;
    m.outputs.push(path.display().to_string());
    Ok(())
}

fn gen(s: &Settings, dir: &Path, m: &mut Manifest) -> Result<()> {
    let env = s.env()?;
    let id = env.id();
    record(m, dir, &format!("{id}.mdp"), &write_mdp(&env.mdp, MdpLayout::Sparse))?;
    let meta = serde_json::json!({
        "family": env.family,
        "params": env.params,
        "seed": env.seed,
        "start_state": env.start_state,
        "n_tasks": env.n_tasks,
        "tau": env.tau,
        "regions": env.region_map,
    });
    record(m, dir, &format!("{id}.regions.json"), &serde_json::to_string_pretty(&meta)?)?;
    m.env_id = Some(id);
    m.seeds = vec![env.seed];
    Ok(())
}

fn analyze(s: &Settings, dir: &Path, m: &mut Manifest) -> Result<()> {
    let target = Target::load(s)?;
    let id = target.id();
    let mdp = target.mdp();
    let policy = target.policy(s.policy.unwrap_or(StudyPolicy::Uniform))?;
    let chain = induce_chain(mdp, &policy)?;
    let mu = steady_state(&chain)?;
    let rho: f64 = mu.mu.iter().zip(policy.expected_rewards(mdp)).map(|(a, b)| a * b).sum();
    let eps = s.eps.unwrap_or(0.25);
    let t_mix = exact_mixing_time(&chain, eps)?;

    let mut rows = vec![
        CsvRow::new("rho", rho, &id),
        CsvRow::new("steady_state_residual", mu.residual, &id),
        CsvRow::new("t_mix", t_mix as f64, &id).with_eps(eps, eps),
        CsvRow::new("t_ces", cesaro_mixing_time(&chain, eps)? as f64, &id).with_eps(eps, eps),
    ];
    if chain.n_states() <= SPECTRAL_LIMIT {
        rows.push(CsvRow::new("spectral_gap", spectral_gap(&chain)?, &id));
        rows.extend(policy_diameter(&chain)?.csv_rows(None, &id));
        rows.push(CsvRow::new("min_diameter", min_diameter(mdp)?, &id));
    }
    let rel = s.relative_errors.clone().unwrap_or_else(|| vec![0.1]);
    if rho > 0.0 {
        let cap = match s.horizon {
            Some(h) => h as usize,
            None => 100 * chain.n_states() * t_mix.max(1),
        };
        let rep = return_mixing_time_exact(mdp, &policy, &EpsilonGrid::Relative(rel), cap)?;
        rows.extend(rep.csv_rows(None, &id).into_iter().filter(|r| r.quantity != "rho"));
    }
    if let Target::Env(env) = &target {
        let sim_steps = s.simulate_steps.unwrap_or(0);
        for (z, region) in env.region_map.regions.iter().enumerate() {
            if env.region_map.regions.len() < 2 {
                break;
            }
            let mut rep = bottleneck_ratio(&chain, &mu, region)?;
            if sim_steps > 0 {
                rep.residence_time_simulated = Some(residence_time_simulated(
                    &chain,
                    region,
                    sim_steps as u64,
                    s.master_seed(),
                    None,
                )?);
            }
            for mut r in rep.csv_rows(None, &id) {
                r.quantity = format!("region{z}_{}", r.quantity);
                rows.push(r);
            }
        }
    }
    record(m, dir, "analyze.csv", &to_csv(&rows))?;
    m.env_id = Some(id);
    m.rho_star = match &target {
        Target::Env(e) => Some(e.rho_star()?),
        Target::File(..) => None,
    };
    Ok(())
}

fn mix(s: &Settings, dir: &Path, m: &mut Manifest) -> Result<()> {
    let target = Target::load(s)?;
    let id = target.id();
    let policy = target.policy(s.policy.unwrap_or(StudyPolicy::Uniform))?;
    let (mut sim, tau) = match &target {
        Target::Env(e) => (e.simulator(), e.tau),
        Target::File(_, mdp) => (TabularSim::new(mdp.clone(), 0), None),
    };
    let horizon = s.horizon.unwrap_or_else(|| tau.map_or(1_000_000, |t| 1000 * t as u64));
    let rel = s.relative_errors.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.3]);
    let seeds: Vec<u64> = (0..s.n_seeds()?).map(|i| replicate_seed(s.master_seed(), i)).collect();
    let mut rows = Vec::new();
    for &seed in &seeds {
        let rep = return_mixing_time_empirical(
            &mut sim,
            &policy,
            &EpsilonGrid::Relative(rel.clone()),
            s.max_tracked.unwrap_or(100),
            horizon,
            seed,
        )?;
        rows.extend(rep.csv_rows(Some(seed), &id));
    }
    record(m, dir, "mix.csv", &to_csv(&rows))?;
    m.env_id = Some(id);
    m.seeds = seeds;
    Ok(())
}

fn regret(s: &Settings, dir: &Path, m: &mut Manifest) -> Result<()> {
    let steps = s.steps()?;
    let cfg = s.agent();
    cfg.validate()?;
    let seeds: Vec<u64> = (0..s.n_seeds()?).map(|i| replicate_seed(s.master_seed(), i)).collect();
    m.seeds = seeds.clone();

    if cfg.algorithm == Algorithm::Reinforce {
        if s.family != Some(Family::TaskGrid) {
            return Err(invalid("reinforce runs on --family task_grid"));
        }
        let grid = make_task_grid(
            s.dim.unwrap_or(10),
            s.n_tasks.unwrap_or(1),
            s.tau.unwrap_or(steps),
            s.env_seed.unwrap_or(s.master_seed()),
        )?;
        let runs = seeds
            .par_iter()
            .map(|&seed| run_reinforce(&grid, &cfg, steps, 100, seed))
            .collect::<Result<Vec<_>>>()?;
        return record(m, dir, "reinforce.csv", &reinforce_csv(&runs));
    }

    let env = s.env()?;
    let opts = RunOptions {
        record: s.trace.unwrap_or(false),
        budget: s.budget()?,
        rho_star: Some(env.rho_star()?),
    };
    let traces = seeds
        .par_iter()
        .map(|&seed| run_lifelong_with(&env, &cfg, steps, seed, &opts))
        .collect::<Result<Vec<_>>>()?;
    record(m, dir, "regret.csv", &regret_csv(&traces))?;
    for t in &traces {
        if let Some(rows) = &t.rows {
            record(m, dir, &format!("trace_seed{}.csv", t.seed), &trace_csv(rows))?;
        }
    }
    m.truncated = traces.iter().any(|t| t.truncated);
    m.env_id = Some(env.id());
    m.rho_star = opts.rho_star;
    Ok(())
}

fn run_sweep(s: &Settings, dir: &Path, m: &mut Manifest) -> Result<()> {
    let env = s.env()?;
    let d = SweepGrid::default();
    let grid = SweepGrid {
        algorithms: s.algorithms.clone().unwrap_or(d.algorithms),
        epsilon: s.epsilon_grid.clone().unwrap_or(d.epsilon),
        learning_rate: s.learning_rate_grid.clone().unwrap_or(d.learning_rate),
        batch: s.batch_grid.clone().unwrap_or(d.batch),
        discount: s.discount_grid.clone().unwrap_or(d.discount),
        planning_steps: s.planning_steps_grid.clone().unwrap_or(d.planning_steps),
        n_step: s.n_step_grid.clone().unwrap_or(d.n_step),
        update_model_always: s.update_model_always.map_or(d.update_model_always, |v| vec![v]),
        base: s.agent(),
    };
    let result = sweep(&env, &grid.expand(), s.n_seeds()?, s.steps()?, s.master_seed(), s.budget()?)?;
    let (rows, summary) = sweep_csv(&result);
    record(m, dir, "sweep.csv", &rows)?;
    record(m, dir, "sweep_summary.csv", &summary)?;
    m.seeds = result.seeds.clone();
    m.truncated = result.configs.iter().any(|c| c.truncated);
    m.env_id = Some(result.env_id);
    m.rho_star = Some(result.rho_star);
    Ok(())
}

fn scale(s: &Settings, dir: &Path, m: &mut Manifest) -> Result<()> {
    let d = StudySpec::default();
    let n_seeds = s.n_seeds()?;
    let spec = StudySpec {
        family: s.family.unwrap_or(d.family),
        base: if s.family.is_some() { s.env_params() } else { d.base },
        axis: s.axis.unwrap_or(d.axis),
        points: s.points.clone().unwrap_or(d.points),
        quantity: s.quantity.unwrap_or(d.quantity),
        relative_errors: s.relative_errors.clone().unwrap_or(d.relative_errors),
        policy: s.policy.unwrap_or(d.policy),
        seeds: (0..n_seeds as u64).map(|i| s.master_seed() + i).collect(),
        horizon_factor: s.horizon_factor.unwrap_or(d.horizon_factor),
        horizon_cap: s.horizon.map(|h| h as usize),
    };
    let study = mixing_scaling_study(&spec)?;
    let (points, fits) = scale_csv(&study);
    record(m, dir, "scale.csv", &points)?;
    record(m, dir, "scale_fits.csv", &fits)?;
    m.seeds = spec.seeds;
    Ok(())
}
