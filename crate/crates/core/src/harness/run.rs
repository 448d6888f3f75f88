use std::time::{Duration, Instant};

use serde::Serialize;

use crate::agents::{make_agent, Agent, AgentConfig, Algorithm, Reinforce};
use crate::envs::{EnvInstance, Environment, TaskGrid};
use crate::rng::{derive_seed, seeded};
use crate::{invalid, Error, Result};

const AGENT_STREAM: u64 = 0;
const ENV_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

/// One step of a recorded run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub reward: f64,
    pub epsilon: f64,
    pub rho_hat: Option<f64>,
}

/// Outcome of one continuing run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretTrace {
    pub algorithm: Algorithm,
    /// Per-step rows, kept only when requested.
    #[serde(skip)]
    pub rows: Option<Vec<TraceRow>>,
    pub reward_sum: f64,
    pub rho_star: f64,
    /// `rho_star - reward_sum / steps`.
    pub regret_per_step: f64,
    pub steps: usize,
    pub seed: u64,
    /// Set when the wall-time budget stopped the run early; `steps` then
    /// counts the completed steps.
    pub truncated: bool,
}

impl RegretTrace {
    pub fn mean_reward(&self) -> f64 {
        self.reward_sum / self.steps as f64
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub record: bool,
    pub budget: Option<Duration>,
    /// Use this `ρ*` instead of solving the environment.
    pub rho_star: Option<f64>,
}

/// Run one tabular agent for `steps` steps of the continuing MDP.
pub fn run_lifelong(env: &EnvInstance, cfg: &AgentConfig, steps: usize, seed: u64) -> Result<RegretTrace> {
    run_lifelong_with(env, cfg, steps, seed, &RunOptions::default())
}

pub fn run_lifelong_with(
    env: &EnvInstance,
    cfg: &AgentConfig,
    steps: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<RegretTrace> {
    if steps == 0 {
        return Err(invalid("steps must be positive"));
    }
    let rho_star = match opts.rho_star {
        Some(r) => r,
        None => env.rho_star()?,
    };
    let mut cfg = cfg.clone();
    cfg.seed = derive_seed(seed, AGENT_STREAM);
    let mut agent = make_agent(&cfg, env.n_states(), env.n_actions())?;
    let mut sim = env.simulator();
    let mut rng = seeded(derive_seed(seed, ENV_STREAM));
    let start = Instant::now();

    let mut rows = opts.record.then(|| Vec::with_capacity(steps));
    let mut obs = sim.reset(&mut rng);
    let mut last = None;
    let mut total = 0.0;
    let mut done = 0;
    let mut truncated = false;
    while done < steps {
        if done % 1024 == 0 && opts.budget.is_some_and(|b| start.elapsed() > b) {
            truncated = true;
            break;
        }
        let a = agent.step(obs, last).map_err(|e| at_step(e, done))?;
        let (next, r) = sim.step(a, &mut rng)?;
        total += r;
        done += 1;
        if let Some(rows) = rows.as_mut() {
            rows.push(TraceRow {
                step: done,
                reward: r,
                epsilon: cfg.epsilon,
                rho_hat: agent.rho_hat(),
            });
        }
        obs = next;
        last = Some(r);
    }
    if done == 0 {
        return Err(Error::Budget {
            limit_secs: opts.budget.map_or(0.0, |b| b.as_secs_f64()),
            completed: 0,
        });
    }
    Ok(RegretTrace {
        algorithm: cfg.algorithm,
        rows,
        reward_sum: total,
        rho_star,
        regret_per_step: rho_star - total / done as f64,
        steps: done,
        seed,
        truncated,
    })
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::NonFinite { .. } | Error::Agent { .. } => e,
        other => Error::Agent {
            step,
            message: other.to_string(),
        },
    }
}

/// REINFORCE on the task grid: training reward rate and a held-out rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReinforceRun {
    pub steps: usize,
    pub seed: u64,
    pub train_reward_rate: f64,
    /// Stochastic policy from the corner, averaged over every task.
    pub final_reward_rate: f64,
}

pub fn run_reinforce(
    grid: &TaskGrid,
    cfg: &AgentConfig,
    steps: usize,
    eval_steps_per_goal: usize,
    seed: u64,
) -> Result<ReinforceRun> {
    if steps == 0 || eval_steps_per_goal == 0 {
        return Err(invalid("steps and eval_steps_per_goal must be positive"));
    }
    let mut cfg = cfg.clone();
    cfg.seed = derive_seed(seed, AGENT_STREAM);
    let mut agent = Reinforce::new(&cfg, grid)?;
    let mut sim = grid.simulator();
    let mut rng = seeded(derive_seed(seed, ENV_STREAM));
    let mut obs = sim.reset(&mut rng);
    let mut last = None;
    let mut total = 0.0;
    for _ in 0..steps {
        let a = agent.step(obs, last)?;
        let (next, r) = sim.step(a, &mut rng)?;
        total += r;
        obs = next;
        last = Some(r);
    }
    let mut eval_rng = seeded(derive_seed(seed, EVAL_STREAM));
    Ok(ReinforceRun {
        steps,
        seed,
        train_reward_rate: total / steps as f64,
        final_reward_rate: agent.evaluate(&grid.goals, eval_steps_per_goal, &mut eval_rng),
    })
}
