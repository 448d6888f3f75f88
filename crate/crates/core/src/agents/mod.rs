//! Step-wise learning agents: ρ-learning, tabular Q-learning baselines,
//! Dyna-Q, model-based n-step TD and a small REINFORCE policy network.
//!
//! Every agent is driven the same way: the harness passes the current
//! observation and the reward of the previous transition (`None` on the
//! first call) and receives the next action.

mod model;
mod nn;
mod qlearn;
mod reinforce;
mod rho;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use model::ModelEstimate;
pub use nn::{Mlp, PolicyParams, Sample};
pub use qlearn::{DynaQ, NStepTd, QLearning};
pub use reinforce::Reinforce;
pub use rho::{RhoLearning, RhoPlanner};

use crate::{invalid, Error, Result};

pub trait Agent: Send {
    /// Observe `obs` (reached with `reward`) and choose the next action.
    fn step(&mut self, obs: usize, reward: Option<f64>) -> Result<usize>;

    fn algorithm(&self) -> Algorithm;

    /// Model-estimated reward rate of the current policy, when the agent
    /// keeps one.
    fn rho_hat(&self) -> Option<f64> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    RhoOnPolicy,
    RhoOffPolicy,
    QOnPolicy,
    QOffPolicy,
    DynaQ,
    NstepTd,
    Reinforce,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::RhoOnPolicy,
        Algorithm::RhoOffPolicy,
        Algorithm::QOnPolicy,
        Algorithm::QOffPolicy,
        Algorithm::DynaQ,
        Algorithm::NstepTd,
        Algorithm::Reinforce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RhoOnPolicy => "rho_on_policy",
            Algorithm::RhoOffPolicy => "rho_off_policy",
            Algorithm::QOnPolicy => "q_on_policy",
            Algorithm::QOffPolicy => "q_off_policy",
            Algorithm::DynaQ => "dyna_q",
            Algorithm::NstepTd => "nstep_td",
            Algorithm::Reinforce => "reinforce",
        }
    }

    pub fn is_on_policy(self) -> bool {
        matches!(
            self,
            Algorithm::RhoOnPolicy | Algorithm::QOnPolicy | Algorithm::Reinforce
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid(format!("unknown algorithm `{s}`")))
    }
}

/// Hyperparameters shared by all agents; each agent reads the fields it
/// needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub learning_rate: f64,
    /// States improved per step by off-policy ρ-learning.
    pub batch: usize,
    pub planning_steps: usize,
    pub n_step: usize,
    /// Discount of the Q-learning family.
    pub discount: f64,
    /// Initial value of every Q entry.
    pub q_init: f64,
    /// On-policy ρ-learning: also learn the model on greedy steps.
    pub update_model_always: bool,
    /// `R̂` of untried pairs in the ρ-learning model.
    pub reward_prior: f64,
    /// Smoothing added to the ρ-learning model before each solve.
    pub model_smoothing: f64,
    pub entropy_coef: f64,
    pub grad_clip: f64,
    /// REINFORCE update window (steps per episode).
    pub episode_len: usize,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::RhoOffPolicy,
            epsilon: 0.1,
            learning_rate: 0.1,
            batch: 1,
            planning_steps: 10,
            n_step: 3,
            discount: 0.99,
            q_init: 0.0,
            update_model_always: false,
            reward_prior: 0.0,
            model_smoothing: crate::mdp::DEFAULT_SMOOTHING,
            entropy_coef: 0.1,
            grad_clip: 10.0,
            episode_len: 10,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("epsilon", self.epsilon)?;
        unit("discount", self.discount)?;
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.algorithm == Algorithm::RhoOffPolicy && self.batch == 0 {
            return Err(invalid("batch must be at least 1"));
        }
        if self.algorithm == Algorithm::NstepTd && self.n_step == 0 {
            return Err(invalid("n_step must be at least 1"));
        }
        if !(self.model_smoothing > 0.0) {
            return Err(invalid("model_smoothing must be positive"));
        }
        if !self.q_init.is_finite() || !self.reward_prior.is_finite() {
            return Err(invalid("q_init and reward_prior must be finite"));
        }
        if !(self.entropy_coef >= 0.0) || !(self.grad_clip > 0.0) || self.episode_len == 0 {
            return Err(invalid(
                "entropy_coef >= 0, grad_clip > 0 and episode_len >= 1 are required",
            ));
        }
        Ok(())
    }
}

/// Build a tabular agent. REINFORCE needs a featurizer and is built with
/// [`Reinforce::new`] instead.
pub fn make_agent(cfg: &AgentConfig, n_states: usize, n_actions: usize) -> Result<Box<dyn Agent>> {
    cfg.validate()?;
    if n_states == 0 || n_actions == 0 {
        return Err(invalid("agents need at least one state and one action"));
    }
    Ok(match cfg.algorithm {
        Algorithm::RhoOnPolicy | Algorithm::RhoOffPolicy => {
            Box::new(RhoLearning::new(cfg, n_states, n_actions)?)
        }
        Algorithm::QOnPolicy | Algorithm::QOffPolicy => {
            Box::new(QLearning::new(cfg, n_states, n_actions)?)
        }
        Algorithm::DynaQ => Box::new(DynaQ::new(cfg, n_states, n_actions)?),
        Algorithm::NstepTd => Box::new(NStepTd::new(cfg, n_states, n_actions)?),
        Algorithm::Reinforce => {
            return Err(invalid("reinforce needs a featurized task grid; use Reinforce::new"))
        }
    })
}

pub(crate) fn check_obs(obs: usize, n_states: usize) -> Result<()> {
    if obs >= n_states {
        return Err(Error::Dimension {
            axis: "observation",
            expected: n_states,
            got: obs,
        });
    }
    Ok(())
}

/// Index of the largest value; near-ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] + 1e-12 * (1.0 + values[best].abs()) {
            best = a;
        }
    }
    best
}
