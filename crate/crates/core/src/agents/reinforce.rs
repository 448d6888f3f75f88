use std::sync::Arc;

use rand::Rng;

use super::nn::{softmax, Mlp, PolicyParams, Sample};
use super::{check_obs, Agent, AgentConfig, Algorithm};
use crate::envs::{TaskGrid, N_TASK_GRID_ACTIONS};
use crate::rng::{seeded, SimRng};
use crate::{invalid, Error, Result};

/// Hidden layer widths of the policy network.
pub const HIDDEN: [usize; 2] = [100, 100];

/// REINFORCE with `γ = 0` on the featurized task grid: every action is
/// credited with its immediate reward and the policy takes one clipped
/// ascent step per `episode_len` transitions.
#[derive(Clone, Debug)]
pub struct Reinforce {
    grid: Arc<TaskGrid>,
    params: PolicyParams,
    rng: SimRng,
    episode_len: usize,
    buffer: Vec<Sample>,
    prev: Option<(Vec<f64>, usize)>,
    steps: usize,
}

impl Reinforce {
    pub fn new(cfg: &AgentConfig, grid: &TaskGrid) -> Result<Self> {
        cfg.validate()?;
        if cfg.algorithm != Algorithm::Reinforce {
            return Err(invalid(format!("{} is not reinforce", cfg.algorithm)));
        }
        let mut rng = seeded(cfg.seed);
        let sizes = [grid.feature_dim(), HIDDEN[0], HIDDEN[1], N_TASK_GRID_ACTIONS];
        let net = Mlp::new(&sizes, &mut rng)?;
        Ok(Self {
            grid: Arc::new(grid.clone()),
            params: PolicyParams {
                net,
                step_size: cfg.learning_rate,
                entropy_coef: cfg.entropy_coef,
                grad_clip: cfg.grad_clip,
            },
            rng,
            episode_len: cfg.episode_len,
            buffer: Vec::with_capacity(cfg.episode_len),
            prev: None,
            steps: 0,
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn action_probabilities(&self, obs: usize) -> Vec<f64> {
        softmax(&self.params.net.forward(&self.grid.features(obs)))
    }

    /// Mean reward per step of the current (stochastic) policy, starting
    /// from the corner of each listed goal for `steps_per_goal` steps.
    pub fn evaluate<R: Rng + ?Sized>(&self, goals: &[usize], steps_per_goal: usize, rng: &mut R) -> f64 {
        let mut total = 0.0;
        for &goal in goals {
            let mut pos = 0;
            for _ in 0..steps_per_goal {
                let p = self.action_probabilities(self.grid.observation(pos, goal));
                let a = sample(&p, rng);
                let (next, r) = self.grid.step_cell(pos, a, goal);
                total += r;
                pos = next;
            }
        }
        total / (goals.len() * steps_per_goal) as f64
    }
}

fn sample<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, &v) in p.iter().enumerate() {
        acc += v;
        if u < acc {
            return a;
        }
    }
    p.len() - 1
}

impl Agent for Reinforce {
    fn step(&mut self, obs: usize, reward: Option<f64>) -> Result<usize> {
        let cells = self.grid.n_cells();
        check_obs(obs, cells * cells)?;
        if let Some((features, action)) = self.prev.take() {
            let reward = reward.ok_or_else(|| invalid("a reward is required after the first step"))?;
            self.buffer.push(Sample {
                features,
                action,
                reward,
            });
            if self.buffer.len() == self.episode_len {
                let norm = self.params.ascend(&self.buffer);
                self.buffer.clear();
                if !norm.is_finite() || self.params.net.params().any(|p| !p.is_finite()) {
                    return Err(Error::NonFinite { step: self.steps });
                }
            }
        }
        let features = self.grid.features(obs);
        let p = softmax(&self.params.net.forward(&features));
        let a = sample(&p, &mut self.rng);
        self.prev = Some((features, a));
        self.steps += 1;
        Ok(a)
    }

    fn algorithm(&self) -> Algorithm {
        Algorithm::Reinforce
    }
}
