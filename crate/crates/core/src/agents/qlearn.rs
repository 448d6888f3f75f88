use rand::Rng;

use super::{argmax, check_obs, Agent, AgentConfig, Algorithm, ModelEstimate};
use crate::rng::{derive_seed, seeded, SimRng};
use crate::{invalid, Result};

/// Tabular action values with ε-greedy selection.
#[derive(Clone, Debug)]
struct QTable {
    n_actions: usize,
    q: Vec<f64>,
    alpha: f64,
    gamma: f64,
    epsilon: f64,
}

impl QTable {
    fn new(cfg: &AgentConfig, n_states: usize, n_actions: usize) -> Self {
        Self {
            n_actions,
            q: vec![cfg.q_init; n_states * n_actions],
            alpha: cfg.learning_rate,
            gamma: cfg.discount,
            epsilon: cfg.epsilon,
        }
    }

    fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.n_actions..(s + 1) * self.n_actions]
    }

    fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }

    fn max(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn update(&mut self, s: usize, a: usize, target: f64) {
        let q = &mut self.q[s * self.n_actions + a];
        *q += self.alpha * (target - *q);
    }

    fn select(&self, s: usize, rng: &mut SimRng) -> usize {
        if rng.random::<f64>() < self.epsilon {
            rng.random_range(0..self.n_actions)
        } else {
            argmax(self.row(s))
        }
    }
}

fn need_reward(reward: Option<f64>) -> Result<f64> {
    reward.ok_or_else(|| invalid("a reward is required after the first step"))
}

/// One-step Q-learning. The on-policy variant bootstraps from the action it
/// is about to take (SARSA target), the off-policy one from the max.
#[derive(Clone, Debug)]
pub struct QLearning {
    on_policy: bool,
    table: QTable,
    n_states: usize,
    rng: SimRng,
    prev: Option<(usize, usize)>,
}

impl QLearning {
    pub fn new(cfg: &AgentConfig, n_states: usize, n_actions: usize) -> Result<Self> {
        cfg.validate()?;
        let on_policy = match cfg.algorithm {
            Algorithm::QOnPolicy => true,
            Algorithm::QOffPolicy | Algorithm::DynaQ | Algorithm::NstepTd => false,
            other => return Err(invalid(format!("{other} is not a Q-learning algorithm"))),
        };
        Ok(Self {
            on_policy,
            table: QTable::new(cfg, n_states, n_actions),
            n_states,
            rng: seeded(cfg.seed),
            prev: None,
        })
    }

    pub fn q(&self, s: usize, a: usize) -> f64 {
        self.table.get(s, a)
    }

    pub fn greedy_action(&self, s: usize) -> usize {
        argmax(self.table.row(s))
    }
}

impl Agent for QLearning {
    fn step(&mut self, obs: usize, reward: Option<f64>) -> Result<usize> {
        check_obs(obs, self.n_states)?;
        if self.on_policy {
            let a = self.table.select(obs, &mut self.rng);
            if let Some((s, pa)) = self.prev {
                let target = need_reward(reward)? + self.table.gamma * self.table.get(obs, a);
                self.table.update(s, pa, target);
            }
            self.prev = Some((obs, a));
            return Ok(a);
        }
        if let Some((s, pa)) = self.prev {
            let target = need_reward(reward)? + self.table.gamma * self.table.max(obs);
            self.table.update(s, pa, target);
        }
        let a = self.table.select(obs, &mut self.rng);
        self.prev = Some((obs, a));
        Ok(a)
    }

    fn algorithm(&self) -> Algorithm {
        if self.on_policy {
            Algorithm::QOnPolicy
        } else {
            Algorithm::QOffPolicy
        }
    }
}

/// Off-policy Q-learning plus `planning_steps` simulated backups per real
/// step, replayed from the learned model at previously visited pairs.
#[derive(Clone, Debug)]
pub struct DynaQ {
    inner: QLearning,
    model: ModelEstimate,
    planning_steps: usize,
    plan_rng: SimRng,
}

impl DynaQ {
    pub fn new(cfg: &AgentConfig, n_states: usize, n_actions: usize) -> Result<Self> {
        Ok(Self {
            inner: QLearning::new(cfg, n_states, n_actions)?,
            model: ModelEstimate::new(n_states, n_actions),
            planning_steps: cfg.planning_steps,
            plan_rng: seeded(derive_seed(cfg.seed, 1)),
        })
    }

    pub fn model(&self) -> &ModelEstimate {
        &self.model
    }

    pub fn q(&self, s: usize, a: usize) -> f64 {
        self.inner.q(s, a)
    }

    fn plan(&mut self) {
        let pairs = self.model.visited_pairs();
        if pairs.is_empty() {
            return;
        }
        for _ in 0..self.planning_steps {
            let (s, a) = pairs[self.plan_rng.random_range(0..pairs.len())];
            let next = self.model.sample_next(s, a, &mut self.plan_rng);
            let t = &mut self.inner.table;
            let target = self.model.r_hat(s, a) + t.gamma * t.max(next);
            t.update(s, a, target);
        }
    }
}

impl Agent for DynaQ {
    fn step(&mut self, obs: usize, reward: Option<f64>) -> Result<usize> {
        check_obs(obs, self.inner.n_states)?;
        if let Some((s, a)) = self.inner.prev {
            let r = need_reward(reward)?;
            let t = &mut self.inner.table;
            let target = r + t.gamma * t.max(obs);
            t.update(s, a, target);
            self.model.observe(s, a, r, obs);
            self.plan();
        }
        let a = self.inner.table.select(obs, &mut self.inner.rng);
        self.inner.prev = Some((obs, a));
        Ok(a)
    }

    fn algorithm(&self) -> Algorithm {
        Algorithm::DynaQ
    }
}

/// Q-learning whose target extends the real transition with `n − 1` greedy
/// steps simulated in the learned model before bootstrapping.
#[derive(Clone, Debug)]
pub struct NStepTd {
    inner: QLearning,
    model: ModelEstimate,
    n_step: usize,
    plan_rng: SimRng,
}

impl NStepTd {
    pub fn new(cfg: &AgentConfig, n_states: usize, n_actions: usize) -> Result<Self> {
        Ok(Self {
            inner: QLearning::new(cfg, n_states, n_actions)?,
            model: ModelEstimate::new(n_states, n_actions),
            n_step: cfg.n_step,
            plan_rng: seeded(derive_seed(cfg.seed, 2)),
        })
    }

    pub fn model(&self) -> &ModelEstimate {
        &self.model
    }

    pub fn q(&self, s: usize, a: usize) -> f64 {
        self.inner.q(s, a)
    }

    /// `r + γ r̂₁ + … + γ^{k} max_a Q(x_k, a)`, rolling out greedily from
    /// `next` until `n` steps or an unvisited pair.
    pub fn target(&mut self, reward: f64, next: usize) -> f64 {
        let t = &self.inner.table;
        let mut g = reward;
        let mut disc = t.gamma;
        let mut x = next;
        for _ in 1..self.n_step {
            let a = argmax(t.row(x));
            if self.model.visits(x, a) == 0 {
                break;
            }
            g += disc * self.model.r_hat(x, a);
            disc *= t.gamma;
            x = self.model.sample_next(x, a, &mut self.plan_rng);
        }
        g + disc * t.max(x)
    }
}

impl Agent for NStepTd {
    fn step(&mut self, obs: usize, reward: Option<f64>) -> Result<usize> {
        check_obs(obs, self.inner.n_states)?;
        if let Some((s, a)) = self.inner.prev {
            let r = need_reward(reward)?;
            self.model.observe(s, a, r, obs);
            let target = self.target(r, obs);
            self.inner.table.update(s, a, target);
        }
        let a = self.inner.table.select(obs, &mut self.inner.rng);
        self.inner.prev = Some((obs, a));
        Ok(a)
    }

    fn algorithm(&self) -> Algorithm {
        Algorithm::NstepTd
    }
}
