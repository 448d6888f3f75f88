use nalgebra::DMatrix;
use rand::Rng;

use super::{argmax, check_obs, Agent, AgentConfig, Algorithm, ModelEstimate};
use crate::linalg::DenseLu;
use crate::mdp::{PolicyTable, TabularMdp};
use crate::rng::{seeded, SimRng};
use crate::{invalid, Error, Result};

/// Largest `n² · m` table the planner will allocate.
const MAX_MODEL_ENTRIES: usize = 50_000_000;

/// Rank-one updates between full re-factorisations.
const REFRESH_EVERY: usize = 500;

/// Exact average-reward evaluation of a policy on a tabular model, kept up
/// to date under single-row changes.
///
/// With `A = I − P + 1bᵀ` (`b` uniform) the stationary distribution is
/// `μᵀ = bᵀA⁻¹` and `g = A⁻¹r` gives `ρ = μᵀr`. Changing row `s` of `P` by
/// `d` and `r(s)` by `δ` moves the gain to
/// `ρ + μ(s)(δ + dᵀg) / (1 − dᵀA⁻¹e_s)`, so every candidate action costs
/// `O(n)` and a commit is a Sherman–Morrison update of `A⁻¹`.
#[derive(Clone, Debug)]
pub struct RhoPlanner {
    n: usize,
    m: usize,
    /// Kernel smoothing coefficients: `P = scale · P_base + floor`.
    scale: f64,
    floor: f64,
    /// Dense model rows `T̂(·|s, a)` at `(s * m + a) * n`.
    t: Vec<f64>,
    r_model: Vec<f64>,
    policy: PolicyTable,
    /// Unsmoothed `P_π`, row-major.
    p: Vec<f64>,
    r: Vec<f64>,
    ainv: DMatrix<f64>,
    mu: Vec<f64>,
    g: Vec<f64>,
    rho: f64,
    since_refresh: usize,
    w: Vec<f64>,
}

impl RhoPlanner {
    /// Uniform model, zero rewards, uniform policy.
    pub fn new(n_states: usize, n_actions: usize, smoothing: f64) -> Result<Self> {
        let n = n_states;
        if n == 0 || n_actions == 0 {
            return Err(invalid("the planner needs at least one state and one action"));
        }
        if n.saturating_mul(n).saturating_mul(n_actions) > MAX_MODEL_ENTRIES {
            return Err(invalid(format!(
                "a dense model of {n} states and {n_actions} actions is too large"
            )));
        }
        if !(smoothing > 0.0) {
            return Err(invalid("planner smoothing must be positive"));
        }
        let denom = 1.0 + n as f64 * smoothing;
        let mut planner = Self {
            n,
            m: n_actions,
            scale: 1.0 / denom,
            floor: smoothing / denom,
            t: vec![1.0 / n as f64; n * n * n_actions],
            r_model: vec![0.0; n * n_actions],
            policy: PolicyTable::uniform(n, n_actions),
            p: vec![1.0 / n as f64; n * n],
            r: vec![0.0; n],
            ainv: DMatrix::identity(n, n),
            mu: vec![1.0 / n as f64; n],
            g: vec![0.0; n],
            rho: 0.0,
            since_refresh: 0,
            w: vec![0.0; n],
        };
        planner.refresh()?;
        Ok(planner)
    }

    /// Planner over a known model (the kernel including its own smoothing),
    /// starting from the uniform policy.
    pub fn from_mdp(mdp: &TabularMdp, smoothing: f64) -> Result<Self> {
        let (n, m) = (mdp.n_states(), mdp.n_actions());
        let mut planner = Self::new(n, m, smoothing)?;
        for s in 0..n {
            for a in 0..m {
                let k = (s * m + a) * n;
                planner.t[k..k + n].copy_from_slice(&mdp.dense_row(s, a));
                planner.r_model[s * m + a] = mdp.reward(s, a);
            }
            planner.recompute_row(s);
        }
        planner.refresh()?;
        Ok(planner)
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn policy(&self) -> &PolicyTable {
        &self.policy
    }

    /// `ρ̂` of the current policy on the current model.
    pub fn rho_hat(&self) -> f64 {
        self.rho
    }

    pub fn stationary(&self) -> &[f64] {
        &self.mu
    }

    /// Set `R̂` of every pair to `reward` (the policy and kernel stay).
    pub fn set_all_rewards(&mut self, reward: f64) -> Result<()> {
        self.r_model.iter_mut().for_each(|r| *r = reward);
        for s in 0..self.n {
            self.recompute_row(s);
        }
        self.refresh()
    }

    /// Replace `T̂(·|s, a)` and `R̂(s, a)`.
    pub fn set_model(&mut self, s: usize, a: usize, row: &[f64], reward: f64) -> Result<()> {
        let k = (s * self.m + a) * self.n;
        self.t[k..k + self.n].copy_from_slice(row);
        self.r_model[s * self.m + a] = reward;
        if self.policy.prob(s, a) > 0.0 {
            let (row, r) = self.mixed_row(s);
            self.change_row(s, &row, r)?;
        }
        Ok(())
    }

    /// `ρ̂` of `π` with each action forced at `s`.
    pub fn candidates(&self, s: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let u = self.ainv.column(s);
        let p = &self.p[s * n..(s + 1) * n];
        (0..self.m)
            .map(|a| {
                let k = (s * self.m + a) * n;
                let t = &self.t[k..k + n];
                let (mut du, mut dg) = (0.0, 0.0);
                for j in 0..n {
                    let d = self.scale * (t[j] - p[j]);
                    du += d * u[j];
                    dg += d * self.g[j];
                }
                let den = 1.0 - du;
                let delta = self.r_model[s * self.m + a] - self.r[s];
                if den.abs() > 1e-9 {
                    Ok(self.rho + self.mu[s] * (delta + dg) / den)
                } else {
                    self.forced_rho_exact(s, a)
                }
            })
            .collect()
    }

    /// Force the `ρ̂`-maximising action at `s`. Returns whether `π` changed.
    pub fn improve(&mut self, s: usize) -> Result<bool> {
        let values = self.candidates(s)?;
        let best = argmax(&values);
        if self.policy.prob(s, best) == 1.0 {
            return Ok(false);
        }
        self.policy.set_action(s, best);
        let k = (s * self.m + best) * self.n;
        let row = self.t[k..k + self.n].to_vec();
        self.change_row(s, &row, self.r_model[s * self.m + best])?;
        Ok(true)
    }

    fn mixed_row(&self, s: usize) -> (Vec<f64>, f64) {
        let n = self.n;
        let mut row = vec![0.0; n];
        let mut r = 0.0;
        for (a, &pa) in self.policy.row(s).iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            let k = (s * self.m + a) * n;
            for (o, &t) in row.iter_mut().zip(&self.t[k..k + n]) {
                *o += pa * t;
            }
            r += pa * self.r_model[s * self.m + a];
        }
        (row, r)
    }

    fn recompute_row(&mut self, s: usize) {
        let (row, r) = self.mixed_row(s);
        self.p[s * self.n..(s + 1) * self.n].copy_from_slice(&row);
        self.r[s] = r;
    }

    fn change_row(&mut self, s: usize, row: &[f64], r_new: f64) -> Result<()> {
        let n = self.n;
        let mut d = vec![0.0; n];
        for j in 0..n {
            d[j] = self.scale * (row[j] - self.p[s * n + j]);
        }
        let delta = r_new - self.r[s];
        self.p[s * n..(s + 1) * n].copy_from_slice(row);
        self.r[s] = r_new;
        if self.since_refresh >= REFRESH_EVERY {
            return self.refresh();
        }
        let u: Vec<f64> = self.ainv.column(s).iter().copied().collect();
        let du: f64 = d.iter().zip(&u).map(|(a, b)| a * b).sum();
        let den = 1.0 - du;
        if den.abs() < 1e-9 {
            return self.refresh();
        }
        let dg: f64 = d.iter().zip(&self.g).map(|(a, b)| a * b).sum();
        for j in 0..n {
            let col = self.ainv.column(j);
            self.w[j] = d.iter().zip(col.iter()).map(|(a, b)| a * b).sum::<f64>() / den;
        }
        for j in 0..n {
            let wj = self.w[j];
            if wj != 0.0 {
                let mut col = self.ainv.column_mut(j);
                for i in 0..n {
                    col[i] += u[i] * wj;
                }
            }
        }
        let mu_s = self.mu[s];
        for j in 0..n {
            self.mu[j] += mu_s * self.w[j];
        }
        let step = (delta + dg) / den;
        for i in 0..n {
            self.g[i] += u[i] * step;
        }
        self.rho = self.mu.iter().zip(&self.r).map(|(a, b)| a * b).sum();
        self.since_refresh += 1;
        if !self.rho.is_finite() {
            return self.refresh();
        }
        Ok(())
    }

    fn system(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let off = 1.0 / n as f64 - self.floor;
        DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - self.scale * p[i * n + j] + off
        })
    }

    /// Re-factorise from scratch.
    pub fn refresh(&mut self) -> Result<()> {
        let n = self.n;
        self.ainv = DenseLu::new(self.system(&self.p))?.inverse()?;
        for j in 0..n {
            self.mu[j] = self.ainv.column(j).sum() / n as f64;
        }
        for i in 0..n {
            self.g[i] = (0..n).map(|j| self.ainv[(i, j)] * self.r[j]).sum();
        }
        self.rho = self.mu.iter().zip(&self.r).map(|(a, b)| a * b).sum();
        self.since_refresh = 0;
        if !self.rho.is_finite() {
            return Err(Error::NonFinite { step: 0 });
        }
        Ok(())
    }

    fn forced_rho_exact(&self, s: usize, a: usize) -> Result<f64> {
        let n = self.n;
        let mut p = self.p.clone();
        let k = (s * self.m + a) * n;
        p[s * n..(s + 1) * n].copy_from_slice(&self.t[k..k + n]);
        let mut r = self.r.clone();
        r[s] = self.r_model[s * self.m + a];
        let lu = DenseLu::new(self.system(&p).transpose())?;
        let mu = lu.solve(&vec![1.0 / n as f64; n])?;
        Ok(mu.iter().zip(&r).map(|(a, b)| a * b).sum())
    }
}

/// ρ-learning: model-based policy improvement on the exact `ρ̂` of the
/// learned model.
///
/// On-policy: with probability `1 − ε` the action at the current state is
/// improved and taken; otherwise a uniform action is taken and the model
/// learns from that transition (all transitions with
/// `update_model_always`). Off-policy: act ε-greedily, always learn the
/// model, then improve `batch` uniformly drawn states.
#[derive(Clone, Debug)]
pub struct RhoLearning {
    on_policy: bool,
    epsilon: f64,
    batch: usize,
    update_model_always: bool,
    model: ModelEstimate,
    planner: RhoPlanner,
    rng: SimRng,
    prev: Option<(usize, usize, bool)>,
    steps: usize,
    row: Vec<f64>,
}

impl RhoLearning {
    pub fn new(cfg: &AgentConfig, n_states: usize, n_actions: usize) -> Result<Self> {
        cfg.validate()?;
        let on_policy = match cfg.algorithm {
            Algorithm::RhoOnPolicy => true,
            Algorithm::RhoOffPolicy => false,
            other => return Err(invalid(format!("{other} is not a ρ-learning algorithm"))),
        };
        let mut planner = RhoPlanner::new(n_states, n_actions, cfg.model_smoothing)?;
        if cfg.reward_prior != 0.0 {
            planner.set_all_rewards(cfg.reward_prior)?;
        }
        Ok(Self {
            on_policy,
            epsilon: cfg.epsilon,
            batch: cfg.batch,
            update_model_always: cfg.update_model_always,
            model: ModelEstimate::new(n_states, n_actions).with_reward_prior(cfg.reward_prior),
            planner,
            rng: seeded(cfg.seed),
            prev: None,
            steps: 0,
            row: vec![0.0; n_states],
        })
    }

    pub fn policy(&self) -> &PolicyTable {
        self.planner.policy()
    }

    pub fn model(&self) -> &ModelEstimate {
        &self.model
    }

    pub fn planner(&self) -> &RhoPlanner {
        &self.planner
    }

    fn learn(&mut self, s: usize, a: usize, reward: f64, next: usize) -> Result<()> {
        self.model.observe(s, a, reward, next);
        self.model.t_hat_row_into(s, a, &mut self.row);
        self.planner.set_model(s, a, &self.row, self.model.r_hat(s, a))
    }

    fn act(&mut self, obs: usize) -> Result<(usize, bool)> {
        let m = self.model.n_actions();
        if self.on_policy {
            if self.rng.random::<f64>() < self.epsilon {
                return Ok((self.rng.random_range(0..m), true));
            }
            self.planner.improve(obs)?;
            return Ok((self.planner.policy().greedy_action(obs), false));
        }
        if self.rng.random::<f64>() < self.epsilon {
            Ok((self.rng.random_range(0..m), true))
        } else {
            Ok((self.planner.policy().sample(obs, &mut self.rng), false))
        }
    }
}

impl Agent for RhoLearning {
    fn step(&mut self, obs: usize, reward: Option<f64>) -> Result<usize> {
        check_obs(obs, self.model.n_states())?;
        let step = self.steps;
        let wrap = |e: Error| Error::Agent {
            step,
            message: e.to_string(),
        };
        if let Some((s, a, explored)) = self.prev {
            let r = reward.ok_or_else(|| invalid("a reward is required after the first step"))?;
            if !self.on_policy || explored || self.update_model_always {
                self.learn(s, a, r, obs).map_err(wrap)?;
            }
            if !self.on_policy {
                for _ in 0..self.batch {
                    let s = self.rng.random_range(0..self.model.n_states());
                    self.planner.improve(s).map_err(wrap)?;
                }
            }
        }
        let (a, explored) = self.act(obs).map_err(wrap)?;
        self.prev = Some((obs, a, explored));
        self.steps += 1;
        Ok(a)
    }

    fn algorithm(&self) -> Algorithm {
        if self.on_policy {
            Algorithm::RhoOnPolicy
        } else {
            Algorithm::RhoOffPolicy
        }
    }

    fn rho_hat(&self) -> Option<f64> {
        Some(self.planner.rho_hat())
    }
}
