use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{run_lifelong_with, RunOptions};
use crate::agents::{AgentConfig, Algorithm};
use crate::envs::EnvInstance;
use crate::rng::derive_seed;
use crate::{invalid, Result};

/// Hyperparameter grid. Each algorithm is crossed only with the fields it
/// reads; the remaining fields come from `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub algorithms: Vec<Algorithm>,
    pub epsilon: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub batch: Vec<usize>,
    pub discount: Vec<f64>,
    pub planning_steps: Vec<usize>,
    pub n_step: Vec<usize>,
    pub update_model_always: Vec<bool>,
    pub base: AgentConfig,
}

impl Default for SweepGrid {
    /// The grid used for the tabular regret tables.
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL
                .into_iter()
                .filter(|a| *a != Algorithm::Reinforce)
                .collect(),
            epsilon: vec![0.1, 0.2, 0.3],
            learning_rate: vec![0.1, 0.5],
            batch: vec![1, 5, 25],
            discount: vec![0.9, 0.99, 0.997],
            planning_steps: vec![10],
            n_step: vec![3],
            update_model_always: vec![false],
            base: AgentConfig::default(),
        }
    }
}

impl SweepGrid {
    pub fn only(mut self, algorithms: &[Algorithm]) -> Self {
        self.algorithms = algorithms.to_vec();
        self
    }

    /// Every configuration of the grid, algorithm by algorithm.
    pub fn expand(&self) -> Vec<AgentConfig> {
        let mut out = Vec::new();
        for &alg in &self.algorithms {
            let mut cfgs = vec![AgentConfig {
                algorithm: alg,
                ..self.base.clone()
            }];
            cross(&mut cfgs, &self.epsilon, |c, &v| c.epsilon = v);
            match alg {
                Algorithm::RhoOnPolicy => {
                    cross(&mut cfgs, &self.update_model_always, |c, &v| c.update_model_always = v)
                }
                Algorithm::RhoOffPolicy => cross(&mut cfgs, &self.batch, |c, &v| c.batch = v),
                Algorithm::Reinforce => cross(&mut cfgs, &self.learning_rate, |c, &v| c.learning_rate = v),
                q => {
                    cross(&mut cfgs, &self.learning_rate, |c, &v| c.learning_rate = v);
                    cross(&mut cfgs, &self.discount, |c, &v| c.discount = v);
                    match q {
                        Algorithm::DynaQ => {
                            cross(&mut cfgs, &self.planning_steps, |c, &v| c.planning_steps = v)
                        }
                        Algorithm::NstepTd => cross(&mut cfgs, &self.n_step, |c, &v| c.n_step = v),
                        _ => {}
                    }
                }
            }
            out.extend(cfgs);
        }
        out
    }
}

fn cross<T>(cfgs: &mut Vec<AgentConfig>, values: &[T], set: impl Fn(&mut AgentConfig, &T)) {
    if values.is_empty() {
        return;
    }
    *cfgs = cfgs
        .iter()
        .flat_map(|c| {
            values.iter().map(|v| {
                let mut c = c.clone();
                set(&mut c, v);
                c
            })
        })
        .collect();
}

/// Short description of the fields an algorithm reads.
pub fn describe(cfg: &AgentConfig) -> String {
    let mut s = format!("{} eps={}", cfg.algorithm, cfg.epsilon);
    match cfg.algorithm {
        Algorithm::RhoOnPolicy => s += &format!(" always={}", cfg.update_model_always),
        Algorithm::RhoOffPolicy => s += &format!(" B={}", cfg.batch),
        Algorithm::Reinforce => s += &format!(" lr={}", cfg.learning_rate),
        q => {
            s += &format!(" lr={} gamma={}", cfg.learning_rate, cfg.discount);
            match q {
                Algorithm::DynaQ => s += &format!(" plan={}", cfg.planning_steps),
                Algorithm::NstepTd => s += &format!(" n={}", cfg.n_step),
                _ => {}
            }
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigResult {
    pub config: AgentConfig,
    pub label: String,
    /// Regret per step, one entry per seed in seed order.
    pub regrets: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (0 for a single seed).
    pub std: f64,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub env_id: String,
    pub rho_star: f64,
    pub steps: usize,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub configs: Vec<ConfigResult>,
    /// Index into `configs` of the lowest mean regret, per algorithm.
    pub best: Vec<(Algorithm, usize)>,
}

impl SweepResult {
    pub fn n_seeds(&self) -> usize {
        self.seeds.len()
    }

    pub fn best_for(&self, alg: Algorithm) -> Option<&ConfigResult> {
        self.best
            .iter()
            .find(|(a, _)| *a == alg)
            .map(|&(_, i)| &self.configs[i])
    }
}

/// Seed of the `i`-th replicate under a master seed.
pub fn replicate_seed(master: u64, i: usize) -> u64 {
    derive_seed(master, 1000 + i as u64)
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Run every configuration on `n_seeds` shared seeds and pick the best
/// configuration of each algorithm by mean regret (ties to the earlier one).
pub fn sweep(
    env: &EnvInstance,
    configs: &[AgentConfig],
    n_seeds: usize,
    steps: usize,
    master_seed: u64,
    budget: Option<Duration>,
) -> Result<SweepResult> {
    if configs.is_empty() {
        return Err(invalid("empty sweep grid"));
    }
    if n_seeds == 0 {
        return Err(invalid("a sweep needs at least one seed"));
    }
    let rho_star = env.rho_star()?;
    let seeds: Vec<u64> = (0..n_seeds).map(|i| replicate_seed(master_seed, i)).collect();
    let opts = RunOptions {
        record: false,
        budget,
        rho_star: Some(rho_star),
    };
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|&(c, s)| run_lifelong_with(env, &configs[c], steps, s, &opts))
        .collect::<Result<Vec<_>>>()?;

    let results: Vec<ConfigResult> = configs
        .iter()
        .zip(traces.chunks(n_seeds))
        .map(|(cfg, runs)| {
            let regrets: Vec<f64> = runs.iter().map(|t| t.regret_per_step).collect();
            let (mean, std) = mean_std(&regrets);
            ConfigResult {
                config: cfg.clone(),
                label: describe(cfg),
                regrets,
                mean,
                std,
                truncated: runs.iter().any(|t| t.truncated),
            }
        })
        .collect();

    let mut best: Vec<(Algorithm, usize)> = Vec::new();
    for (i, r) in results.iter().enumerate() {
        let alg = r.config.algorithm;
        match best.iter_mut().find(|(a, _)| *a == alg) {
            Some(slot) => {
                if r.mean < results[slot.1].mean {
                    slot.1 = i;
                }
            }
            None => best.push((alg, i)),
        }
    }
    Ok(SweepResult {
        env_id: env.id(),
        rho_star,
        steps,
        master_seed,
        seeds,
        configs: results,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::make_goal_grid;

    #[test]
    fn grid_sizes() {
        let g = SweepGrid::default();
        let count = |a| g.clone().only(&[a]).expand().len();
        assert_eq!(count(Algorithm::RhoOnPolicy), 3);
        assert_eq!(count(Algorithm::RhoOffPolicy), 9);
        assert_eq!(count(Algorithm::QOnPolicy), 18);
        assert_eq!(count(Algorithm::DynaQ), 18);
        assert!(g.expand().iter().all(|c| c.validate().is_ok()));
    }

    #[test]
    fn single_config_is_best_and_empty_is_rejected() {
        let env = make_goal_grid(3, 0, 1e-6).unwrap();
        assert!(sweep(&env, &[], 2, 100, 0, None).is_err());
        let cfg = AgentConfig::new(Algorithm::QOffPolicy);
        let r = sweep(&env, &[cfg.clone()], 3, 200, 7, None).unwrap();
        assert_eq!(r.best, vec![(Algorithm::QOffPolicy, 0)]);
        assert_eq!(r.n_seeds(), 3);
        assert_eq!(r.configs[0].regrets.len(), 3);
        assert_eq!(sweep(&env, &[cfg], 3, 200, 7, None).unwrap(), r);
    }

    #[test]
    fn dominating_config_wins() {
        // ε = 1 wanders uniformly; a tuned learner earns strictly more per seed
        let env = make_goal_grid(3, 2, 1e-6).unwrap();
        let mut bad = AgentConfig::new(Algorithm::RhoOffPolicy);
        bad.epsilon = 1.0;
        let mut good = bad.clone();
        good.epsilon = 0.2;
        let r = sweep(&env, &[bad, good], 3, 3000, 1, None).unwrap();
        assert!(r.configs[1]
            .regrets
            .iter()
            .zip(&r.configs[0].regrets)
            .all(|(g, b)| g < b));
        assert_eq!(r.best, vec![(Algorithm::RhoOffPolicy, 1)]);
    }

    #[test]
    fn sample_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }
}
