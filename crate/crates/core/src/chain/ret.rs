//! ε-return mixing times, exact (from the induced chain) and empirical
//! (two rollouts plus a reservoir of tracked start points).

use serde::Serialize;

use crate::envs::Environment;
use crate::mdp::{induce_chain, steady_state, PolicyTable, TabularMdp};
use crate::reservoir::Reservoir;
use crate::rng::seeded;
use crate::{invalid, Error, Result};

/// Tolerances either in reward units or relative to `ρ(π)`.
#[derive(Clone, Debug, PartialEq)]
pub enum EpsilonGrid {
    Absolute(Vec<f64>),
    Relative(Vec<f64>),
}

impl EpsilonGrid {
    /// Returns `(absolute, relative)` grids for a given reward rate.
    fn resolve(&self, rho: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (abs, rel): (Vec<f64>, Vec<f64>) = match self {
            EpsilonGrid::Absolute(e) => e.iter().map(|&e| (e, e / rho)).unzip(),
            EpsilonGrid::Relative(r) => {
                if !(rho > 0.0) {
                    return Err(invalid("relative tolerances need a positive reward rate"));
                }
                r.iter().map(|&r| (r * rho, r)).unzip()
            }
        };
        if abs.is_empty() {
            return Err(invalid("empty epsilon grid"));
        }
        if let Some(e) = abs.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(invalid(format!("epsilon must be positive and finite, got {e}")));
        }
        Ok((abs, rel))
    }
}

/// One tracked start point. `time` is the step at which tracking began
/// (0 for the exact analysis); `tret[k]` is `None` when the point never
/// settled within `epsilon_grid[k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StartPoint {
    pub state: usize,
    pub time: u64,
    pub tret: Vec<Option<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub epsilon_grid: Vec<f64>,
    pub relative_error_grid: Vec<f64>,
    pub per_state_tret: Vec<StartPoint>,
    /// Plain mean over qualifying start points.
    pub mean_tret: Vec<f64>,
    pub max_tret: Vec<u64>,
    /// Steady-state weighted mean (exact analysis only).
    pub mu_weighted_tret: Option<Vec<f64>>,
    pub rho_estimate: f64,
    pub horizon_used: u64,
    pub n_start_states: usize,
    /// Start points without a qualifying horizon, per ε.
    pub excluded: Vec<usize>,
}

/// `ε`-return mixing times computed exactly from `(P^{t-1} r)(s)`.
///
/// A start state's time is one past the last `h ≤ horizon_cap` at which the
/// partial average `(1/h) Σ_{t=1..h} (P^{t-1} r)(s)` deviates from `ρ` by
/// more than `ε`. If the deviation persists at `horizon_cap` the clause is
/// unverifiable and an error is returned.
pub fn return_mixing_time_exact(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    eps: &EpsilonGrid,
    horizon_cap: usize,
) -> Result<MixingReport> {
    if horizon_cap == 0 {
        return Err(invalid("horizon cap must be positive"));
    }
    let chain = induce_chain(mdp, policy)?;
    let r = policy.expected_rewards(mdp);
    let mu = steady_state(&chain)?.mu;
    let rho: f64 = mu.iter().zip(&r).map(|(m, r)| m * r).sum();
    let (abs, rel) = eps.resolve(rho)?;
    let n = chain.n_states();
    let k = abs.len();

    let mut v = r.clone();
    let mut next = vec![0.0; n];
    let mut sums = vec![0.0; n];
    let mut last = vec![0usize; n * k];
    for h in 1..=horizon_cap {
        let inv_h = 1.0 / h as f64;
        for s in 0..n {
            sums[s] += v[s];
            let dev = (sums[s] * inv_h - rho).abs();
            for (j, e) in abs.iter().enumerate() {
                if dev > *e {
                    last[s * k + j] = h;
                }
            }
        }
        if h < horizon_cap {
            chain.right_mul_into(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
    }
    if last.iter().any(|&l| l == horizon_cap) {
        return Err(Error::ReturnClauseUnsatisfied {
            cap: horizon_cap,
            violating: horizon_cap,
        });
    }

    let per_state: Vec<StartPoint> = (0..n)
        .map(|s| StartPoint {
            state: s,
            time: 0,
            tret: (0..k).map(|j| Some(last[s * k + j] as u64 + 1)).collect(),
        })
        .collect();
    let mut report = summarize(abs, rel, per_state, rho, horizon_cap as u64)?;
    report.mu_weighted_tret = Some(
        (0..k)
            .map(|j| (0..n).map(|s| mu[s] * (last[s * k + j] + 1) as f64).sum())
            .collect(),
    );
    Ok(report)
}

fn summarize(
    abs: Vec<f64>,
    rel: Vec<f64>,
    points: Vec<StartPoint>,
    rho: f64,
    horizon: u64,
) -> Result<MixingReport> {
    let k = abs.len();
    let mut mean = vec![0.0; k];
    let mut max = vec![0u64; k];
    let mut excluded = vec![0usize; k];
    for j in 0..k {
        let times: Vec<u64> = points.iter().filter_map(|p| p.tret[j]).collect();
        excluded[j] = points.len() - times.len();
        if times.is_empty() {
            return Err(Error::NoQualifyingStarts {
                excluded: excluded[j],
            });
        }
        mean[j] = times.iter().map(|&t| t as f64).sum::<f64>() / times.len() as f64;
        max[j] = times.iter().copied().max().unwrap_or(0);
    }
    Ok(MixingReport {
        epsilon_grid: abs,
        relative_error_grid: rel,
        n_start_states: points.len(),
        per_state_tret: points,
        mean_tret: mean,
        max_tret: max,
        mu_weighted_tret: None,
        rho_estimate: rho,
        horizon_used: horizon,
        excluded,
    })
}

struct Tracked {
    state: usize,
    time: u64,
    count: u64,
    sum: f64,
    last_violation: Vec<u64>,
}

/// Empirical `ε`-return mixing time of `policy` acting in `env`.
///
/// The first rollout of `horizon` steps estimates `ρ`. The second keeps a
/// reservoir of at most `max_tracked` start points sampled uniformly over
/// time; each point accumulates the rewards that follow it and records the
/// last step at which its running average left the `ε` band. A point still
/// outside the band at the end of the rollout has no qualifying horizon and
/// is counted in `excluded`.
pub fn return_mixing_time_empirical(
    env: &mut dyn Environment,
    policy: &PolicyTable,
    eps: &EpsilonGrid,
    max_tracked: usize,
    horizon: u64,
    seed: u64,
) -> Result<MixingReport> {
    if horizon == 0 || max_tracked == 0 {
        return Err(invalid("horizon and max_tracked must be positive"));
    }
    if policy.n_states() != env.n_states() {
        return Err(Error::Dimension {
            axis: "states",
            expected: env.n_states(),
            got: policy.n_states(),
        });
    }
    let mut rng = seeded(seed);

    let mut s = env.reset(&mut rng);
    let mut total = 0.0;
    for _ in 0..horizon {
        let a = policy.sample(s, &mut rng);
        let (next, r) = env.step(a, &mut rng)?;
        total += r;
        s = next;
    }
    let rho = total / horizon as f64;
    let (abs, rel) = eps.resolve(rho)?;
    let k = abs.len();

    let mut reservoir: Reservoir<Tracked> = Reservoir::new(max_tracked);
    let mut s = env.reset(&mut rng);
    for t in 0..horizon {
        let point = Tracked {
            state: s,
            time: t,
            count: 0,
            sum: 0.0,
            last_violation: vec![0; k],
        };
        reservoir.offer(point, &mut rng);
        let a = policy.sample(s, &mut rng);
        let (next, r) = env.step(a, &mut rng)?;
        for p in reservoir.items_mut() {
            p.count += 1;
            p.sum += r;
            let dev = (p.sum / p.count as f64 - rho).abs();
            for (j, e) in abs.iter().enumerate() {
                if dev > *e {
                    p.last_violation[j] = p.count;
                }
            }
        }
        s = next;
    }

    let points = reservoir
        .into_items()
        .into_iter()
        .map(|p| StartPoint {
            state: p.state,
            time: p.time,
            tret: p
                .last_violation
                .iter()
                .map(|&l| (l < p.count).then_some(l + 1))
                .collect(),
        })
        .collect();
    summarize(abs, rel, points, rho, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::TabularSim;

    fn alternator() -> TabularMdp {
        TabularMdp::from_dense(
            &[vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
            &[vec![0.0], vec![1.0]],
            Some(1.0),
        )
        .unwrap()
    }

    // partial averages straight from the definition
    fn brute_tret(mdp: &TabularMdp, policy: &PolicyTable, eps: f64, cap: usize) -> Vec<usize> {
        let chain = induce_chain(mdp, policy).unwrap();
        let p = chain.dense();
        let r = policy.expected_rewards(mdp);
        let mu = steady_state(&chain).unwrap().mu;
        let rho: f64 = mu.iter().zip(&r).map(|(a, b)| a * b).sum();
        let n = r.len();
        (0..n)
            .map(|s0| {
                let mut dist = vec![0.0; n];
                dist[s0] = 1.0;
                let mut sum = 0.0;
                let mut last = 0;
                for h in 1..=cap {
                    sum += dist.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
                    if (sum / h as f64 - rho).abs() > eps {
                        last = h;
                    }
                    let mut nd = vec![0.0; n];
                    for i in 0..n {
                        for j in 0..n {
                            nd[j] += dist[i] * p[i][j];
                        }
                    }
                    dist = nd;
                }
                last + 1
            })
            .collect()
    }

    #[test]
    fn alternator_from_reward_state() {
        let mdp = alternator();
        let pi = PolicyTable::uniform(2, 1);
        let rep =
            return_mixing_time_exact(&mdp, &pi, &EpsilonGrid::Absolute(vec![0.2]), 1000).unwrap();
        // averages from state 1: 1, 1/2, 2/3, 1/2, 3/5, ...
        assert_eq!(rep.per_state_tret[1].tret[0], Some(2));
        // from state 0: 0, 1/2, 1/3, 1/2, 2/5, ...
        assert_eq!(rep.per_state_tret[0].tret[0], Some(2));
        assert_eq!(rep.max_tret[0], 2);
        assert!((rep.rho_estimate - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_reward_and_wide_band_give_one() {
        let mdp = TabularMdp::from_dense(
            &[vec![vec![0.2, 0.8]], vec![vec![0.6, 0.4]]],
            &[vec![1.0], vec![1.0]],
            None,
        )
        .unwrap();
        let pi = PolicyTable::uniform(2, 1);
        let rep = return_mixing_time_exact(&mdp, &pi, &EpsilonGrid::Absolute(vec![1e-3, 0.5]), 50)
            .unwrap();
        assert!(rep.max_tret.iter().all(|&t| t == 1));
        let rep = return_mixing_time_exact(&alternator(), &pi, &EpsilonGrid::Absolute(vec![1.0]), 50)
            .unwrap();
        assert_eq!(rep.max_tret, vec![1]);
    }

    #[test]
    fn matches_brute_force_and_is_monotone() {
        let mdp = TabularMdp::from_dense(
            &[
                vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.5, 0.0]],
                vec![vec![0.0, 0.2, 0.8], vec![0.3, 0.3, 0.4]],
                vec![vec![0.7, 0.0, 0.3], vec![0.2, 0.2, 0.6]],
            ],
            &[vec![0.0, 0.3], vec![1.0, 0.2], vec![0.5, 0.9]],
            Some(1.0),
        )
        .unwrap();
        let pi = PolicyTable::from_rows(&[vec![0.5, 0.5], vec![1.0, 0.0], vec![0.25, 0.75]]).unwrap();
        let grid = vec![0.005, 0.02, 0.1];
        let rep = return_mixing_time_exact(&mdp, &pi, &EpsilonGrid::Absolute(grid.clone()), 400)
            .unwrap();
        for (j, &e) in grid.iter().enumerate() {
            let oracle = brute_tret(&mdp, &pi, e, 400);
            for s in 0..3 {
                assert_eq!(rep.per_state_tret[s].tret[j], Some(oracle[s] as u64));
            }
        }
        for p in &rep.per_state_tret {
            assert!(p.tret.windows(2).all(|w| w[0] >= w[1]));
        }
        assert!(rep.mean_tret.iter().zip(&rep.max_tret).all(|(m, x)| *m <= *x as f64));
    }

    #[test]
    fn unsatisfied_clause_is_an_error() {
        // slow two-state chain: the average is still far from ρ at h = 5
        let mdp = TabularMdp::from_dense(
            &[vec![vec![0.999, 0.001]], vec![vec![0.001, 0.999]]],
            &[vec![0.0], vec![1.0]],
            None,
        )
        .unwrap();
        let pi = PolicyTable::uniform(2, 1);
        let err = return_mixing_time_exact(&mdp, &pi, &EpsilonGrid::Absolute(vec![0.05]), 5);
        assert!(matches!(err, Err(Error::ReturnClauseUnsatisfied { cap: 5, .. })));
    }

    #[test]
    fn empirical_constant_reward_is_one() {
        let mdp = TabularMdp::from_dense(
            &[vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]],
            &[vec![0.7], vec![0.7]],
            Some(1.0),
        )
        .unwrap();
        let mut env = TabularSim::new(mdp, 0);
        let pi = PolicyTable::uniform(2, 1);
        let rep = return_mixing_time_empirical(
            &mut env,
            &pi,
            &EpsilonGrid::Relative(vec![0.05]),
            20,
            2000,
            3,
        )
        .unwrap();
        assert_eq!(rep.max_tret, vec![1]);
        assert_eq!(rep.n_start_states, 20);
    }

    #[test]
    fn empirical_is_monotone_and_deterministic() {
        let mut env = TabularSim::new(alternator(), 0);
        let pi = PolicyTable::uniform(2, 1);
        let grid = EpsilonGrid::Relative(vec![0.05, 0.30]);
        let a = return_mixing_time_empirical(&mut env, &pi, &grid, 50, 20_000, 11).unwrap();
        let b = return_mixing_time_empirical(&mut env, &pi, &grid, 50, 20_000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.mean_tret[1] <= a.mean_tret[0]);
        for p in &a.per_state_tret {
            if let (Some(x), Some(y)) = (p.tret[0], p.tret[1]) {
                assert!(y <= x);
            }
        }
    }
}
