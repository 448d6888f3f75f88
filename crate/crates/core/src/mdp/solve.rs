//! Exact steady-state, average-reward, bias and optimal-gain solvers.

use nalgebra::DMatrix;

use super::{induce_chain, MarkovChain, PolicyTable, StationaryDistribution, TabularMdp};
use super::DifferentialValue;
use crate::linalg::{DenseLu, DENSE_LIMIT};
use crate::{Error, Result};

/// Numerical tolerances shared by the exact solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Row-sum tolerance for stochastic arrays.
    pub stochastic: f64,
    /// Maximum accepted `‖μP − μ‖_∞`.
    pub steady_state: f64,
    /// Maximum accepted per-state residual of the bias equation.
    pub bias: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stochastic: 1e-12,
            steady_state: 1e-10,
            bias: 1e-8,
        }
    }
}

/// Steady state with the default tolerance (`1e-10`).
pub fn steady_state(chain: &MarkovChain) -> Result<StationaryDistribution> {
    steady_state_with(chain, Tolerances::default().steady_state)
}

/// Solve `μP = μ`, `Σμ = 1` directly: the system `(Pᵀ − I) μ = 0` with its
/// last equation replaced by the normalisation row.
pub fn steady_state_with(chain: &MarkovChain, tolerance: f64) -> Result<StationaryDistribution> {
    let n = chain.n_states();
    if n == 1 {
        return Ok(StationaryDistribution {
            mu: vec![1.0],
            residual: 0.0,
        });
    }
    match contraction(chain) {
        Some(theta) => steady_state_iterative(chain, theta, tolerance),
        None => steady_state_dense(chain, tolerance),
    }
}

fn steady_state_dense(chain: &MarkovChain, tolerance: f64) -> Result<StationaryDistribution> {
    let n = chain.n_states();
    let mut a = chain.to_matrix().transpose();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let lu = DenseLu::new(a)?;
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut mu = lu.solve(&rhs)?;

    // Round-off can leave tiny negative entries; anything larger means the
    // chain violated the unichain assumption.
    let most_negative = mu.iter().copied().fold(0.0, f64::min);
    if most_negative < -tolerance.max(1e-12) {
        return Err(Error::Singular {
            condition: lu.condition,
        });
    }
    mu.iter_mut().for_each(|m| *m = m.max(0.0));
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= total);

    let image = chain.left_mul(&mu);
    let residual = crate::linalg::inf_norm_diff(&image, &mu);
    if !(residual <= tolerance) {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    Ok(StationaryDistribution { mu, residual })
}

/// Chains at least this large with a smoothing floor are solved iteratively.
pub const ITERATIVE_MIN: usize = 1024;

/// The smoothed kernel is `(1 − θ) P_base + θ 1 uᵀ` with `u` uniform, so
/// both the power iteration for `μ` and the Neumann series for `h` contract
/// by `1 − θ` per sweep. Returns `θ` when that route is cheap enough.
fn contraction(chain: &MarkovChain) -> Option<f64> {
    let n = chain.n_states();
    let eps = chain.smoothing();
    if n < ITERATIVE_MIN || !(eps > 0.0) {
        return None;
    }
    let theta = n as f64 * eps / (1.0 + n as f64 * eps);
    let sweeps = 40.0 / theta;
    let nnz: usize = (0..n).map(|i| chain.base_row(i).len()).sum();
    (sweeps * (nnz + n) as f64 <= 4e9).then_some(theta)
}

fn steady_state_iterative(
    chain: &MarkovChain,
    theta: f64,
    tolerance: f64,
) -> Result<StationaryDistribution> {
    let n = chain.n_states();
    let mut mu = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let max_sweeps = (40.0 / theta).ceil() as usize;
    for _ in 0..max_sweeps {
        chain.left_mul_into(&mu, &mut next);
        let step: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut mu, &mut next);
        // ‖μ_k − μ‖₁ ≤ ‖μ_{k+1} − μ_k‖₁ / θ
        if step / theta <= 1e-3 * tolerance {
            break;
        }
    }
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= total);
    let image = chain.left_mul(&mu);
    let residual = crate::linalg::inf_norm_diff(&image, &mu);
    if !(residual <= tolerance) {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    Ok(StationaryDistribution { mu, residual })
}

/// `ρ(π) = Σ_s μ^π(s) Σ_a π(a|s) R(s,a)`.
pub fn average_reward(mdp: &TabularMdp, policy: &PolicyTable) -> Result<f64> {
    let chain = induce_chain(mdp, policy)?;
    let mu = steady_state(&chain)?;
    let r = policy.expected_rewards(mdp);
    Ok(mu.mu.iter().zip(&r).map(|(m, r)| m * r).sum())
}

/// Solve the Poisson equation `h = r^π − ρ + P h` with `Σ μ h = 0`.
///
/// `ρ` is obtained from the bias equation itself (reference state pinned to
/// zero, then shifted), independently of the `μ`-weighted route in
/// [`average_reward`].
pub fn differential_value(mdp: &TabularMdp, policy: &PolicyTable) -> Result<DifferentialValue> {
    let chain = induce_chain(mdp, policy)?;
    let r = policy.expected_rewards(mdp);
    let mu = steady_state(&chain)?;
    poisson_solve(&chain, &r, &mu.mu, Tolerances::default().bias)
}

pub(crate) fn poisson_solve(
    chain: &MarkovChain,
    r: &[f64],
    mu: &[f64],
    tolerance: f64,
) -> Result<DifferentialValue> {
    match contraction(chain) {
        Some(theta) => poisson_iterative(chain, r, mu, theta, tolerance),
        None => poisson_dense(chain, r, mu, tolerance),
    }
}

fn poisson_dense(
    chain: &MarkovChain,
    r: &[f64],
    mu: &[f64],
    tolerance: f64,
) -> Result<DifferentialValue> {
    let n = chain.n_states();
    // Unknowns: h(1..n) with h(0) = 0 replaced by ρ in column 0.
    let p = chain.to_matrix();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 1..n {
            a[(i, j)] = if i == j { 1.0 } else { 0.0 } - p[(i, j)];
        }
        a[(i, 0)] = 1.0;
    }
    let x = DenseLu::new(a)?.solve(r)?;
    let rho = x[0];
    let mut h = x;
    h[0] = 0.0;
    let shift: f64 = mu.iter().zip(&h).map(|(m, v)| m * v).sum();
    h.iter_mut().for_each(|v| *v -= shift);

    let ph = chain.right_mul(&h);
    let scale = 1.0 + h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = (0..n)
        .map(|s| (h[s] - (r[s] - rho + ph[s])).abs())
        .fold(0.0, f64::max);
    let centre: f64 = mu.iter().zip(&h).map(|(m, v)| m * v).sum::<f64>().abs();
    let worst = residual.max(centre);
    if !(worst <= tolerance * scale) {
        return Err(Error::Residual {
            residual: worst,
            tolerance,
        });
    }
    Ok(DifferentialValue { rho, bias: h })
}

/// `h = Σ_k (1 − θ)^k P_baseᵏ (r − ρ)`, which satisfies the Poisson
/// equation with `uᵀh = 0`; it is then recentred so that `μᵀh = 0`.
fn poisson_iterative(
    chain: &MarkovChain,
    r: &[f64],
    mu: &[f64],
    theta: f64,
    tolerance: f64,
) -> Result<DifferentialValue> {
    let n = chain.n_states();
    let rho: f64 = mu.iter().zip(r).map(|(m, v)| m * v).sum();
    let keep = 1.0 - theta;
    let mut h: Vec<f64> = r.iter().map(|v| v - rho).collect();
    let mut next = vec![0.0; n];
    let max_sweeps = (40.0 / theta).ceil() as usize;
    for _ in 0..max_sweeps {
        let mut step = 0.0f64;
        for i in 0..n {
            let ph: f64 = chain.base_row(i).iter().map(|&(j, p)| p * h[j]).sum();
            next[i] = r[i] - rho + keep * ph;
            step = step.max((next[i] - h[i]).abs());
        }
        std::mem::swap(&mut h, &mut next);
        let scale = 1.0 + h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step / theta <= 1e-3 * tolerance * scale {
            break;
        }
    }
    let shift: f64 = mu.iter().zip(&h).map(|(m, v)| m * v).sum();
    h.iter_mut().for_each(|v| *v -= shift);

    let ph = chain.right_mul(&h);
    let scale = 1.0 + h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = (0..n)
        .map(|s| (h[s] - (r[s] - rho + ph[s])).abs())
        .fold(0.0, f64::max);
    if !(residual <= tolerance * scale) {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    Ok(DifferentialValue { rho, bias: h })
}

/// Relative value iteration settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RviConfig {
    /// Stop once `span(Tv − v)` drops below this.
    pub span_tol: f64,
    pub reference: usize,
    pub max_iter: usize,
    /// Self-loop weight of the aperiodicity transform `τP + (1 − τ)I`.
    pub aperiodicity: f64,
}

impl Default for RviConfig {
    fn default() -> Self {
        Self {
            span_tol: 1e-9,
            reference: 0,
            max_iter: 1_000_000,
            aperiodicity: 0.5,
        }
    }
}

/// Optimal gain together with a deterministic optimal policy.
#[derive(Clone, Debug)]
pub struct OptimalPolicy {
    pub rho: f64,
    pub policy: PolicyTable,
    pub bias: Vec<f64>,
    pub iterations: usize,
}

fn q_value(mdp: &TabularMdp, s: usize, a: usize, v: &[f64], v_sum: f64) -> f64 {
    mdp.reward(s, a) + mdp.expect(s, a, v, v_sum)
}

fn greedy_policy(mdp: &TabularMdp, v: &[f64]) -> Vec<usize> {
    let v_sum: f64 = v.iter().sum();
    (0..mdp.n_states())
        .map(|s| {
            let mut best = 0;
            let mut best_q = f64::NEG_INFINITY;
            for a in 0..mdp.n_actions() {
                let q = q_value(mdp, s, a, v, v_sum);
                if q > best_q + 1e-12 * (1.0 + best_q.abs()) {
                    best = a;
                    best_q = q;
                }
            }
            best
        })
        .collect()
}

/// Relative value iteration on the aperiodicity-transformed MDP.
///
/// Returns the midpoint of the final `[min, max]` bracket of `Tv − v` as the
/// gain estimate. Fails with the achieved span if the budget runs out.
pub fn relative_value_iteration(mdp: &TabularMdp, cfg: &RviConfig) -> Result<OptimalPolicy> {
    let n = mdp.n_states();
    if cfg.reference >= n {
        return Err(Error::Dimension {
            axis: "reference state",
            expected: n,
            got: cfg.reference,
        });
    }
    let tau = cfg.aperiodicity;
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut span = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let v_sum: f64 = v.iter().sum();
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            for a in 0..mdp.n_actions() {
                let q = mdp.reward(s, a) + tau * mdp.expect(s, a, &v, v_sum) + (1.0 - tau) * v[s];
                best = best.max(q);
            }
            w[s] = best;
        }
        let (lo, hi) = w
            .iter()
            .zip(&v)
            .map(|(a, b)| a - b)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
                (lo.min(d), hi.max(d))
            });
        span = hi - lo;
        let offset = w[cfg.reference];
        for s in 0..n {
            v[s] = w[s] - offset;
        }
        if span < cfg.span_tol {
            let actions = greedy_policy(mdp, &v);
            return Ok(OptimalPolicy {
                rho: 0.5 * (lo + hi),
                policy: PolicyTable::deterministic(&actions, mdp.n_actions())?,
                bias: v.iter().map(|x| x / tau).collect(),
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        span,
    })
}

/// Howard policy iteration with exact (dense) policy evaluation.
pub fn policy_iteration(
    mdp: &TabularMdp,
    initial: Option<&PolicyTable>,
    max_iter: usize,
) -> Result<OptimalPolicy> {
    let n = mdp.n_states();
    let m = mdp.n_actions();
    let mut actions: Vec<usize> = match initial {
        Some(p) => (0..n).map(|s| p.greedy_action(s)).collect(),
        None => vec![0; n],
    };
    for it in 1..=max_iter {
        let policy = PolicyTable::deterministic(&actions, m)?;
        let dv = differential_value(mdp, &policy)?;
        let h = &dv.bias;
        let h_sum: f64 = h.iter().sum();
        let mut changed = false;
        for s in 0..n {
            let current = q_value(mdp, s, actions[s], h, h_sum);
            let mut best = actions[s];
            let mut best_q = current;
            for a in 0..m {
                let q = q_value(mdp, s, a, h, h_sum);
                if q > best_q + 1e-10 * (1.0 + best_q.abs()) {
                    best = a;
                    best_q = q;
                }
            }
            if best != actions[s] {
                actions[s] = best;
                changed = true;
            }
        }
        if !changed {
            return Ok(OptimalPolicy {
                rho: dv.rho,
                policy,
                bias: dv.bias,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        span: f64::NAN,
    })
}

/// Optimal average reward `ρ*` and a deterministic optimal policy.
///
/// Desk-scale MDPs are solved by policy iteration warm-started from a short
/// relative-value-iteration run; the returned gain is the exact average
/// reward of the final policy. MDPs beyond the dense limit fall back to
/// plain relative value iteration.
pub fn optimal_average_reward(mdp: &TabularMdp) -> Result<(f64, PolicyTable)> {
    let opt = optimal_policy(mdp)?;
    Ok((opt.rho, opt.policy))
}

pub(crate) fn optimal_policy(mdp: &TabularMdp) -> Result<OptimalPolicy> {
    if mdp.n_states() > DENSE_LIMIT {
        return relative_value_iteration(mdp, &RviConfig::default());
    }
    let warm = RviConfig {
        max_iter: 2_000,
        ..RviConfig::default()
    };
    let start = match relative_value_iteration(mdp, &warm) {
        Ok(opt) => opt.policy,
        Err(_) => {
            // Take the greedy policy of whatever RVI reached.
            let v = truncated_rvi_values(mdp, warm.max_iter, warm.aperiodicity);
            PolicyTable::deterministic(&greedy_policy(mdp, &v), mdp.n_actions())?
        }
    };
    policy_iteration(mdp, Some(&start), 10_000)
}

fn truncated_rvi_values(mdp: &TabularMdp, iters: usize, tau: f64) -> Vec<f64> {
    let n = mdp.n_states();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for _ in 0..iters {
        let v_sum: f64 = v.iter().sum();
        for s in 0..n {
            w[s] = (0..mdp.n_actions())
                .map(|a| mdp.reward(s, a) + tau * mdp.expect(s, a, &v, v_sum) + (1.0 - tau) * v[s])
                .fold(f64::NEG_INFINITY, f64::max);
        }
        let offset = w[0];
        for s in 0..n {
            v[s] = w[s] - offset;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::smooth_ergodic;

    fn chain(p: &[Vec<f64>]) -> MarkovChain {
        MarkovChain::from_dense(p).unwrap()
    }

    #[test]
    fn iterative_path_matches_dense() {
        use rand::Rng;
        let n = ITERATIVE_MIN + 76;
        let mut rng = crate::rng::seeded(3);
        // a long deterministic cycle with a few random shortcuts: periodic
        // without the smoothing floor
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                if i % 7 == 0 {
                    vec![((i + 1) % n, 0.5), (rng.random_range(0..n), 0.5)]
                } else {
                    vec![((i + 1) % n, 1.0)]
                }
            })
            .collect();
        let c = MarkovChain::from_sparse(n, rows, 1e-5).unwrap();
        assert!(contraction(&c).is_some());
        let fast = steady_state(&c).unwrap();
        let slow = steady_state_dense(&c, 1e-10).unwrap();
        assert!(crate::linalg::inf_norm_diff(&fast.mu, &slow.mu) < 1e-12);

        let r: Vec<f64> = (0..n).map(|i| (i % 5) as f64 / 4.0).collect();
        let a = poisson_solve(&c, &r, &slow.mu, 1e-8).unwrap();
        let b = poisson_dense(&c, &r, &slow.mu, 1e-8).unwrap();
        assert!((a.rho - b.rho).abs() < 1e-12);
        assert!(crate::linalg::inf_norm_diff(&a.bias, &b.bias) < 1e-7);
    }

    #[test]
    fn symmetric_chain_is_uniform() {
        let mu = steady_state(&chain(&[vec![0.5, 0.5], vec![0.5, 0.5]])).unwrap();
        assert!((mu.mu[0] - 0.5).abs() < 1e-15 && (mu.mu[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_state_chain_matches_power_iteration() {
        let c = chain(&[vec![0.9, 0.1], vec![0.2, 0.8]]);
        // oracle: power iteration
        let mut x = vec![1.0, 0.0];
        for _ in 0..10_000 {
            x = c.left_mul(&x);
        }
        let mu = steady_state(&c).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((mu.mu[0] - x[0]).abs() < 1e-12);
        assert!((mu.mu[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(mu.residual <= 1e-10);
    }

    #[test]
    fn smoothed_three_cycle_is_uniform() {
        let cyc = TabularMdp::from_dense(
            &[
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
                vec![vec![1.0, 0.0, 0.0]],
            ],
            &[vec![0.0], vec![0.0], vec![0.0]],
            None,
        )
        .unwrap();
        let sm = smooth_ergodic(&cyc, 1e-6).unwrap();
        let c = induce_chain(&sm, &PolicyTable::uniform(3, 1)).unwrap();
        let mu = steady_state(&c).unwrap();
        for m in mu.mu {
            assert!((m - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reducible_chain_is_rejected() {
        // two absorbing states: no unique stationary vector
        let c = chain(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(steady_state(&c).is_err());
    }

    #[test]
    fn constant_rewards_have_zero_bias() {
        let mdp = TabularMdp::from_dense(
            &[vec![vec![0.9, 0.1]], vec![vec![0.2, 0.8]]],
            &[vec![1.0], vec![1.0]],
            None,
        )
        .unwrap();
        let pol = PolicyTable::uniform(2, 1);
        assert!((average_reward(&mdp, &pol).unwrap() - 1.0).abs() < 1e-12);
        let dv = differential_value(&mdp, &pol).unwrap();
        assert!((dv.rho - 1.0).abs() < 1e-12);
        assert!(dv.bias.iter().all(|h| h.abs() < 1e-12));
    }

    #[test]
    fn single_action_rvi_and_pi_agree() {
        let mdp = TabularMdp::from_dense(
            &[vec![vec![0.9, 0.1]], vec![vec![0.2, 0.8]]],
            &[vec![0.0], vec![1.0]],
            None,
        )
        .unwrap();
        let (rho, pol) = optimal_average_reward(&mdp).unwrap();
        assert!((rho - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(pol.row(0), &[1.0]);
        let rvi = relative_value_iteration(&mdp, &RviConfig::default()).unwrap();
        assert!((rvi.rho - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn rvi_reports_span_on_budget_exhaustion() {
        let mdp = TabularMdp::from_dense(
            &[vec![vec![0.99, 0.01]], vec![vec![0.01, 0.99]]],
            &[vec![0.0], vec![1.0]],
            None,
        )
        .unwrap();
        let cfg = RviConfig {
            max_iter: 3,
            ..RviConfig::default()
        };
        match relative_value_iteration(&mdp, &cfg) {
            Err(Error::NoConvergence { iterations, span }) => {
                assert_eq!(iterations, 3);
                assert!(span > 1e-9);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
