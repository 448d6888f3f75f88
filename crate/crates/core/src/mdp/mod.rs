//! Finite MDPs, stationary policies and policy-induced Markov chains.
//!
//! Transition rows are stored sparsely together with a uniform smoothing
//! weight `eps`: the effective probability of `s -> s'` is
//! `(base(s, s') + eps) / (1 + n * eps)`. With `eps = 0` this is exactly
//! the base kernel; with `eps > 0` every entry is strictly positive, which
//! is how ergodicity is repaired (see [`smooth_ergodic`]). All matrix-vector
//! products exploit the structure, so phase-augmented environments with a
//! few thousand states stay cheap.

mod io;
mod solve;

pub use io::{read_mdp, read_mdp_file, write_mdp, write_mdp_file, MdpLayout};
pub use solve::{
    average_reward, differential_value, optimal_average_reward, policy_iteration,
    relative_value_iteration, steady_state, steady_state_with, OptimalPolicy, RviConfig,
    Tolerances, ITERATIVE_MIN,
};

use rand::Rng;

use crate::error::invalid;
use crate::{Error, Result};

/// Row-sum tolerance for every probability row.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Default smoothing constant used when an environment needs repair.
pub const DEFAULT_SMOOTHING: f64 = 1e-6;

pub(crate) type SparseRow = Vec<(usize, f64)>;

/// Sort, merge duplicates and drop explicit zeros; validates entries.
fn normalize_row(mut row: SparseRow, n: usize, what: &str) -> Result<SparseRow> {
    row.sort_by_key(|&(j, _)| j);
    let mut out: SparseRow = Vec::with_capacity(row.len());
    let mut sum = 0.0;
    for (j, p) in row {
        if j >= n {
            return Err(Error::Dimension {
                axis: "next state",
                expected: n,
                got: j,
            });
        }
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::NotStochastic(format!("{what}: entry {p} at column {j}")));
        }
        sum += p;
        if p == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some((k, q)) if *k == j => *q += p,
            _ => out.push((j, p)),
        }
    }
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::NotStochastic(format!("{what}: row sums to {sum}")));
    }
    Ok(out)
}

#[inline]
fn smoothing_coefficients(eps: f64, n: usize) -> (f64, f64) {
    let scale = 1.0 / (1.0 + n as f64 * eps);
    (scale, eps * scale)
}

/// Effective probability of column `j` in a smoothed sparse row.
#[inline]
fn row_prob(row: &[(usize, f64)], j: usize, eps: f64, n: usize) -> f64 {
    let (scale, floor) = smoothing_coefficients(eps, n);
    let base = row
        .binary_search_by_key(&j, |&(k, _)| k)
        .map(|i| row[i].1)
        .unwrap_or(0.0);
    base * scale + floor
}

/// `Σ_j p(j) v(j)` for a smoothed sparse row; `v_sum` is `Σ_j v(j)`.
#[inline]
fn row_expect(row: &[(usize, f64)], v: &[f64], v_sum: f64, eps: f64, n: usize) -> f64 {
    let base: f64 = row.iter().map(|&(j, p)| p * v[j]).sum();
    if eps == 0.0 {
        base
    } else {
        let (scale, floor) = smoothing_coefficients(eps, n);
        base * scale + floor * v_sum
    }
}

fn row_dense(row: &[(usize, f64)], eps: f64, n: usize) -> Vec<f64> {
    let (scale, floor) = smoothing_coefficients(eps, n);
    let mut out = vec![floor; n];
    for &(j, p) in row {
        out[j] += p * scale;
    }
    out
}

/// Compose two smoothing passes into one: smoothing by `e1` then `e2`
/// equals a single smoothing by `e1 + e2 + n e1 e2`.
fn compose_smoothing(e1: f64, e2: f64, n: usize) -> f64 {
    e1 + e2 + n as f64 * e1 * e2
}

/// Draw a column from a smoothed sparse row.
fn sample_row<R: Rng + ?Sized>(row: &[(usize, f64)], eps: f64, n: usize, rng: &mut R) -> usize {
    if eps > 0.0 {
        let jump = n as f64 * eps / (1.0 + n as f64 * eps);
        if rng.random::<f64>() < jump {
            return rng.random_range(0..n);
        }
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(j, p) in row {
        acc += p;
        if u < acc {
            return j;
        }
    }
    row.last().map(|&(j, _)| j).unwrap_or(0)
}

/// A finite MDP `⟨S, A, T, R⟩` with rewards bounded in `[0, r_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    /// Base transition rows indexed by `s * n_actions + a`.
    rows: Vec<SparseRow>,
    smoothing: f64,
    /// Expected reward table indexed by `s * n_actions + a`.
    rewards: Vec<f64>,
    r_max: f64,
}

impl TabularMdp {
    /// Build from sparse rows (`rows[s * n_actions + a]` lists `(s', p)`).
    pub fn new(
        n_states: usize,
        n_actions: usize,
        rows: Vec<SparseRow>,
        rewards: Vec<f64>,
        r_max: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(invalid("an MDP needs at least one state and one action"));
        }
        let pairs = n_states * n_actions;
        if rows.len() != pairs {
            return Err(Error::Dimension {
                axis: "transition rows",
                expected: pairs,
                got: rows.len(),
            });
        }
        if rewards.len() != pairs {
            return Err(Error::Dimension {
                axis: "reward entries",
                expected: pairs,
                got: rewards.len(),
            });
        }
        if !(r_max >= 0.0) || !r_max.is_finite() {
            return Err(invalid(format!("r_max must be finite and >= 0, got {r_max}")));
        }
        for (i, &r) in rewards.iter().enumerate() {
            if !(0.0..=r_max).contains(&r) {
                return Err(invalid(format!(
                    "reward {r} at (s={}, a={}) outside [0, {r_max}]",
                    i / n_actions,
                    i % n_actions
                )));
            }
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                normalize_row(
                    row,
                    n_states,
                    &format!("T[s={}][a={}]", i / n_actions, i % n_actions),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_states,
            n_actions,
            rows,
            smoothing: 0.0,
            rewards,
            r_max,
        })
    }

    /// Build from a dense tensor `t[s][a][s']` and reward table `r[s][a]`.
    /// `r_max` defaults to the largest reward.
    pub fn from_dense(t: &[Vec<Vec<f64>>], r: &[Vec<f64>], r_max: Option<f64>) -> Result<Self> {
        let n = t.len();
        let m = t.first().map(Vec::len).unwrap_or(0);
        if r.len() != n {
            return Err(Error::Dimension {
                axis: "reward states",
                expected: n,
                got: r.len(),
            });
        }
        let mut rows = Vec::with_capacity(n * m);
        let mut rewards = Vec::with_capacity(n * m);
        for (ts, rs) in t.iter().zip(r) {
            if ts.len() != m {
                return Err(Error::Dimension {
                    axis: "actions",
                    expected: m,
                    got: ts.len(),
                });
            }
            if rs.len() != m {
                return Err(Error::Dimension {
                    axis: "reward actions",
                    expected: m,
                    got: rs.len(),
                });
            }
            for row in ts {
                if row.len() != n {
                    return Err(Error::Dimension {
                        axis: "next states",
                        expected: n,
                        got: row.len(),
                    });
                }
                rows.push(row.iter().copied().enumerate().filter(|&(_, p)| p != 0.0).collect());
            }
            rewards.extend_from_slice(rs);
        }
        let r_max = r_max.unwrap_or_else(|| rewards.iter().copied().fold(0.0, f64::max));
        Self::new(n, m, rows, rewards, r_max)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Uniform smoothing weight currently applied (0 for the raw kernel).
    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.n_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Unsmoothed support of `T(·|s,a)`.
    #[inline]
    pub fn base_row(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.rows[s * self.n_actions + a]
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        row_prob(self.base_row(s, a), next, self.smoothing, self.n_states)
    }

    pub fn dense_row(&self, s: usize, a: usize) -> Vec<f64> {
        row_dense(self.base_row(s, a), self.smoothing, self.n_states)
    }

    /// `Σ_{s'} T(s'|s,a) v(s')`; `v_sum` must be `Σ v`.
    #[inline]
    pub fn expect(&self, s: usize, a: usize, v: &[f64], v_sum: f64) -> f64 {
        row_expect(self.base_row(s, a), v, v_sum, self.smoothing, self.n_states)
    }

    /// Probability of leaving `inside` in one step from `(s, a)`.
    pub fn exit_probability(&self, s: usize, a: usize, inside: &[bool]) -> f64 {
        let (scale, floor) = smoothing_coefficients(self.smoothing, self.n_states);
        let outside = inside.iter().filter(|&&b| !b).count() as f64;
        let base: f64 = self
            .base_row(s, a)
            .iter()
            .filter(|&&(j, _)| !inside[j])
            .map(|&(_, p)| p)
            .sum();
        base * scale + floor * outside
    }

    pub fn sample_next<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> usize {
        sample_row(self.base_row(s, a), self.smoothing, self.n_states, rng)
    }

    /// The same MDP with the smoothing removed.
    pub fn without_smoothing(&self) -> Self {
        Self {
            smoothing: 0.0,
            ..self.clone()
        }
    }

    /// The same dynamics with a different reward table.
    pub fn with_rewards(&self, rewards: Vec<f64>, r_max: f64) -> Result<Self> {
        let mut out = Self::new(
            self.n_states,
            self.n_actions,
            self.rows.clone(),
            rewards,
            r_max,
        )?;
        out.smoothing = self.smoothing;
        Ok(out)
    }

    /// Number of stored (unsmoothed) transition entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Add `eps_smooth` to every transition probability and renormalise:
/// `T'(s'|s,a) = (T(s'|s,a) + eps) / (1 + |S| eps)`.
///
/// Every entry of the result is strictly positive, so every stationary
/// policy induces an aperiodic unichain. Rewards are unchanged.
pub fn smooth_ergodic(mdp: &TabularMdp, eps_smooth: f64) -> Result<TabularMdp> {
    if !(eps_smooth > 0.0) || !eps_smooth.is_finite() {
        return Err(invalid(format!("eps_smooth must be > 0, got {eps_smooth}")));
    }
    let mut out = mdp.clone();
    out.smoothing = compose_smoothing(mdp.smoothing, eps_smooth, mdp.n_states);
    Ok(out)
}

/// A stationary policy `π(a|s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTable {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
    deterministic: bool,
}

impl PolicyTable {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(invalid("a policy needs at least one state and one action"));
        }
        if probs.len() != n_states * n_actions {
            return Err(Error::Dimension {
                axis: "policy entries",
                expected: n_states * n_actions,
                got: probs.len(),
            });
        }
        for (s, row) in probs.chunks(n_actions).enumerate() {
            let mut sum = 0.0;
            for &p in row {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::NotStochastic(format!("π[s={s}] has entry {p}")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("π[s={s}] sums to {sum}")));
            }
        }
        let deterministic = probs
            .chunks(n_actions)
            .all(|row| row.iter().filter(|&&p| p != 0.0).count() == 1);
        Ok(Self {
            n_states,
            n_actions,
            probs,
            deterministic,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_actions = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_actions) {
            return Err(Error::Dimension {
                axis: "actions",
                expected: n_actions,
                got: bad.len(),
            });
        }
        Self::new(rows.len(), n_actions, rows.concat())
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let p = 1.0 / n_actions as f64;
        Self {
            n_states,
            n_actions,
            probs: vec![p; n_states * n_actions],
            deterministic: n_actions == 1,
        }
    }

    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::Dimension {
                    axis: "action",
                    expected: n_actions,
                    got: a,
                });
            }
            probs[s * n_actions + a] = 1.0;
        }
        Self::new(actions.len(), n_actions, probs)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// True when every row is one-hot.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    /// Most probable action at `s` (lowest index on ties).
    pub fn greedy_action(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for a in 1..row.len() {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }

    /// `π_m(s, a, π)`: identical to `self` except deterministic `a` at `s`.
    pub fn with_action(&self, s: usize, a: usize) -> Self {
        let mut out = self.clone();
        out.set_action(s, a);
        out
    }

    /// In-place version of [`PolicyTable::with_action`].
    pub fn set_action(&mut self, s: usize, a: usize) {
        let m = self.n_actions;
        for (b, p) in self.probs[s * m..(s + 1) * m].iter_mut().enumerate() {
            *p = if b == a { 1.0 } else { 0.0 };
        }
        self.deterministic = self
            .probs
            .chunks(m)
            .all(|row| row.iter().filter(|&&p| p != 0.0).count() == 1);
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        let row = self.row(s);
        if self.deterministic {
            return row.iter().position(|&p| p != 0.0).unwrap_or(0);
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// Expected one-step reward `r^π(s) = Σ_a π(a|s) R(s,a)` for every state.
    pub fn expected_rewards(&self, mdp: &TabularMdp) -> Vec<f64> {
        (0..self.n_states)
            .map(|s| {
                self.row(s)
                    .iter()
                    .enumerate()
                    .map(|(a, &p)| p * mdp.reward(s, a))
                    .sum()
            })
            .collect()
    }
}

/// A row-stochastic kernel `P(s'|s)` stored as smoothed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    n_states: usize,
    rows: Vec<SparseRow>,
    smoothing: f64,
}

impl MarkovChain {
    pub fn from_dense(p: &[Vec<f64>]) -> Result<Self> {
        let n = p.len();
        let rows = p
            .iter()
            .map(|row| {
                if row.len() != n {
                    return Err(Error::Dimension {
                        axis: "chain columns",
                        expected: n,
                        got: row.len(),
                    });
                }
                Ok(row.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect())
            })
            .collect::<Result<Vec<SparseRow>>>()?;
        Self::from_sparse(n, rows, 0.0)
    }

    /// Build from sparse base rows with a uniform smoothing weight.
    pub fn from_sparse(n_states: usize, rows: Vec<SparseRow>, smoothing: f64) -> Result<Self> {
        if n_states == 0 {
            return Err(invalid("a chain needs at least one state"));
        }
        if rows.len() != n_states {
            return Err(Error::Dimension {
                axis: "chain rows",
                expected: n_states,
                got: rows.len(),
            });
        }
        if !(smoothing >= 0.0) || !smoothing.is_finite() {
            return Err(invalid(format!("smoothing must be >= 0, got {smoothing}")));
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| normalize_row(r, n_states, &format!("P[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_states,
            rows,
            smoothing,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn base_row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    #[inline]
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        row_prob(&self.rows[i], j, self.smoothing, self.n_states)
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        row_dense(&self.rows[i], self.smoothing, self.n_states)
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_states).map(|i| self.dense_row(i)).collect()
    }

    /// Row vector times kernel: `(x P)(j) = Σ_i x(i) P(j|i)`.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        self.left_mul_into(x, &mut out);
        out
    }

    pub fn left_mul_into(&self, x: &[f64], out: &mut [f64]) {
        let (scale, floor) = smoothing_coefficients(self.smoothing, self.n_states);
        let total: f64 = x.iter().sum();
        out.iter_mut().for_each(|o| *o = floor * total);
        for (i, row) in self.rows.iter().enumerate() {
            let xi = x[i] * scale;
            if xi == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += xi * p;
            }
        }
    }

    /// Kernel times column vector: `(P v)(i) = Σ_j P(j|i) v(j)`.
    pub fn right_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        self.right_mul_into(v, &mut out);
        out
    }

    pub fn right_mul_into(&self, v: &[f64], out: &mut [f64]) {
        let v_sum: f64 = v.iter().sum();
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row_expect(row, v, v_sum, self.smoothing, self.n_states);
        }
    }

    /// One-step probability of leaving the set marked by `inside`.
    pub fn exit_probability(&self, i: usize, inside: &[bool]) -> f64 {
        let (scale, floor) = smoothing_coefficients(self.smoothing, self.n_states);
        let outside = inside.iter().filter(|&&b| !b).count() as f64;
        let base: f64 = self.rows[i]
            .iter()
            .filter(|&&(j, _)| !inside[j])
            .map(|&(_, p)| p)
            .sum();
        base * scale + floor * outside
    }

    pub fn sample_next<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        sample_row(&self.rows[i], self.smoothing, self.n_states, rng)
    }

    /// Dense `n x n` matrix in nalgebra form.
    pub(crate) fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n_states;
        let (scale, floor) = smoothing_coefficients(self.smoothing, n);
        let mut m = nalgebra::DMatrix::from_element(n, n, floor);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] += p * scale;
            }
        }
        m
    }
}

/// `T^π(s'|s) = Σ_a π(a|s) T(s'|s,a)`.
pub fn induce_chain(mdp: &TabularMdp, policy: &PolicyTable) -> Result<MarkovChain> {
    if policy.n_states() != mdp.n_states() {
        return Err(Error::Dimension {
            axis: "states",
            expected: mdp.n_states(),
            got: policy.n_states(),
        });
    }
    if policy.n_actions() != mdp.n_actions() {
        return Err(Error::Dimension {
            axis: "actions",
            expected: mdp.n_actions(),
            got: policy.n_actions(),
        });
    }
    let n = mdp.n_states();
    let mut acc = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        for a in 0..mdp.n_actions() {
            let w = policy.prob(s, a);
            if w == 0.0 {
                continue;
            }
            for &(j, p) in mdp.base_row(s, a) {
                if acc[j] == 0.0 {
                    touched.push(j);
                }
                acc[j] += w * p;
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let row: SparseRow = touched.iter().map(|&j| (j, acc[j])).collect();
        for &j in &touched {
            acc[j] = 0.0;
        }
        touched.clear();
        rows.push(row);
    }
    // Rows are convex combinations of validated rows; skip re-validation.
    Ok(MarkovChain {
        n_states: n,
        rows,
        smoothing: mdp.smoothing,
    })
}

/// Steady-state probability vector with its balance residual.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDistribution {
    pub mu: Vec<f64>,
    /// `‖μP − μ‖_∞`.
    pub residual: f64,
}

/// Average reward `ρ` and bias `h` solving `h = r^π − ρ + P h`, `μ·h = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialValue {
    pub rho: f64,
    pub bias: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stay_swap() -> TabularMdp {
        // action 0 stays, action 1 swaps
        TabularMdp::from_dense(
            &[
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            ],
            &[vec![0.0, 0.0], vec![1.0, 1.0]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn one_state_chain_is_identity() {
        let mdp = TabularMdp::from_dense(&[vec![vec![1.0], vec![1.0]]], &[vec![0.5, 0.2]], None)
            .unwrap();
        let pol = PolicyTable::from_rows(&[vec![0.3, 0.7]]).unwrap();
        let chain = induce_chain(&mdp, &pol).unwrap();
        assert_eq!(chain.dense(), vec![vec![1.0]]);
    }

    #[test]
    fn uniform_stay_swap_is_half_half() {
        let chain = induce_chain(&stay_swap(), &PolicyTable::uniform(2, 2)).unwrap();
        assert_eq!(chain.dense(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn dimension_mismatch_names_axis() {
        let err = induce_chain(&stay_swap(), &PolicyTable::uniform(3, 2)).unwrap_err();
        assert!(matches!(err, Error::Dimension { axis: "states", .. }));
        let err = induce_chain(&stay_swap(), &PolicyTable::uniform(2, 3)).unwrap_err();
        assert!(matches!(err, Error::Dimension { axis: "actions", .. }));
    }

    #[test]
    fn rejects_bad_rows_and_rewards() {
        let bad = TabularMdp::from_dense(&[vec![vec![0.5, 0.4]], vec![vec![0.0, 1.0]]], &[vec![0.0], vec![0.0]], None);
        assert!(matches!(bad, Err(Error::NotStochastic(_))));
        let neg = TabularMdp::from_dense(&[vec![vec![1.0]]], &[vec![-1.0]], Some(1.0));
        assert!(matches!(neg, Err(Error::InvalidArgument(_))));
        let over = TabularMdp::from_dense(&[vec![vec![1.0]]], &[vec![2.0]], Some(1.0));
        assert!(over.is_err());
    }

    #[test]
    fn smoothing_two_cycle_floor() {
        let cycle = TabularMdp::from_dense(
            &[vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
            &[vec![0.0], vec![1.0]],
            None,
        )
        .unwrap();
        let sm = smooth_ergodic(&cycle, 0.01).unwrap();
        for s in 0..2 {
            let row = sm.dense_row(s, 0);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for &p in &row {
                assert!(p >= 0.01 / 1.02 - 1e-18);
            }
        }
        assert!((sm.prob(0, 0, 0) - 0.01 / 1.02).abs() < 1e-15);
        assert!((sm.prob(0, 0, 1) - 1.01 / 1.02).abs() < 1e-15);
        assert!(smooth_ergodic(&cycle, 0.0).is_err());
        assert!(smooth_ergodic(&cycle, -1.0).is_err());
    }

    #[test]
    fn repeated_smoothing_matches_formula() {
        let mdp = stay_swap();
        let once = smooth_ergodic(&mdp, 0.1).unwrap();
        let twice = smooth_ergodic(&once, 0.2).unwrap();
        for s in 0..2 {
            for a in 0..2 {
                for t in 0..2 {
                    let p1 = (mdp.prob(s, a, t) + 0.1) / 1.2;
                    let p2 = (p1 + 0.2) / 1.4;
                    assert!((twice.prob(s, a, t) - p2).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn left_and_right_products_match_dense() {
        let chain = induce_chain(
            &smooth_ergodic(&stay_swap(), 0.05).unwrap(),
            &PolicyTable::from_rows(&[vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap(),
        )
        .unwrap();
        let dense = chain.dense();
        let x = [0.3, 0.7];
        let left = chain.left_mul(&x);
        let right = chain.right_mul(&x);
        for j in 0..2 {
            let l: f64 = (0..2).map(|i| x[i] * dense[i][j]).sum();
            let r: f64 = (0..2).map(|k| dense[j][k] * x[k]).sum();
            assert!((left[j] - l).abs() < 1e-15);
            assert!((right[j] - r).abs() < 1e-15);
        }
    }

    #[test]
    fn policy_modification_is_one_hot() {
        let pol = PolicyTable::uniform(3, 2);
        assert!(!pol.is_deterministic());
        let m = pol.with_action(1, 1);
        assert_eq!(m.row(1), &[0.0, 1.0]);
        assert_eq!(m.row(0), pol.row(0));
        let det = PolicyTable::deterministic(&[0, 1, 1], 2).unwrap();
        assert!(det.is_deterministic());
        assert!(PolicyTable::deterministic(&[2], 2).is_err());
    }
}
