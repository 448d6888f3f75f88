use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::DenseLu;
use crate::mdp::{steady_state, MarkovChain, TabularMdp};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiameterReport {
    /// `hitting[s0][s1] = E[t_hit(s1 | s0)]`, zero on the diagonal.
    pub hitting: Vec<Vec<f64>>,
    pub policy_diameter: f64,
    pub graph_diameter: usize,
    pub min_diameter: Option<f64>,
}

/// Expected hitting times for every ordered pair, one linear solve per
/// target: `m(s0) = 1 + Σ_{s'≠s1} P(s'|s0) m(s')`, `m(s1) = 0`.
pub fn expected_hitting_times(chain: &MarkovChain) -> Result<Vec<Vec<f64>>> {
    let n = chain.n_states();
    let p = chain.to_matrix();
    let mut hit = vec![vec![0.0; n]; n];
    if n == 1 {
        return Ok(hit);
    }
    for target in 0..n {
        let others: Vec<usize> = (0..n).filter(|&i| i != target).collect();
        let m = DMatrix::from_fn(n - 1, n - 1, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - p[(others[i], others[j])]
        });
        let x = DenseLu::new(m)?.solve(&vec![1.0; n - 1])?;
        for (k, &s) in others.iter().enumerate() {
            hit[s][target] = x[k];
        }
    }
    Ok(hit)
}

/// Hitting times from the fundamental matrix `Z = (I − P + 1μᵀ)^{-1}`:
/// `E[t_hit(j|i)] = (Z_jj − Z_ij) / μ_j`. One factorisation for all pairs.
pub fn hitting_times_fundamental(chain: &MarkovChain) -> Result<Vec<Vec<f64>>> {
    let n = chain.n_states();
    let mu = steady_state(chain)?.mu;
    let p = chain.to_matrix();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - p[(i, j)] + mu[j]
    });
    let z = DenseLu::new(a)?.inverse()?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { (z[(j, j)] - z[(i, j)]) / mu[j] })
                .collect()
        })
        .collect())
}

/// Expected first return times `E[min{t ≥ 1 : s_t = s} | s_0 = s]`.
pub fn first_return_times(chain: &MarkovChain) -> Result<Vec<f64>> {
    let hit = expected_hitting_times(chain)?;
    let n = chain.n_states();
    Ok((0..n)
        .map(|s| {
            1.0 + (0..n)
                .map(|j| chain.prob(s, j) * hit[j][s])
                .sum::<f64>()
        })
        .collect())
}

/// Longest shortest path on the undirected support graph
/// `{(s, s') : P(s'|s) + P(s|s') > 0}`. `None` if the graph is disconnected.
pub fn graph_diameter(chain: &MarkovChain) -> Option<usize> {
    let n = chain.n_states();
    if n == 1 {
        return Some(0);
    }
    if chain.smoothing() > 0.0 {
        return Some(1);
    }
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &(j, p) in chain.base_row(i) {
            if p > 0.0 && i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut diameter = 0;
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for src in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let far = *dist.iter().max().unwrap_or(&0);
        if far == usize::MAX {
            return None;
        }
        diameter = diameter.max(far);
    }
    Some(diameter)
}

/// `D^π` together with the graph diameter of the chain's support.
pub fn policy_diameter(chain: &MarkovChain) -> Result<DiameterReport> {
    let hitting = expected_hitting_times(chain)?;
    let policy_diameter = hitting
        .iter()
        .flat_map(|r| r.iter())
        .copied()
        .fold(0.0, f64::max);
    let graph_diameter = graph_diameter(chain).ok_or_else(|| {
        Error::DegenerateRegion("support graph is disconnected".into())
    })?;
    Ok(DiameterReport {
        hitting,
        policy_diameter,
        graph_diameter,
        min_diameter: None,
    })
}

/// Iteration budget for the per-target shortest-path value iteration.
pub const MIN_DIAMETER_MAX_ITER: usize = 1_000_000;

/// `D^*`: for each target, the minimum expected hitting time over policies
/// by value iteration on `V(s) = 1 + min_a Σ T(s'|s,a) V(s')`, `V(target) = 0`;
/// then the maximum over all ordered pairs.
pub fn min_diameter(mdp: &TabularMdp) -> Result<f64> {
    let n = mdp.n_states();
    let m = mdp.n_actions();
    let mut diameter: f64 = 0.0;
    let mut v = vec![0.0; n];
    for target in 0..n {
        v.iter_mut().for_each(|x| *x = 0.0);
        let mut iterations = 0;
        loop {
            // Gauss-Seidel sweep; v_sum is kept current for the smoothing term
            let mut v_sum: f64 = v.iter().sum();
            let mut delta: f64 = 0.0;
            for s in 0..n {
                if s == target {
                    continue;
                }
                let best = (0..m)
                    .map(|a| mdp.expect(s, a, &v, v_sum))
                    .fold(f64::INFINITY, f64::min);
                let new = 1.0 + best;
                delta = delta.max((new - v[s]).abs() / new.max(1.0));
                v_sum += new - v[s];
                v[s] = new;
            }
            iterations += 1;
            if delta < 1e-12 {
                break;
            }
            if iterations >= MIN_DIAMETER_MAX_ITER {
                return Err(Error::NoConvergence {
                    iterations,
                    span: delta,
                });
            }
        }
        diameter = diameter.max(v.iter().copied().fold(0.0, f64::max));
    }
    Ok(diameter)
}
