use rand::Rng;
use serde::{Deserialize, Serialize};

/// Count-based estimate `(T̂, R̂)` of a tabular MDP.
///
/// Unvisited pairs predict a uniform successor and the reward prior
/// (0 unless set with [`with_reward_prior`](Self::with_reward_prior)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEstimate {
    n_states: usize,
    n_actions: usize,
    /// Observed successors and their counts, per `(s, a)`.
    transition_counts: Vec<Vec<(usize, u64)>>,
    reward_sums: Vec<f64>,
    visit_counts: Vec<u64>,
    /// Visited pairs in first-visit order.
    visited: Vec<(usize, usize)>,
    reward_prior: f64,
}

impl ModelEstimate {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        let k = n_states * n_actions;
        Self {
            n_states,
            n_actions,
            transition_counts: vec![Vec::new(); k],
            reward_sums: vec![0.0; k],
            visit_counts: vec![0; k],
            visited: Vec::new(),
            reward_prior: 0.0,
        }
    }

    /// `R̂` reported for pairs that were never tried.
    pub fn with_reward_prior(self, reward_prior: f64) -> Self {
        Self {
            reward_prior,
            ..self
        }
    }

    pub fn reward_prior(&self) -> f64 {
        self.reward_prior
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn observe(&mut self, s: usize, a: usize, reward: f64, next: usize) {
        let k = s * self.n_actions + a;
        if self.visit_counts[k] == 0 {
            self.visited.push((s, a));
        }
        self.visit_counts[k] += 1;
        self.reward_sums[k] += reward;
        let row = &mut self.transition_counts[k];
        match row.iter_mut().find(|(j, _)| *j == next) {
            Some((_, c)) => *c += 1,
            None => row.push((next, 1)),
        }
    }

    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.visit_counts[s * self.n_actions + a]
    }

    pub fn count(&self, s: usize, a: usize, next: usize) -> u64 {
        self.transition_counts[s * self.n_actions + a]
            .iter()
            .find(|(j, _)| *j == next)
            .map_or(0, |&(_, c)| c)
    }

    pub fn visited_pairs(&self) -> &[(usize, usize)] {
        &self.visited
    }

    pub fn r_hat(&self, s: usize, a: usize) -> f64 {
        let k = s * self.n_actions + a;
        match self.visit_counts[k] {
            0 => self.reward_prior,
            v => self.reward_sums[k] / v as f64,
        }
    }

    pub fn t_hat(&self, s: usize, a: usize, next: usize) -> f64 {
        let v = self.visits(s, a);
        if v == 0 {
            1.0 / self.n_states as f64
        } else {
            self.count(s, a, next) as f64 / v as f64
        }
    }

    /// Dense `T̂(·|s, a)`.
    pub fn t_hat_row(&self, s: usize, a: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        self.t_hat_row_into(s, a, &mut out);
        out
    }

    pub fn t_hat_row_into(&self, s: usize, a: usize, out: &mut [f64]) {
        let k = s * self.n_actions + a;
        let v = self.visit_counts[k];
        if v == 0 {
            out.iter_mut().for_each(|p| *p = 1.0 / self.n_states as f64);
            return;
        }
        out.iter_mut().for_each(|p| *p = 0.0);
        for &(j, c) in &self.transition_counts[k] {
            out[j] = c as f64 / v as f64;
        }
    }

    /// Draw a successor from `T̂(·|s, a)`.
    pub fn sample_next<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> usize {
        let k = s * self.n_actions + a;
        let v = self.visit_counts[k];
        if v == 0 {
            return rng.random_range(0..self.n_states);
        }
        let mut u = rng.random_range(0..v);
        for &(j, c) in &self.transition_counts[k] {
            if u < c {
                return j;
            }
            u -= c;
        }
        unreachable!("counts sum to visits")
    }
}
