use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use super::{EnvInstance, EnvParams, Environment, Family};
use crate::mdp::TabularMdp;
use crate::rng::{seeded, SimRng};
use crate::{invalid, Error, Result};

pub const N_TASK_GRID_ACTIONS: usize = 6;

/// Largest task set accepted by [`make_task_grid`].
pub const MAX_TASKS: usize = 1000;

/// A `dim³` grid whose goal (the task) changes passively every `tau` steps.
///
/// Actions move ±1 along one axis (clipped at the walls). A step pays 1 when
/// it strictly reduces the L1 distance to the current goal; entering the
/// goal puts the agent back in the corner `(0, 0, 0)`, where every episode
/// starts. Goals are distinct non-corner cells drawn from the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskGrid {
    pub dim: usize,
    pub tau: usize,
    pub goals: Vec<usize>,
    pub seed: u64,
}

pub fn make_task_grid(dim: usize, n_tasks: usize, tau: usize, seed: u64) -> Result<TaskGrid> {
    if dim < 2 {
        return Err(invalid(format!("task grid needs dim >= 2, got {dim}")));
    }
    let cells = dim * dim * dim;
    if n_tasks == 0 || n_tasks > MAX_TASKS || n_tasks > cells - 1 {
        return Err(invalid(format!(
            "n_tasks must lie in [1, {}], got {n_tasks}",
            MAX_TASKS.min(cells - 1)
        )));
    }
    if tau == 0 {
        return Err(invalid("tau must be positive"));
    }
    let mut rng = seeded(seed);
    let goals = sample(&mut rng, cells - 1, n_tasks)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    Ok(TaskGrid {
        dim,
        tau,
        goals,
        seed,
    })
}

impl TaskGrid {
    pub fn n_cells(&self) -> usize {
        self.dim * self.dim * self.dim
    }

    pub fn n_tasks(&self) -> usize {
        self.goals.len()
    }

    pub fn coords(&self, cell: usize) -> [usize; 3] {
        let d = self.dim;
        [cell / (d * d), (cell / d) % d, cell % d]
    }

    fn l1(&self, a: usize, b: usize) -> usize {
        let (p, q) = (self.coords(a), self.coords(b));
        (0..3).map(|i| p[i].abs_diff(q[i])).sum()
    }

    /// Action `2k` decreases axis `k`, `2k + 1` increases it.
    pub fn move_cell(&self, cell: usize, action: usize) -> usize {
        let mut p = self.coords(cell);
        let axis = action / 2;
        if action % 2 == 0 {
            p[axis] = p[axis].saturating_sub(1);
        } else if p[axis] + 1 < self.dim {
            p[axis] += 1;
        }
        (p[0] * self.dim + p[1]) * self.dim + p[2]
    }

    /// One step from `pos` toward `goal`: `(next cell, reward)`.
    pub fn step_cell(&self, pos: usize, action: usize, goal: usize) -> (usize, f64) {
        let moved = self.move_cell(pos, action);
        let reward = if self.l1(moved, goal) < self.l1(pos, goal) { 1.0 } else { 0.0 };
        (if moved == goal { 0 } else { moved }, reward)
    }

    /// Observation id `goal * cells + pos` used by [`TaskGridSim`].
    pub fn observation(&self, pos: usize, goal: usize) -> usize {
        goal * self.n_cells() + pos
    }

    pub fn feature_dim(&self) -> usize {
        6 * self.dim
    }

    /// Six concatenated one-hot blocks: position x, y, z then goal x, y, z.
    pub fn features_into(&self, obs: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let (goal, pos) = (obs / self.n_cells(), obs % self.n_cells());
        for (k, c) in self.coords(pos).into_iter().chain(self.coords(goal)).enumerate() {
            out[k * self.dim + c] = 1.0;
        }
    }

    pub fn features(&self, obs: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.feature_dim()];
        self.features_into(obs, &mut out);
        out
    }

    /// Simulator with random task progressions (no immediate repeats).
    pub fn simulator(&self) -> TaskGridSim {
        TaskGridSim {
            grid: Arc::new(self.clone()),
            pos: 0,
            task: 0,
            phase: 0,
        }
    }

    /// Tabular view with state `(task, phase, cell)` and a cyclic task order.
    pub fn tabular(&self, eps_smooth: f64) -> Result<EnvInstance> {
        let cells = self.n_cells();
        let (z, tau) = (self.n_tasks(), self.tau);
        let n = z * tau * cells;
        if n > 2_000_000 {
            return Err(invalid(format!("tabular task grid with {n} states is too large")));
        }
        let index = |k: usize, t: usize, c: usize| (k * tau + t) * cells + c;
        let mut rows = Vec::with_capacity(n * N_TASK_GRID_ACTIONS);
        let mut rewards = Vec::with_capacity(n * N_TASK_GRID_ACTIONS);
        let mut task_of_state = Vec::with_capacity(n);
        for k in 0..z {
            for t in 0..tau {
                for c in 0..cells {
                    task_of_state.push(k);
                    for a in 0..N_TASK_GRID_ACTIONS {
                        let (next, r) = self.step_cell(c, a, self.goals[k]);
                        let (k2, t2) = if t + 1 == tau { ((k + 1) % z, 0) } else { (k, t + 1) };
                        rows.push(vec![(index(k2, t2, next), 1.0)]);
                        rewards.push(r);
                    }
                }
            }
        }
        let mdp = TabularMdp::new(n, N_TASK_GRID_ACTIONS, rows, rewards, 1.0)?;
        let params = EnvParams {
            dim: Some(self.dim),
            n_tasks: Some(z),
            tau: Some(tau),
            smoothing: eps_smooth,
            ..EnvParams::default()
        };
        EnvInstance::assemble(
            Family::TaskGrid,
            params,
            self.seed,
            mdp,
            task_of_state,
            0,
            z,
            Some(tau),
        )
    }
}

/// Step-wise task grid. Observations are `goal * cells + pos`; the task
/// index is drawn uniformly at reset and at each switch (never repeating
/// the current task when there is a choice).
#[derive(Clone, Debug)]
pub struct TaskGridSim {
    grid: Arc<TaskGrid>,
    pos: usize,
    task: usize,
    phase: usize,
}

impl TaskGridSim {
    pub fn grid(&self) -> &TaskGrid {
        &self.grid
    }

    pub fn goal(&self) -> usize {
        self.grid.goals[self.task]
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    fn obs(&self) -> usize {
        self.grid.observation(self.pos, self.goal())
    }
}

impl Environment for TaskGridSim {
    fn n_states(&self) -> usize {
        self.grid.n_cells() * self.grid.n_cells()
    }

    fn n_actions(&self) -> usize {
        N_TASK_GRID_ACTIONS
    }

    fn reset(&mut self, rng: &mut SimRng) -> usize {
        self.pos = 0;
        self.phase = 0;
        self.task = rng.random_range(0..self.grid.n_tasks());
        self.obs()
    }

    fn step(&mut self, action: usize, rng: &mut SimRng) -> Result<(usize, f64)> {
        if action >= N_TASK_GRID_ACTIONS {
            return Err(Error::Dimension {
                axis: "action",
                expected: N_TASK_GRID_ACTIONS,
                got: action,
            });
        }
        let (next, r) = self.grid.step_cell(self.pos, action, self.goal());
        self.pos = next;
        self.phase += 1;
        if self.phase == self.grid.tau {
            self.phase = 0;
            let z = self.grid.n_tasks();
            if z > 1 {
                let k = rng.random_range(0..z - 1);
                self.task = if k >= self.task { k + 1 } else { k };
            }
        }
        Ok((self.obs(), r))
    }
}
