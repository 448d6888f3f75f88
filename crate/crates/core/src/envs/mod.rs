//! Scalable environment families.
//!
//! Every generator returns an [`EnvInstance`]: a tabular MDP, the region
//! structure used for diameter and bottleneck measurements, and the
//! parameters that reproduce it. Episodic resets and passive task switches
//! are encoded as transitions of the continuing MDP, so the average-reward
//! analysis in [`crate::mdp`] and [`crate::chain`] applies directly.

mod goal_grid;
mod rooms;
mod scaling;
mod task_grid;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use goal_grid::make_goal_grid;
pub use rooms::{make_cyclic_rooms_tau, make_passive_rooms, make_rooms, RoomKind};
pub use scaling::{scale, ScalingSpec};
pub use task_grid::{make_task_grid, TaskGrid, TaskGridSim, N_TASK_GRID_ACTIONS};

use crate::mdp::{optimal_average_reward, smooth_ergodic, PolicyTable, TabularMdp, DEFAULT_SMOOTHING};
use crate::rng::SimRng;
use crate::{invalid, Error, Result};

/// Step-wise simulator interface shared by tabular MDPs and the task grid.
pub trait Environment {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Start a fresh rollout and return the first observation.
    fn reset(&mut self, rng: &mut SimRng) -> usize;
    /// Apply `action`; returns `(next observation, reward)`.
    fn step(&mut self, action: usize, rng: &mut SimRng) -> Result<(usize, f64)>;
}

/// Samples a [`TabularMdp`] from a fixed start state.
#[derive(Clone, Debug)]
pub struct TabularSim {
    mdp: Arc<TabularMdp>,
    start: usize,
    state: usize,
}

impl TabularSim {
    pub fn new(mdp: impl Into<Arc<TabularMdp>>, start: usize) -> Self {
        Self {
            mdp: mdp.into(),
            start,
            state: start,
        }
    }

    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl Environment for TabularSim {
    fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    fn n_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    fn reset(&mut self, _rng: &mut SimRng) -> usize {
        self.state = self.start;
        self.state
    }

    fn step(&mut self, action: usize, rng: &mut SimRng) -> Result<(usize, f64)> {
        if action >= self.mdp.n_actions() {
            return Err(Error::Dimension {
                axis: "action",
                expected: self.mdp.n_actions(),
                got: action,
            });
        }
        let r = self.mdp.reward(self.state, action);
        self.state = self.mdp.sample_next(self.state, action, rng);
        Ok((self.state, r))
    }
}

/// Regions (rooms or tasks) of an environment and their boundaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionMap {
    pub regions: Vec<Vec<usize>>,
    /// States of each region with positive exit probability under some action
    /// of the unsmoothed kernel.
    pub boundaries: Vec<Vec<usize>>,
    pub task_of_state: Vec<usize>,
}

impl RegionMap {
    pub(crate) fn from_assignment(mdp: &TabularMdp, task_of_state: Vec<usize>) -> Self {
        let k = task_of_state.iter().copied().max().map_or(0, |m| m + 1);
        let mut regions = vec![Vec::new(); k];
        for (s, &z) in task_of_state.iter().enumerate() {
            regions[z].push(s);
        }
        let base = mdp.without_smoothing();
        let boundaries = regions
            .iter()
            .enumerate()
            .map(|(z, states)| {
                let inside: Vec<bool> = task_of_state.iter().map(|&t| t == z).collect();
                states
                    .iter()
                    .copied()
                    .filter(|&s| {
                        (0..base.n_actions()).any(|a| base.exit_probability(s, a, &inside) > 0.0)
                    })
                    .collect()
            })
            .collect();
        Self {
            regions,
            boundaries,
            task_of_state,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GoalGrid,
    Rooms,
    CyclicRoomsTau,
    PassiveRooms,
    TaskGrid,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::GoalGrid,
        Family::Rooms,
        Family::CyclicRoomsTau,
        Family::PassiveRooms,
        Family::TaskGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::GoalGrid => "goal_grid",
            Family::Rooms => "rooms",
            Family::CyclicRoomsTau => "cyclic_rooms_tau",
            Family::PassiveRooms => "passive_rooms",
            Family::TaskGrid => "task_grid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unknown family `{s}`")))
    }
}

/// Named construction parameters; unused ones stay `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvParams {
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n_rooms: Option<usize>,
    pub kind: Option<RoomKind>,
    pub c: Option<f64>,
    pub x: Option<f64>,
    pub tau: Option<usize>,
    pub n_tasks: Option<usize>,
    pub dim: Option<usize>,
    pub smoothing: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            d: None,
            n_rooms: None,
            kind: None,
            c: None,
            x: None,
            tau: None,
            n_tasks: None,
            dim: None,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

fn need<T: Copy>(v: Option<T>, name: &str, family: Family) -> Result<T> {
    v.ok_or_else(|| invalid(format!("family {family} needs parameter `{name}`")))
}

/// Build any family from its parameter record.
pub fn build(family: Family, params: &EnvParams, seed: u64) -> Result<EnvInstance> {
    let eps = params.smoothing;
    match family {
        Family::GoalGrid => make_goal_grid(need(params.d, "d", family)?, seed, eps),
        Family::Rooms => make_rooms(
            need(params.n_rooms, "N", family)?,
            need(params.d, "d", family)?,
            params.kind.unwrap_or(RoomKind::Cycle),
            seed,
            eps,
        ),
        Family::CyclicRoomsTau => make_cyclic_rooms_tau(
            need(params.n_rooms, "N", family)?,
            need(params.d, "d", family)?,
            need(params.c, "c", family)?,
            need(params.x, "x", family)?,
            seed,
            eps,
        ),
        Family::PassiveRooms => make_passive_rooms(
            need(params.n_rooms, "N", family)?,
            need(params.d, "d", family)?,
            need(params.tau, "tau", family)?,
            seed,
            eps,
        ),
        Family::TaskGrid => Ok(make_task_grid(
            params.dim.unwrap_or(10),
            need(params.n_tasks, "n_tasks", family)?,
            need(params.tau, "tau", family)?,
            seed,
        )?
        .tabular(eps)?),
    }
}

/// A constructed member of an environment family.
#[derive(Clone, Debug)]
pub struct EnvInstance {
    pub family: Family,
    pub params: EnvParams,
    pub seed: u64,
    pub mdp: Arc<TabularMdp>,
    pub region_map: RegionMap,
    pub start_state: usize,
    /// Size of the task space `|Z|` (rooms or goals).
    pub n_tasks: usize,
    /// Steps between passive task switches, if any.
    pub tau: Option<usize>,
    optimum: OnceLock<(f64, PolicyTable)>,
}

impl EnvInstance {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        family: Family,
        params: EnvParams,
        seed: u64,
        mdp: TabularMdp,
        task_of_state: Vec<usize>,
        start_state: usize,
        n_tasks: usize,
        tau: Option<usize>,
    ) -> Result<Self> {
        let region_map = RegionMap::from_assignment(&mdp, task_of_state);
        let mdp = if params.smoothing > 0.0 {
            smooth_ergodic(&mdp, params.smoothing)?
        } else {
            mdp
        };
        Ok(Self {
            family,
            params,
            seed,
            mdp: Arc::new(mdp),
            region_map,
            start_state,
            n_tasks,
            tau,
            optimum: OnceLock::new(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    /// Short identifier used in CSV rows, e.g. `goal_grid-d5-s1`.
    pub fn id(&self) -> String {
        let p = &self.params;
        let mut id = self.family.name().to_string();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                id.push_str(&format!("-{k}{v}"));
            }
        };
        push("N", p.n_rooms.map(|v| v.to_string()));
        push("d", p.d.map(|v| v.to_string()));
        push("k", p.kind.map(|k| k.name().to_string()));
        push("c", p.c.map(|v| v.to_string()));
        push("x", p.x.map(|v| v.to_string()));
        push("tau", p.tau.map(|v| v.to_string()));
        push("Z", p.n_tasks.map(|v| v.to_string()));
        push("dim", p.dim.map(|v| v.to_string()));
        push("s", Some(self.seed.to_string()));
        id
    }

    fn optimum(&self) -> Result<&(f64, PolicyTable)> {
        if let Some(o) = self.optimum.get() {
            return Ok(o);
        }
        let o = optimal_average_reward(&self.mdp)?;
        Ok(self.optimum.get_or_init(|| o))
    }

    /// `ρ*`, computed once and cached.
    pub fn rho_star(&self) -> Result<f64> {
        Ok(self.optimum()?.0)
    }

    pub fn optimal_policy(&self) -> Result<&PolicyTable> {
        Ok(&self.optimum()?.1)
    }

    /// Override the cached optimum (e.g. with a value computed elsewhere).
    pub fn with_rho_star(self, rho: f64, policy: PolicyTable) -> Self {
        let optimum = OnceLock::new();
        let _ = optimum.set((rho, policy));
        Self { optimum, ..self }
    }

    /// Same instance with a new reward table (`ρ*` is recomputed on demand).
    pub fn with_rewards(&self, rewards: Vec<f64>, r_max: f64) -> Result<Self> {
        Ok(Self {
            mdp: Arc::new(self.mdp.with_rewards(rewards, r_max)?),
            optimum: OnceLock::new(),
            ..self.clone()
        })
    }

    pub fn simulator(&self) -> TabularSim {
        TabularSim::new(Arc::clone(&self.mdp), self.start_state)
    }
}

/// Move on a `d × d` grid: 0 up, 1 down, 2 left, 3 right. Off-grid moves
/// leave the cell unchanged.
pub(crate) fn grid_move(cell: usize, action: usize, d: usize) -> usize {
    let (r, c) = (cell / d, cell % d);
    let (r, c) = match action {
        0 if r > 0 => (r - 1, c),
        1 if r + 1 < d => (r + 1, c),
        2 if c > 0 => (r, c - 1),
        3 if c + 1 < d => (r, c + 1),
        _ => (r, c),
    };
    r * d + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn grid_moves_clip_at_walls() {
        assert_eq!(grid_move(0, 0, 3), 0);
        assert_eq!(grid_move(0, 1, 3), 3);
        assert_eq!(grid_move(0, 3, 3), 1);
        assert_eq!(grid_move(8, 3, 3), 8);
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("mazes".parse::<Family>().is_err());
    }

    #[test]
    fn simulator_rejects_bad_action() {
        let env = make_goal_grid(3, 1, DEFAULT_SMOOTHING).unwrap();
        let mut sim = env.simulator();
        let mut rng = seeded(0);
        sim.reset(&mut rng);
        assert!(sim.step(4, &mut rng).is_err());
        assert!(sim.step(3, &mut rng).is_ok());
    }
}
