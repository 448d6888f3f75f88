use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{grid_move, EnvInstance, EnvParams, Family};
use crate::mdp::TabularMdp;
use crate::rng::seeded;
use crate::{invalid, Error, Result};

/// How a room goal hands over to the next room.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomKind {
    /// Strict cyclic order, no repeats.
    Cycle,
    /// Uniformly random next room, repeats allowed.
    Random,
    /// `R1, R1 R2, R1 R2 R3, ...`, tracked by a stage component of the state.
    Curricular,
}

impl RoomKind {
    pub fn name(self) -> &'static str {
        match self {
            RoomKind::Cycle => "cycle",
            RoomKind::Random => "random",
            RoomKind::Curricular => "curricular",
        }
    }
}

impl fmt::Display for RoomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(RoomKind::Cycle),
            "random" => Ok(RoomKind::Random),
            "curricular" => Ok(RoomKind::Curricular),
            other => Err(invalid(format!("unknown room kind `{other}`"))),
        }
    }
}

/// Seeded `(start, goal)` cell of every room.
fn room_cells(n_rooms: usize, d: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = seeded(seed);
    (0..n_rooms)
        .map(|_| {
            let p = sample(&mut rng, d * d, 2);
            (p.index(0), p.index(1))
        })
        .collect()
}

fn curriculum(n_rooms: usize) -> Vec<usize> {
    (1..=n_rooms).flat_map(|k| 0..k).collect()
}

fn check_rooms(n_rooms: usize, d: usize) -> Result<()> {
    if n_rooms < 2 {
        return Err(invalid(format!("rooms need N >= 2, got {n_rooms}")));
    }
    if d < 2 {
        return Err(invalid(format!("rooms need d >= 2, got {d}")));
    }
    Ok(())
}

/// `N` rooms of `d × d` cells. Entering a room's goal pays 1 and moves the
/// agent to the start cell of the next room chosen by `kind`.
pub fn make_rooms(
    n_rooms: usize,
    d: usize,
    kind: RoomKind,
    seed: u64,
    eps_smooth: f64,
) -> Result<EnvInstance> {
    check_rooms(n_rooms, d)?;
    let cells = room_cells(n_rooms, d, seed);
    let c = d * d;
    let schedule: Vec<usize> = match kind {
        RoomKind::Curricular => curriculum(n_rooms),
        _ => (0..n_rooms).collect(),
    };
    let positions = schedule.len();
    let n = positions * c;

    let mut rows = Vec::with_capacity(n * 4);
    let mut rewards = Vec::with_capacity(n * 4);
    let mut task_of_state = Vec::with_capacity(n);
    for (p, &room) in schedule.iter().enumerate() {
        let (_, goal) = cells[room];
        for cell in 0..c {
            task_of_state.push(room);
            for a in 0..4 {
                if cell == goal {
                    let row = match kind {
                        RoomKind::Random => (0..n_rooms)
                            .map(|r| (r * c + cells[r].0, 1.0 / n_rooms as f64))
                            .collect(),
                        _ => {
                            let q = (p + 1) % positions;
                            vec![(q * c + cells[schedule[q]].0, 1.0)]
                        }
                    };
                    rows.push(row);
                    rewards.push(0.0);
                } else {
                    let next = grid_move(cell, a, d);
                    rows.push(vec![(p * c + next, 1.0)]);
                    rewards.push(if next == goal { 1.0 } else { 0.0 });
                }
            }
        }
    }
    let mdp = TabularMdp::new(n, 4, rows, rewards, 1.0)?;
    let params = EnvParams {
        d: Some(d),
        n_rooms: Some(n_rooms),
        kind: Some(kind),
        smoothing: eps_smooth,
        ..EnvParams::default()
    };
    let start = cells[schedule[0]].0;
    EnvInstance::assemble(Family::Rooms, params, seed, mdp, task_of_state, start, n_rooms, None)
}

/// Rooms with passive switching every `τ = round(c · d^x)` steps.
pub fn make_cyclic_rooms_tau(
    n_rooms: usize,
    d: usize,
    c: f64,
    x: f64,
    seed: u64,
    eps_smooth: f64,
) -> Result<EnvInstance> {
    check_rooms(n_rooms, d)?;
    if !(c >= 2.0) || !(x >= 1.0) {
        return Err(invalid(format!("need c >= 2 and x >= 1, got c={c}, x={x}")));
    }
    let tau = (c * (d as f64).powf(x)).round() as usize;
    let params = EnvParams {
        d: Some(d),
        n_rooms: Some(n_rooms),
        c: Some(c),
        x: Some(x),
        smoothing: eps_smooth,
        ..EnvParams::default()
    };
    passive(n_rooms, d, tau, seed, Family::CyclicRoomsTau, params)
}

/// Rooms with passive cyclic switching every `tau` steps.
///
/// The state is `(room, phase, cell)`; the phase advances every step and
/// the room changes (to the next room's start cell) exactly when the phase
/// wraps, whatever the agent does. A goal pays 1 and returns the agent to
/// the current room's start.
pub fn make_passive_rooms(
    n_rooms: usize,
    d: usize,
    tau: usize,
    seed: u64,
    eps_smooth: f64,
) -> Result<EnvInstance> {
    check_rooms(n_rooms, d)?;
    let params = EnvParams {
        d: Some(d),
        n_rooms: Some(n_rooms),
        tau: Some(tau),
        smoothing: eps_smooth,
        ..EnvParams::default()
    };
    passive(n_rooms, d, tau, seed, Family::PassiveRooms, params)
}

fn passive(
    n_rooms: usize,
    d: usize,
    tau: usize,
    seed: u64,
    family: Family,
    params: EnvParams,
) -> Result<EnvInstance> {
    if tau < 2 * d {
        return Err(invalid(format!("tau = {tau} must be at least 2d = {}", 2 * d)));
    }
    let cells = room_cells(n_rooms, d, seed);
    let c = d * d;
    let n = n_rooms * tau * c;
    let index = |r: usize, t: usize, cell: usize| (r * tau + t) * c + cell;

    let mut rows = Vec::with_capacity(n * 4);
    let mut rewards = Vec::with_capacity(n * 4);
    let mut task_of_state = Vec::with_capacity(n);
    for r in 0..n_rooms {
        let (start, goal) = cells[r];
        for t in 0..tau {
            for cell in 0..c {
                task_of_state.push(r);
                for a in 0..4 {
                    let moved = if cell == goal { start } else { grid_move(cell, a, d) };
                    let reward = if cell != goal && moved == goal { 1.0 } else { 0.0 };
                    let next = if t + 1 == tau {
                        let r2 = (r + 1) % n_rooms;
                        index(r2, 0, cells[r2].0)
                    } else {
                        index(r, t + 1, moved)
                    };
                    rows.push(vec![(next, 1.0)]);
                    rewards.push(reward);
                }
            }
        }
    }
    let mdp = TabularMdp::new(n, 4, rows, rewards, 1.0)?;
    EnvInstance::assemble(
        family,
        params,
        seed,
        mdp,
        task_of_state,
        index(0, 0, cells[0].0),
        n_rooms,
        Some(tau),
    )
}
