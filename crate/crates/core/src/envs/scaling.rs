use serde::{Deserialize, Serialize};

use super::{build, EnvInstance, EnvParams, Family, RoomKind};
use crate::mdp::DEFAULT_SMOOTHING;
use crate::{invalid, Result};

/// Proportional scaling `q_ν = q0 + ν Δq`.
///
/// Parameter order per family:
///
/// | family             | q                       |
/// |--------------------|-------------------------|
/// | `goal_grid`        | `[d]`                   |
/// | `rooms`            | `[N, d]` (cycle kind)   |
/// | `cyclic_rooms_tau` | `[N, d, c, x]`          |
/// | `passive_rooms`    | `[tau, N, d]`           |
/// | `task_grid`        | `[tau, n_tasks, dim]`   |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub q0: Vec<f64>,
    pub delta_q: Vec<f64>,
}

impl ScalingSpec {
    pub fn new(q0: Vec<f64>, delta_q: Vec<f64>) -> Result<Self> {
        if q0.len() != delta_q.len() {
            return Err(invalid("q0 and delta_q must have the same length"));
        }
        if delta_q.iter().any(|&v| !(v >= 0.0)) || !delta_q.iter().any(|&v| v > 0.0) {
            return Err(invalid("delta_q must be nonnegative with at least one positive entry"));
        }
        Ok(Self { q0, delta_q })
    }

    pub fn at(&self, nu: f64) -> Vec<f64> {
        self.q0.iter().zip(&self.delta_q).map(|(q, dq)| q + nu * dq).collect()
    }
}

fn names(family: Family) -> &'static [&'static str] {
    match family {
        Family::GoalGrid => &["d"],
        Family::Rooms => &["N", "d"],
        Family::CyclicRoomsTau => &["N", "d", "c", "x"],
        Family::PassiveRooms => &["tau", "N", "d"],
        Family::TaskGrid => &["tau", "n_tasks", "dim"],
    }
}

/// The family member at scale `nu`; integer parameters are rounded down.
pub fn scale(family: Family, spec: &ScalingSpec, nu: f64, seed: u64) -> Result<EnvInstance> {
    let keys = names(family);
    if spec.q0.len() != keys.len() || spec.delta_q.len() != keys.len() {
        return Err(invalid(format!(
            "family {family} scales parameters {keys:?}, got {} values",
            spec.q0.len()
        )));
    }
    if !(nu >= 0.0) {
        return Err(invalid(format!("nu must be nonnegative, got {nu}")));
    }
    let q = spec.at(nu);
    let mut p = EnvParams {
        smoothing: DEFAULT_SMOOTHING,
        ..EnvParams::default()
    };
    for (key, &v) in keys.iter().zip(&q) {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(invalid(format!("parameter {key} = {v} is out of range")));
        }
        let int = Some(v.floor() as usize);
        match *key {
            "d" => p.d = int,
            "N" => p.n_rooms = int,
            "tau" => p.tau = int,
            "n_tasks" => p.n_tasks = int,
            "dim" => p.dim = int,
            "c" => p.c = Some(v),
            "x" => p.x = Some(v),
            _ => unreachable!(),
        }
    }
    if family == Family::Rooms {
        p.kind = Some(RoomKind::Cycle);
    }
    build(family, &p, seed).map_err(|e| invalid(format!("{family} at nu={nu}: {e}")))
}
