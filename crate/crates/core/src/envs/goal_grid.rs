use rand::seq::index::sample;

use super::{grid_move, EnvInstance, EnvParams, Family};
use crate::mdp::TabularMdp;
use crate::rng::seeded;
use crate::{invalid, Result};

/// `d × d` grid with one goal cell. Entering the goal pays 1; from the goal
/// every action moves to a uniformly random non-goal cell.
///
/// Goal and start cells are drawn from `seed`. `eps_smooth = 0` keeps the raw
/// kernel.
pub fn make_goal_grid(d: usize, seed: u64, eps_smooth: f64) -> Result<EnvInstance> {
    if d < 2 {
        return Err(invalid(format!("goal grid needs d >= 2, got {d}")));
    }
    let n = d * d;
    let mut rng = seeded(seed);
    let picks = sample(&mut rng, n, 2);
    let (goal, start) = (picks.index(0), picks.index(1));

    let teleport: Vec<(usize, f64)> = (0..n)
        .filter(|&s| s != goal)
        .map(|s| (s, 1.0 / (n - 1) as f64))
        .collect();
    let mut rows = Vec::with_capacity(n * 4);
    let mut rewards = Vec::with_capacity(n * 4);
    for s in 0..n {
        for a in 0..4 {
            if s == goal {
                rows.push(teleport.clone());
                rewards.push(0.0);
            } else {
                let next = grid_move(s, a, d);
                rows.push(vec![(next, 1.0)]);
                rewards.push(if next == goal { 1.0 } else { 0.0 });
            }
        }
    }
    let mdp = TabularMdp::new(n, 4, rows, rewards, 1.0)?;
    let params = EnvParams {
        d: Some(d),
        smoothing: eps_smooth,
        ..EnvParams::default()
    };
    EnvInstance::assemble(Family::GoalGrid, params, seed, mdp, vec![0; n], start, 1, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{average_reward, PolicyTable};

    #[test]
    fn sizes_and_determinism() {
        let a = make_goal_grid(5, 3, 1e-6).unwrap();
        assert_eq!(a.n_states(), 25);
        assert_eq!(a.n_actions(), 4);
        let b = make_goal_grid(5, 3, 1e-6).unwrap();
        assert_eq!(a.mdp, b.mdp);
        assert!(make_goal_grid(1, 0, 1e-6).is_err());
    }

    #[test]
    fn uniform_policy_is_suboptimal() {
        let env = make_goal_grid(4, 7, 1e-6).unwrap();
        let rho_u = average_reward(&env.mdp, &PolicyTable::uniform(16, 4)).unwrap();
        assert!(rho_u < env.rho_star().unwrap());
    }
}
