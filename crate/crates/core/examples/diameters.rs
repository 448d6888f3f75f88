//! Hitting times, diameters, spectral gap and room bottlenecks.

use polymix::chain::{bottleneck_ratio, min_diameter, policy_diameter, residence_time_simulated, spectral_gap};
use polymix::envs::{make_goal_grid, make_rooms, RoomKind};
use polymix::mdp::{induce_chain, steady_state, PolicyTable};

fn main() -> polymix::Result<()> {
    for d in [3, 5, 7] {
        let env = make_goal_grid(d, 0, 1e-6)?;
        println!("goal grid d={d}: |S| = {:3}, D* = {:.3}", env.n_states(), min_diameter(&env.mdp)?);
    }

    let env = make_rooms(4, 3, RoomKind::Cycle, 0, 1e-6)?;
    let uniform = PolicyTable::uniform(env.n_states(), env.n_actions());
    let chain = induce_chain(&env.mdp, &uniform)?;
    let diam = policy_diameter(&chain)?;
    println!(
        "rooms N=4 d=3 uniform policy: D = {:.1}, graph diameter = {}, gap = {:.4}",
        diam.policy_diameter,
        diam.graph_diameter,
        spectral_gap(&chain)?
    );

    let mu = steady_state(&chain)?;
    for (z, room) in env.region_map.regions.iter().enumerate() {
        let b = bottleneck_ratio(&chain, &mu, room)?;
        let sim = residence_time_simulated(&chain, room, 200_000, z as u64, None)?;
        println!(
            "  room {z}: ratio {:.4}, residence {:.2} analytic / {:.2} ± {:.2} simulated",
            b.bottleneck_ratio, b.residence_time_analytic, sim.mean, sim.stderr
        );
    }
    Ok(())
}
