//! Lifelong regret of ρ-learning against Q-learning on a goal grid.

use polymix::agents::{AgentConfig, Algorithm};
use polymix::envs::make_goal_grid;
use polymix::harness::run_lifelong;

fn main() -> polymix::Result<()> {
    let env = make_goal_grid(4, 0, 1e-6)?;
    println!("{}: rho* = {:.4}", env.id(), env.rho_star()?);
    for alg in [Algorithm::RhoOffPolicy, Algorithm::RhoOnPolicy, Algorithm::QOffPolicy, Algorithm::DynaQ] {
        let mut cfg = AgentConfig::new(alg);
        cfg.epsilon = 0.2;
        let run = run_lifelong(&env, &cfg, 20_000, 3)?;
        println!("{:16} mean reward {:.4}  regret/step {:.4}", alg, run.mean_reward(), run.regret_per_step);
    }
    Ok(())
}
