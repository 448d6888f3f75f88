//! REINFORCE on the 3-D task grid with one and with many tasks.

use polymix::agents::{AgentConfig, Algorithm};
use polymix::envs::make_task_grid;
use polymix::harness::run_reinforce;

fn main() -> polymix::Result<()> {
    let cfg = AgentConfig::new(Algorithm::Reinforce);
    for (n_tasks, tau) in [(1, 10_000), (20, 500)] {
        let grid = make_task_grid(5, n_tasks, tau, 0)?;
        let run = run_reinforce(&grid, &cfg, 5_000, 50, 1)?;
        println!(
            "|Z| = {n_tasks:2}, tau = {tau:5}: train rate {:.3}, final rate {:.3}",
            run.train_reward_rate, run.final_reward_rate
        );
    }
    Ok(())
}
