//! A small grid search with the per-algorithm winners.

use polymix::agents::Algorithm;
use polymix::envs::make_goal_grid;
use polymix::harness::{sweep, SweepGrid};

fn main() -> polymix::Result<()> {
    let env = make_goal_grid(3, 0, 1e-6)?;
    let mut grid = SweepGrid::default().only(&[Algorithm::RhoOffPolicy, Algorithm::QOffPolicy]);
    grid.discount = vec![0.9, 0.99];
    let configs = grid.expand();
    let result = sweep(&env, &configs, 4, 5_000, 0, None)?;
    for c in &result.configs {
        println!("{:45} {:.4} ± {:.4}", c.label, c.mean, c.std);
    }
    for (alg, i) in &result.best {
        println!("best {alg}: {}", result.configs[*i].label);
    }
    Ok(())
}
