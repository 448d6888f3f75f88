//! Steady state, reward rate and bias of a small two-state MDP.

use polymix::mdp::{
    average_reward, differential_value, induce_chain, optimal_average_reward, steady_state,
    smooth_ergodic, PolicyTable, TabularMdp,
};

fn main() -> polymix::Result<()> {
    // action 0 stays, action 1 switches; only state 1 pays
    let t = vec![
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    ];
    let r = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
    let mdp = TabularMdp::from_dense(&t, &r, None)?;

    let uniform = PolicyTable::uniform(2, 2);
    let chain = induce_chain(&mdp, &uniform)?;
    let mu = steady_state(&chain)?;
    println!("uniform policy: mu = {:?} (residual {:.1e})", mu.mu, mu.residual);
    println!("uniform policy: rho = {}", average_reward(&mdp, &uniform)?);
    let dv = differential_value(&mdp, &uniform)?;
    println!("uniform policy: bias = {:?}", dv.bias);

    // "always stay" has two recurrent classes; smoothing makes every policy unichain
    let (rho, best) = optimal_average_reward(&smooth_ergodic(&mdp, 1e-6)?)?;
    println!("optimal: rho* = {rho}, actions = {:?}", [best.greedy_action(0), best.greedy_action(1)]);
    Ok(())
}
