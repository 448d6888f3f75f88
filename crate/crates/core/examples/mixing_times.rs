//! Distributional, Cesàro and return-based mixing times.

use polymix::chain::{
    cesaro_mixing_time, exact_mixing_time, return_mixing_time_empirical, return_mixing_time_exact,
    EpsilonGrid,
};
use polymix::envs::make_rooms;
use polymix::envs::RoomKind;
use polymix::mdp::{induce_chain, MarkovChain};

fn main() -> polymix::Result<()> {
    let lazy = MarkovChain::from_dense(&[vec![0.75, 0.25], vec![0.25, 0.75]])?;
    println!("lazy two-state chain: t_mix(1/4) = {}", exact_mixing_time(&lazy, 0.25)?);

    // a periodic chain never mixes in distribution, but its averages do
    let flip = MarkovChain::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    println!("2-cycle: t_mix = {:?}", exact_mixing_time(&flip, 0.25).err().map(|e| e.to_string()));
    println!("2-cycle: Cesàro t_mix = {}", cesaro_mixing_time(&flip, 0.25)?);

    let env = make_rooms(2, 3, RoomKind::Cycle, 0, 1e-6)?;
    let policy = env.optimal_policy()?.clone();
    let chain = induce_chain(&env.mdp, &policy)?;
    let grid = EpsilonGrid::Relative(vec![0.1, 0.2]);
    let exact = return_mixing_time_exact(&env.mdp, &policy, &grid, 100 * env.n_states() * exact_mixing_time(&chain, 0.25)?)?;
    println!("rooms N=2 d=3, optimal policy, rho = {:.4}", exact.rho_estimate);
    println!("  exact t_ret (mean over states) at 10%/20%: {:?}", exact.mean_tret);

    let mut sim = env.simulator();
    let emp = return_mixing_time_empirical(&mut sim, &policy, &grid, 100, 200_000, 1)?;
    println!("  empirical t_ret (reservoir of 100 starts):  {:?}", emp.mean_tret);
    Ok(())
}
