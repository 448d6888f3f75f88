//! Reference values checked against independent oracles.

mod common;

use common::*;
use polymix::chain::{
    bottleneck_ratio, cesaro_mixing_time, exact_mixing_time, expected_hitting_times, min_diameter,
    policy_diameter, residence_time_simulated, return_mixing_time_exact, spectral_gap, tv_profile,
    EpsilonGrid,
};
use polymix::envs::{make_goal_grid, make_task_grid};
use polymix::mdp::{
    average_reward, differential_value, induce_chain, optimal_average_reward, smooth_ergodic,
    steady_state, MarkovChain, PolicyTable, TabularMdp,
};
use polymix::rng::seeded;

fn two_state() -> Dense {
    vec![vec![0.9, 0.1], vec![0.2, 0.8]]
}

fn single_action(p: &Dense, r: &[f64]) -> TabularMdp {
    let t: Vec<Dense> = p.iter().map(|row| vec![row.clone()]).collect();
    let r: Dense = r.iter().map(|&v| vec![v]).collect();
    TabularMdp::from_dense(&t, &r, None).unwrap()
}

#[test]
fn induced_chain_is_the_triple_sum() {
    let (t, _, mdp) = random_mdp(4, 3, 0.0, 11);
    let pi = random_policy(4, 3, 12);
    let chain = induce_chain(&mdp, &PolicyTable::from_rows(&pi).unwrap()).unwrap();
    let want = induce(&t, &pi);
    for (s, row) in want.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            assert!((chain.prob(s, j) - p).abs() < 1e-15);
        }
    }
}

#[test]
fn smoothed_two_cycle_floor() {
    let t = vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]];
    let mdp = TabularMdp::from_dense(&t, &[vec![0.0], vec![1.0]], None).unwrap();
    let s = smooth_ergodic(&mdp, 0.01).unwrap();
    let floor = 0.01 / 1.02;
    for st in 0..2 {
        let row = s.dense_row(st, 0);
        assert!(row.iter().all(|&p| p >= floor - 1e-17));
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert!(smooth_ergodic(&mdp, 0.0).is_err());
}

#[test]
fn stationary_of_the_two_state_chain() {
    let p = two_state();
    let oracle = power_iteration(&p, 100_000);
    let mu = steady_state(&MarkovChain::from_dense(&p).unwrap()).unwrap();
    for i in 0..2 {
        assert!((mu.mu[i] - oracle[i]).abs() < 1e-12);
    }
    assert!((oracle[0] - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn reward_rate_matches_a_long_simulation() {
    let p = two_state();
    let rho = average_reward(&single_action(&p, &[0.0, 1.0]), &PolicyTable::uniform(2, 1)).unwrap();
    assert!((rho - 1.0 / 3.0).abs() < 1e-12);

    // batch means over 100 blocks absorb the chain's autocorrelation
    let mut rng = seeded(3);
    let (mut s, mut blocks) = (0, Vec::new());
    for _ in 0..100 {
        let mut total = 0.0;
        for _ in 0..100_000 {
            s = sample(&p[s], &mut rng);
            total += s as f64;
        }
        blocks.push(total / 100_000.0);
    }
    let (mean, se) = mean_se(&blocks);
    assert!((mean - rho).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn bias_matches_the_truncated_sum() {
    let p = two_state();
    let dv = differential_value(&single_action(&p, &[0.0, 1.0]), &PolicyTable::uniform(2, 1)).unwrap();
    // h(s) = Σ_{t<H} (E[r_t | s] − ρ), shifted so that μ·h = 0
    let mu = power_iteration(&p, 100_000);
    let mut h = [0.0; 2];
    for (s, hs) in h.iter_mut().enumerate() {
        let mut x = vec![0.0; 2];
        x[s] = 1.0;
        for _ in 0..100_000 {
            *hs += x[1] - dv.rho;
            x = step_dist(&x, &p);
        }
    }
    let shift: f64 = mu.iter().zip(&h).map(|(m, v)| m * v).sum();
    for s in 0..2 {
        assert!((dv.bias[s] - (h[s] - shift)).abs() < 1e-9, "{:?} vs {:?}", dv.bias, h);
    }
    // h(1) − h(0) = (r(1) − r(0)) / (1 − λ₂) with λ₂ = 0.7
    assert!((dv.bias[1] - dv.bias[0] - 1.0 / 0.3).abs() < 1e-10);
}

#[test]
fn optimum_of_a_two_state_chooser_by_enumeration() {
    // action a moves to state a; only state 1 pays
    let t = vec![
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    ];
    let r = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
    let mdp = smooth_ergodic(&TabularMdp::from_dense(&t, &r, None).unwrap(), 1e-6).unwrap();
    let (t, r) = dense_mdp(&mdp);
    let (rho, pi) = optimal_average_reward(&mdp).unwrap();
    assert!((rho - enumerate_optimum(&t, &r)).abs() < 1e-10);
    assert_eq!(pi.greedy_action(0), 1);
    assert_eq!(pi.greedy_action(1), 1);
}

#[test]
fn goal_grid_optimum_by_enumeration() {
    for seed in 0..3 {
        let env = make_goal_grid(2, seed, 1e-6).unwrap();
        let (t, r) = dense_mdp(&env.mdp);
        let (rho, _) = optimal_average_reward(&env.mdp).unwrap();
        assert!((rho - enumerate_optimum(&t, &r)).abs() < 1e-9);
    }
}

#[test]
fn lazy_pair_total_variation() {
    let p = vec![vec![0.75, 0.25], vec![0.25, 0.75]];
    let chain = MarkovChain::from_dense(&p).unwrap();
    let profile = tv_profile(&chain, 10).unwrap();
    for (h, v) in profile.iter().enumerate() {
        assert!((v - 0.5 * 0.5f64.powi(h as i32)).abs() < 1e-15);
    }
    assert_eq!(exact_mixing_time(&chain, 0.25).unwrap(), 1);
    assert_eq!(brute_mixing_time(&p, &[0.5, 0.5], 0.25, 10), Some(1));
}

#[test]
fn smoothed_three_cycle_mixing_time() {
    let cycle = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
    let p = smoothed(&cycle, 0.3);
    let chain = MarkovChain::from_dense(&p).unwrap();
    let third = [1.0 / 3.0; 3];
    for eps in [0.25, 0.1, 0.01] {
        assert_eq!(
            Some(exact_mixing_time(&chain, eps).unwrap()),
            brute_mixing_time(&p, &third, eps, 1000)
        );
    }
}

#[test]
fn cesaro_on_the_two_cycle() {
    let p = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let chain = MarkovChain::from_dense(&p).unwrap();
    assert!(exact_mixing_time(&chain, 0.3).is_err());
    // averaged law from state 0 after h steps: (⌈h/2⌉, ⌊h/2⌋)/h
    let oracle = (1..)
        .find(|&h: &usize| {
            let a = h.div_ceil(2) as f64 / h as f64;
            tv(&[a, 1.0 - a], &[0.5, 0.5]) <= 0.3
        })
        .unwrap();
    assert_eq!(cesaro_mixing_time(&chain, 0.3).unwrap(), oracle);
}

#[test]
fn cesaro_is_within_seven_mixing_times() {
    for seed in 0..100 {
        let (_, chain) = random_chain(2 + seed as usize % 12, 0.02, seed);
        let t_mix = exact_mixing_time(&chain, 0.25).unwrap();
        let t_ces = cesaro_mixing_time(&chain, 0.25).unwrap();
        assert!(t_ces <= 7 * t_mix.max(1), "seed {seed}: {t_ces} > 7·{t_mix}");
    }
}

#[test]
fn alternator_return_time_from_the_paying_state() {
    let p = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let mdp = single_action(&p, &[1.0, 0.0]);
    let pi = PolicyTable::uniform(2, 1);
    let rep = return_mixing_time_exact(&mdp, &pi, &EpsilonGrid::Absolute(vec![0.2]), 1000).unwrap();
    // partial averages 1, 1/2, 2/3, 1/2, 3/5, ... leave the 0.2 band last at h = 1
    let oracle = (1..1000)
        .filter(|&h| ((h as f64 / 2.0).ceil() / h as f64 - 0.5).abs() > 0.2)
        .max()
        .map_or(1, |h| h + 1);
    assert_eq!(oracle, 2);
    let from_paying = rep.per_state_tret.iter().find(|p| p.state == 0).unwrap();
    assert_eq!(from_paying.tret[0], Some(2));
}

#[test]
fn hitting_time_of_the_fair_coin_chain() {
    let p = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
    let hit = expected_hitting_times(&MarkovChain::from_dense(&p).unwrap()).unwrap();
    assert!((hit[0][1] - 2.0).abs() < 1e-12);
    assert!((hitting_to(&p, 1)[0] - 2.0).abs() < 1e-12);
    let (mean, se) = simulate_hitting(&p, 0, 1, 1_000_000, 5);
    assert!((mean - 2.0).abs() < 3.0 * se);
    let diam = policy_diameter(&MarkovChain::from_dense(&p).unwrap()).unwrap();
    assert!((diam.policy_diameter - 2.0).abs() < 1e-12);
}

#[test]
fn goal_grid_diameter_is_at_least_one_axis() {
    // BFS distance along the deterministic moves bounds every expected hitting time
    let d = 5;
    let env = make_goal_grid(d, 0, 1e-6).unwrap();
    let dstar = min_diameter(&env.mdp).unwrap();
    assert!(dstar >= (d - 1) as f64 - 1e-6);
    for seed in 0..4 {
        let tiny = make_goal_grid(2, seed, 0.0).unwrap();
        assert_eq!(tiny.n_states(), 4);
        assert!(min_diameter(&tiny.mdp).unwrap() <= 2.0 + 1e-9);
    }
}

#[test]
fn symmetric_pair_bottleneck() {
    let p = vec![vec![0.75, 0.25], vec![0.25, 0.75]];
    let chain = MarkovChain::from_dense(&p).unwrap();
    let mu = steady_state(&chain).unwrap();
    let b = bottleneck_ratio(&chain, &mu, &[0]).unwrap();
    assert!((b.mu_region - 0.5).abs() < 1e-12);
    assert!((b.edge_flow - 0.125).abs() < 1e-12);
    assert!((b.bottleneck_ratio - 0.25).abs() < 1e-12);
    assert!((b.residence_time_analytic - 4.0).abs() < 1e-12);
    let sim = residence_time_simulated(&chain, &[0], 1_000_000, 9, None).unwrap();
    assert!((sim.mean - 4.0).abs() < 3.0 * sim.stderr, "{sim:?}");
}

#[test]
fn lazy_pair_spectral_gap() {
    let chain = MarkovChain::from_dense(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
    assert!((spectral_gap(&chain).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn task_grid_uniform_rate_approaches_one_half() {
    // away from walls and off every goal axis, 3 of the 6 moves shrink the
    // L1 distance; walls and aligned axes pull the stationary rate below 1/2
    let grid = make_task_grid(10, 1, 50, 1).unwrap();
    let goal = grid.goals[0];
    let [gx, gy, gz] = grid.coords(goal);
    for cell in 0..grid.n_cells() {
        let [x, y, z] = grid.coords(cell);
        let interior = [x, y, z].iter().all(|&v| v > 0 && v < 9);
        if interior && x != gx && y != gy && z != gz {
            let paying = (0..6).filter(|&a| grid.step_cell(cell, a, goal).1 == 1.0).count();
            assert_eq!(paying, 3, "cell {cell}");
        }
    }
    let mut last = 0.0;
    for dim in [4, 6, 10] {
        let env = make_task_grid(dim, 1, 50, 1).unwrap().tabular(1e-6).unwrap();
        let uniform = PolicyTable::uniform(env.n_states(), env.n_actions());
        let rate = average_reward(&env.mdp, &uniform).unwrap();
        assert!(rate > last && rate < 0.5, "dim {dim}: {rate}");
        last = rate;
        assert!((env.rho_star().unwrap() - 1.0).abs() < 1e-3);
    }
}
