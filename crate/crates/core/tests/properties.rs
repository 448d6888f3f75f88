//! Invariants of the solvers and chain analyses on random instances.

mod common;

use common::*;
use polymix::chain::{
    bottleneck_ratio, exact_mixing_time, graph_diameter, min_diameter, policy_diameter,
    return_mixing_time_exact, EpsilonGrid,
};
use polymix::mdp::{
    average_reward, differential_value, induce_chain, optimal_average_reward, smooth_ergodic,
    steady_state, PolicyTable,
};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=12, 1usize..=4, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn induced_chain_and_steady_state((n, m, seed) in instance()) {
        let (t, _, mdp) = random_mdp(n, m, 1e-3, seed);
        let pi = random_policy(n, m, seed ^ 1);
        let chain = induce_chain(&mdp, &PolicyTable::from_rows(&pi).unwrap()).unwrap();
        let p = induce(&t, &pi);
        for s in 0..n {
            let row = chain.dense_row(s);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&v| v >= 0.0));
        }
        let mu = steady_state(&chain).unwrap();
        prop_assert!((mu.mu.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(mu.mu.iter().all(|&v| v >= 0.0));
        prop_assert!(mu.residual <= 1e-10);
        let moved = step_dist(&mu.mu, &p);
        let oracle = power_iteration(&p, 100_000);
        for j in 0..n {
            prop_assert!((moved[j] - mu.mu[j]).abs() < 1e-10);
            prop_assert!((oracle[j] - mu.mu[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn bias_solves_the_poisson_equation((n, m, seed) in instance(), shift in 0.0..3.0f64) {
        let (t, r, mdp) = random_mdp(n, m, 1e-3, seed);
        let pi = random_policy(n, m, seed ^ 2);
        let policy = PolicyTable::from_rows(&pi).unwrap();
        let dv = differential_value(&mdp, &policy).unwrap();
        let p = induce(&t, &pi);
        let r_pi: Vec<f64> = (0..n).map(|s| (0..m).map(|a| pi[s][a] * r[s][a]).sum()).collect();
        let mu = stationary(&p);
        for s in 0..n {
            let ph: f64 = (0..n).map(|j| p[s][j] * dv.bias[j]).sum();
            prop_assert!((dv.bias[s] - (r_pi[s] - dv.rho + ph)).abs() < 1e-8);
        }
        let mu_h: f64 = mu.iter().zip(&dv.bias).map(|(a, b)| a * b).sum();
        prop_assert!(mu_h.abs() < 1e-8);
        let rho = average_reward(&mdp, &policy).unwrap();
        prop_assert!((dv.rho - rho).abs() < 1e-8);
        let oracle: f64 = mu.iter().zip(&r_pi).map(|(a, b)| a * b).sum();
        prop_assert!((rho - oracle).abs() < 1e-10);

        let shifted: Vec<f64> = mdp.rewards().iter().map(|v| v + shift).collect();
        let moved = mdp.with_rewards(shifted, mdp.r_max() + shift).unwrap();
        let dv2 = differential_value(&moved, &policy).unwrap();
        prop_assert!((dv2.rho - dv.rho - shift).abs() < 1e-8);
        for s in 0..n {
            prop_assert!((dv2.bias[s] - dv.bias[s]).abs() < 1e-8);
        }
    }

    #[test]
    fn smoothing_moves_the_gain_linearly((n, m, seed) in instance()) {
        let (_, _, mdp) = random_mdp(n, m, 0.05, seed);
        let policy = PolicyTable::from_rows(&random_policy(n, m, seed ^ 3)).unwrap();
        let rho = average_reward(&mdp, &policy).unwrap();
        let diff = |eps: f64| {
            (average_reward(&smooth_ergodic(&mdp, eps).unwrap(), &policy).unwrap() - rho).abs()
        };
        let (small, large) = (diff(1e-6), diff(1e-4));
        // |Δρ| ≤ C·ε with C ≤ |S| here, and first-order in ε
        prop_assert!(large <= n as f64 * 1e-4);
        if large > 1e-11 {
            let ratio = large / small;
            prop_assert!((50.0..200.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn optimum_dominates_and_matches_enumeration((n, m, seed) in (2usize..=4, 1usize..=3, any::<u64>())) {
        let (t, r, mdp) = random_mdp(n, m, 1e-3, seed);
        let (rho, pi) = optimal_average_reward(&mdp).unwrap();
        prop_assert!(pi.is_deterministic());
        prop_assert!((rho - enumerate_optimum(&t, &r)).abs() < 1e-9);
        for k in 0..5 {
            let other = PolicyTable::from_rows(&random_policy(n, m, seed ^ (10 + k))).unwrap();
            prop_assert!(average_reward(&mdp, &other).unwrap() <= rho + 1e-10);
        }
    }

    #[test]
    fn mixing_time_matches_explicit_powers(n in 2usize..=10, seed in any::<u64>()) {
        let (p, chain) = random_chain(n, 1e-2, seed);
        let mu = stationary(&p);
        for eps in [0.25, 0.1] {
            prop_assert_eq!(
                Some(exact_mixing_time(&chain, eps).unwrap()),
                brute_mixing_time(&p, &mu, eps, 100_000)
            );
        }
    }

    #[test]
    fn return_times_are_ordered((n, m, seed) in instance()) {
        let (_, _, mdp) = random_mdp(n, m, 1e-2, seed);
        let policy = PolicyTable::from_rows(&random_policy(n, m, seed ^ 4)).unwrap();
        let chain = induce_chain(&mdp, &policy).unwrap();
        let cap = 100 * n * exact_mixing_time(&chain, 0.25).unwrap().max(1);
        let grid = EpsilonGrid::Relative(vec![0.05, 0.1, 0.2, 0.4]);
        let rep = return_mixing_time_exact(&mdp, &policy, &grid, cap).unwrap();
        for k in 0..4 {
            prop_assert!(rep.mean_tret[k] <= rep.max_tret[k] as f64 + 1e-9);
            prop_assert!(rep.max_tret[k] >= 1);
        }
        for point in &rep.per_state_tret {
            let times: Vec<u64> = point.tret.iter().map(|t| t.unwrap()).collect();
            prop_assert!(times.iter().all(|&t| t >= 1));
            prop_assert!(times.windows(2).all(|w| w[0] >= w[1]), "{times:?}");
        }
    }

    #[test]
    fn diameters_are_ordered((n, m, seed) in instance()) {
        let (_, _, mdp) = random_mdp(n, m, 1e-2, seed);
        let policy = PolicyTable::from_rows(&random_policy(n, m, seed ^ 5)).unwrap();
        let chain = induce_chain(&mdp, &policy).unwrap();
        let rep = policy_diameter(&chain).unwrap();
        prop_assert!(rep.policy_diameter >= rep.graph_diameter as f64);
        for s in 0..n {
            prop_assert_eq!(rep.hitting[s][s], 0.0);
        }
        prop_assert!(min_diameter(&mdp).unwrap() <= rep.policy_diameter * (1.0 + 1e-9));
        let p = chain.dense();
        for target in [0, n - 1] {
            let oracle = hitting_to(&p, target);
            for s in 0..n {
                prop_assert!((rep.hitting[s][target] - oracle[s]).abs() <= 1e-8 * oracle[s].max(1.0));
            }
        }
    }

    #[test]
    fn bottleneck_identities(n in 3usize..=12, seed in any::<u64>(), mask in 1u64..) {
        let (p, chain) = random_chain(n, 1e-2, seed);
        let region: Vec<usize> = (0..n).filter(|&i| mask >> (i % 64) & 1 == 1).collect();
        prop_assume!(!region.is_empty() && region.len() < n);
        let mu = steady_state(&chain).unwrap();
        let b = bottleneck_ratio(&chain, &mu, &region).unwrap();
        let oracle_mu = stationary(&p);
        let inside = |j: usize| region.contains(&j);
        let mass: f64 = region.iter().map(|&s| oracle_mu[s]).sum();
        let flow: f64 = region
            .iter()
            .map(|&s| oracle_mu[s] * (0..n).filter(|&j| !inside(j)).map(|j| p[s][j]).sum::<f64>())
            .sum();
        prop_assert!(b.mu_region > 0.0 && b.mu_region < 1.0);
        prop_assert!((b.mu_region - mass).abs() < 1e-10);
        prop_assert!((b.edge_flow - flow).abs() < 1e-10);
        prop_assert!((b.bottleneck_ratio - b.edge_flow / b.mu_region).abs() < 1e-15);
        prop_assert!((b.residence_time_analytic * b.bottleneck_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lazy_chains_mix_slower_than_half_their_diameter(n in 2usize..=30, seed in any::<u64>()) {
        let (_, chain) = random_lazy_chain(n, seed);
        let diam = graph_diameter(&chain).unwrap();
        let t = exact_mixing_time(&chain, 0.25).unwrap();
        prop_assert!(2 * t >= diam, "t_mix {t}, diameter {diam}");
    }

    #[test]
    fn return_mixing_is_bounded_by_averaged_distance((n, m, seed) in instance()) {
        // |ρ(s,h) − ρ| ≤ (1/h) Σ_{t<h} r_max·d(t) with d(t) the worst TV
        // distance after t steps, so t_ret(ε) is at most one past the last h
        // where that average exceeds ε
        let (_, _, mdp) = random_mdp(n, m, 1e-2, seed);
        let pi = random_policy(n, m, seed ^ 6);
        let policy = PolicyTable::from_rows(&pi).unwrap();
        let (t, _) = dense_mdp(&mdp);
        let p = induce(&t, &pi);
        let mu = stationary(&p);
        let horizon = 2000;
        let mut power: Dense = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
        let mut dist = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            dist.push(power.iter().map(|row| tv(row, &mu)).fold(0.0, f64::max));
            power = matmul(&power, &p);
        }
        prop_assume!(*dist.last().unwrap() < 1e-12);
        for eps in [0.05, 0.1, 0.2] {
            let mut sum = 0.0;
            let mut bound = 1;
            for (h, d) in dist.iter().enumerate() {
                sum += d * mdp.r_max();
                if sum / (h + 1) as f64 > eps {
                    bound = h + 2;
                }
            }
            let rep = return_mixing_time_exact(&mdp, &policy, &EpsilonGrid::Absolute(vec![eps]), horizon).unwrap();
            prop_assert!(rep.max_tret[0] as usize <= bound, "eps {eps}: {} > {bound}", rep.max_tret[0]);
        }
    }
}
