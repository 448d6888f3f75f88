use serde::Serialize;

use super::mixing::exact_mixing_time_capped;
use crate::mdp::{MarkovChain, StationaryDistribution};
use crate::rng::seeded;
use crate::{invalid, Error, Result};

/// Below this stationary mass a region is treated as never visited.
const MASS_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidenceTime {
    /// Mean contiguous sojourn length; `f64::INFINITY` when the walk never
    /// leaves the region.
    pub mean: f64,
    pub stderr: f64,
    pub sojourns: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BottleneckReport {
    pub region: Vec<usize>,
    /// States of the region with positive one-step exit probability.
    pub boundary: Vec<usize>,
    pub mu_region: f64,
    /// Stationary flow `Σ_{s∈R} μ(s) P(S∖R | s)`.
    pub edge_flow: f64,
    pub bottleneck_ratio: f64,
    pub residence_time_analytic: f64,
    pub residence_time_simulated: Option<ResidenceTime>,
}

fn membership(n: usize, region: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; n];
    for &s in region {
        if s >= n {
            return Err(Error::Dimension {
                axis: "states",
                expected: n,
                got: s + 1,
            });
        }
        inside[s] = true;
    }
    Ok(inside)
}

/// Bottleneck ratio `℧(R) = ξ(S∖R | R) / μ(R)` and the analytic residence
/// time `1/℧(R)`.
pub fn bottleneck_ratio(
    chain: &MarkovChain,
    mu: &StationaryDistribution,
    region: &[usize],
) -> Result<BottleneckReport> {
    let n = chain.n_states();
    if mu.mu.len() != n {
        return Err(Error::Dimension {
            axis: "states",
            expected: n,
            got: mu.mu.len(),
        });
    }
    let inside = membership(n, region)?;
    let size = inside.iter().filter(|&&b| b).count();
    if size == 0 || size == n {
        return Err(invalid("region must be a nonempty proper subset of the states"));
    }
    let mut mu_region = 0.0;
    let mut edge_flow = 0.0;
    let mut boundary = Vec::new();
    for s in (0..n).filter(|&s| inside[s]) {
        let exit = chain.exit_probability(s, &inside);
        mu_region += mu.mu[s];
        edge_flow += mu.mu[s] * exit;
        if exit > 0.0 {
            boundary.push(s);
        }
    }
    if mu_region <= MASS_TOL {
        return Err(Error::DegenerateRegion(format!(
            "stationary mass of region is {mu_region:e}"
        )));
    }
    let ratio = edge_flow / mu_region;
    Ok(BottleneckReport {
        region: (0..n).filter(|&s| inside[s]).collect(),
        boundary,
        mu_region,
        edge_flow,
        bottleneck_ratio: ratio,
        residence_time_analytic: 1.0 / ratio,
        residence_time_simulated: None,
    })
}

/// Mean contiguous sojourn length inside `region`, simulated from state 0.
///
/// The burn-in defaults to `t_mix(1/4)` (searched up to `steps / 10`) and
/// falls back to `steps / 10`. A sojourn already in progress when the
/// burn-in ends, and the one still open at the end, are discarded.
pub fn residence_time_simulated(
    chain: &MarkovChain,
    region: &[usize],
    steps: u64,
    seed: u64,
    burn_in: Option<u64>,
) -> Result<ResidenceTime> {
    let n = chain.n_states();
    let inside = membership(n, region)?;
    if inside.iter().all(|&b| b) {
        return Ok(ResidenceTime {
            mean: f64::INFINITY,
            stderr: f64::INFINITY,
            sojourns: 0,
        });
    }
    let burn_in = burn_in.unwrap_or_else(|| {
        let fallback = steps / 10;
        if n <= 2000 {
            exact_mixing_time_capped(chain, 0.25, fallback as usize)
                .map(|t| t as u64)
                .unwrap_or(fallback)
        } else {
            fallback
        }
    });
    let mut rng = seeded(seed);
    let mut s = 0;
    for _ in 0..burn_in {
        s = chain.sample_next(s, &mut rng);
    }
    // a sojourn in progress at the end of burn-in has unknown start
    let mut counting = !inside[s];
    let mut current = 0u64;
    let mut visits = 0u64;
    let (mut count, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
    for _ in 0..steps {
        if inside[s] {
            visits += 1;
            current += 1;
        }
        let next = chain.sample_next(s, &mut rng);
        if inside[s] && !inside[next] {
            if counting {
                let len = current as f64;
                count += 1;
                sum += len;
                sum_sq += len * len;
            }
            counting = true;
            current = 0;
        }
        if !inside[s] {
            counting = true;
        }
        s = next;
    }
    if visits == 0 {
        return Err(Error::RegionNeverEntered);
    }
    if count == 0 {
        return Ok(ResidenceTime {
            mean: f64::INFINITY,
            stderr: f64::INFINITY,
            sojourns: 0,
        });
    }
    let mean = sum / count as f64;
    let var = if count > 1 {
        (sum_sq - count as f64 * mean * mean) / (count - 1) as f64
    } else {
        0.0
    };
    Ok(ResidenceTime {
        mean,
        stderr: (var.max(0.0) / count as f64).sqrt(),
        sojourns: count,
    })
}

/// Exhaustive `℧* = min_{R : μ(R) ≤ 1/2} ℧(R)` over all proper subsets,
/// for chains with at most 15 states. Returns the value and a minimiser.
pub fn conductance_brute_force(
    chain: &MarkovChain,
    mu: &StationaryDistribution,
) -> Result<(f64, Vec<usize>)> {
    let n = chain.n_states();
    if !(2..=15).contains(&n) {
        return Err(invalid("brute-force conductance needs 2 to 15 states"));
    }
    let p = chain.dense();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1u32..(1 << n) - 1 {
        let in_r = |s: usize| mask >> s & 1 == 1;
        let mass: f64 = (0..n).filter(|&s| in_r(s)).map(|s| mu.mu[s]).sum();
        if mass > 0.5 + 1e-12 || mass <= MASS_TOL {
            continue;
        }
        let mut flow = 0.0;
        for i in (0..n).filter(|&s| in_r(s)) {
            for j in (0..n).filter(|&s| !in_r(s)) {
                flow += mu.mu[i] * p[i][j];
            }
        }
        let ratio = flow / mass;
        if ratio < best.0 {
            best = (ratio, (0..n).filter(|&s| in_r(s)).collect());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::steady_state;

    fn lazy_pair() -> MarkovChain {
        MarkovChain::from_dense(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap()
    }

    #[test]
    fn symmetric_pair_values() {
        let c = lazy_pair();
        let mu = steady_state(&c).unwrap();
        let rep = bottleneck_ratio(&c, &mu, &[0]).unwrap();
        assert!((rep.mu_region - 0.5).abs() < 1e-12);
        assert!((rep.edge_flow - 0.125).abs() < 1e-12);
        assert!((rep.bottleneck_ratio - 0.25).abs() < 1e-12);
        assert!((rep.residence_time_analytic - 4.0).abs() < 1e-12);
        assert_eq!(rep.boundary, vec![0]);
    }

    #[test]
    fn simulated_sojourn_is_geometric() {
        let c = lazy_pair();
        let rt = residence_time_simulated(&c, &[0], 200_000, 5, None).unwrap();
        assert!((rt.mean - 4.0).abs() < 3.0 * rt.stderr, "{rt:?}");
    }

    #[test]
    fn whole_space_is_unbounded() {
        let rt = residence_time_simulated(&lazy_pair(), &[0, 1], 100, 1, None).unwrap();
        assert!(rt.mean.is_infinite());
    }

    #[test]
    fn flow_balances_across_the_cut() {
        let c = MarkovChain::from_dense(&[
            vec![0.1, 0.6, 0.3],
            vec![0.4, 0.4, 0.2],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let mu = steady_state(&c).unwrap();
        let a = bottleneck_ratio(&c, &mu, &[0, 2]).unwrap();
        let b = bottleneck_ratio(&c, &mu, &[1]).unwrap();
        assert!((a.edge_flow - b.edge_flow).abs() < 1e-12);
    }

    #[test]
    fn invalid_regions() {
        let c = lazy_pair();
        let mu = steady_state(&c).unwrap();
        assert!(bottleneck_ratio(&c, &mu, &[]).is_err());
        assert!(bottleneck_ratio(&c, &mu, &[0, 1]).is_err());
        assert!(bottleneck_ratio(&c, &mu, &[2]).is_err());
    }

    #[test]
    fn brute_force_conductance_pair() {
        let c = lazy_pair();
        let mu = steady_state(&c).unwrap();
        let (phi, set) = conductance_brute_force(&c, &mu).unwrap();
        assert!((phi - 0.25).abs() < 1e-12);
        assert_eq!(set.len(), 1);
    }
}
