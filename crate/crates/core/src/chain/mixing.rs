use crate::mdp::{steady_state, MarkovChain};
use crate::{Error, Result};

/// Default horizon cap for the distribution-based mixing times.
pub const DEFAULT_HORIZON_CAP: usize = 100_000;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

pub(crate) fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn worst_tv(rows: &[Vec<f64>], mu: &[f64]) -> f64 {
    rows.iter().map(|r| total_variation(r, mu)).fold(0.0, f64::max)
}

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect()
}

fn advance(chain: &MarkovChain, rows: &mut [Vec<f64>], scratch: &mut [f64]) {
    for row in rows.iter_mut() {
        chain.left_mul_into(row, scratch);
        row.copy_from_slice(scratch);
    }
}

/// `t_mix(ε)`: the smallest `h ≥ 0` with
/// `max_{s0} d_TV(P^h(s0, ·), μ) ≤ ε`, with the default horizon cap.
pub fn exact_mixing_time(chain: &MarkovChain, eps: f64) -> Result<usize> {
    exact_mixing_time_capped(chain, eps, DEFAULT_HORIZON_CAP)
}

pub fn exact_mixing_time_capped(chain: &MarkovChain, eps: f64, cap: usize) -> Result<usize> {
    check_eps(eps)?;
    let mu = steady_state(chain)?.mu;
    let n = chain.n_states();
    let mut rows = identity_rows(n);
    let mut scratch = vec![0.0; n];
    let mut tv = worst_tv(&rows, &mu);
    for h in 0..=cap {
        if h > 0 {
            advance(chain, &mut rows, &mut scratch);
            tv = worst_tv(&rows, &mu);
        }
        if tv <= eps {
            return Ok(h);
        }
    }
    Err(Error::HorizonCap {
        cap,
        last_value: tv,
    })
}

/// Worst-start total variation `max_{s0} d_TV(P^h(s0,·), μ)` for
/// `h = 0..=horizon`.
pub fn tv_profile(chain: &MarkovChain, horizon: usize) -> Result<Vec<f64>> {
    let mu = steady_state(chain)?.mu;
    let n = chain.n_states();
    let mut rows = identity_rows(n);
    let mut scratch = vec![0.0; n];
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(worst_tv(&rows, &mu));
    for _ in 0..horizon {
        advance(chain, &mut rows, &mut scratch);
        out.push(worst_tv(&rows, &mu));
    }
    Ok(out)
}

/// Cesàro mixing time: the smallest `h ≥ 1` such that the averaged law
/// `(1/h) Σ_{t<h} P^t(s0, ·)` is within `ε` of `μ` for every start state.
/// Finite for periodic irreducible chains where [`exact_mixing_time`] is not.
pub fn cesaro_mixing_time(chain: &MarkovChain, eps: f64) -> Result<usize> {
    cesaro_mixing_time_capped(chain, eps, DEFAULT_HORIZON_CAP)
}

pub fn cesaro_mixing_time_capped(chain: &MarkovChain, eps: f64, cap: usize) -> Result<usize> {
    check_eps(eps)?;
    let mu = steady_state(chain)?.mu;
    let n = chain.n_states();
    let mut current = identity_rows(n);
    let mut sums = vec![vec![0.0; n]; n];
    let mut avg = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut tv = f64::INFINITY;
    for h in 1..=cap {
        tv = 0.0;
        for (sum, cur) in sums.iter_mut().zip(&current) {
            for ((s, c), a) in sum.iter_mut().zip(cur).zip(avg.iter_mut()) {
                *s += c;
                *a = *s / h as f64;
            }
            tv = f64::max(tv, total_variation(&avg, &mu));
        }
        if tv <= eps {
            return Ok(h);
        }
        advance(chain, &mut current, &mut scratch);
    }
    Err(Error::HorizonCap {
        cap,
        last_value: tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(p: &[Vec<f64>]) -> MarkovChain {
        MarkovChain::from_dense(p).unwrap()
    }

    #[test]
    fn stationary_rows_mix_immediately() {
        let c = chain(&[vec![0.3, 0.7], vec![0.3, 0.7]]);
        assert_eq!(exact_mixing_time(&c, 0.25).unwrap(), 1);
        // averaged law from state 0 at h=3 is (1.6/3, 1.4/3), TV 0.2333
        assert_eq!(cesaro_mixing_time(&c, 0.25).unwrap(), 3);
        let one = chain(&[vec![1.0]]);
        assert_eq!(exact_mixing_time(&one, 0.25).unwrap(), 0);
        assert_eq!(cesaro_mixing_time(&one, 0.25).unwrap(), 1);
    }

    #[test]
    fn lazy_two_state_matches_closed_form() {
        // TV after h steps is 0.5 * 0.5^h
        let c = chain(&[vec![0.75, 0.25], vec![0.25, 0.75]]);
        let profile = tv_profile(&c, 6).unwrap();
        for (h, tv) in profile.iter().enumerate() {
            assert!((tv - 0.5 * 0.5f64.powi(h as i32)).abs() < 1e-15);
        }
        assert_eq!(exact_mixing_time(&c, 0.25).unwrap(), 1);
        assert_eq!(exact_mixing_time(&c, 0.1).unwrap(), 3);
    }

    #[test]
    fn periodic_chain_needs_cesaro() {
        let c = chain(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        match exact_mixing_time_capped(&c, 0.3, 1000) {
            Err(Error::HorizonCap { cap, last_value }) => {
                assert_eq!(cap, 1000);
                assert!((last_value - 0.5).abs() < 1e-12);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
        // averages: h=1 -> TV 0.5, h=2 -> TV 0
        assert_eq!(cesaro_mixing_time(&c, 0.3).unwrap(), 2);
    }

    #[test]
    fn epsilon_range_is_checked() {
        let c = chain(&[vec![1.0]]);
        assert!(exact_mixing_time(&c, 0.0).is_err());
        assert!(cesaro_mixing_time(&c, 1.0).is_err());
    }
}
