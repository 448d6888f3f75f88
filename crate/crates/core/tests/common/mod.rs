//! Random instances and brute-force oracles shared by the integration tests.
//! Nothing here calls the library's solvers.

#![allow(dead_code)]

use polymix::mdp::{MarkovChain, TabularMdp};
use polymix::rng::seeded;
use rand::Rng;

pub type Dense = Vec<Vec<f64>>;

/// Random distribution over a random support of 1..=n states.
pub fn random_row<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let k = rng.random_range(1..=n);
    let mut row = vec![0.0; n];
    for _ in 0..k {
        row[rng.random_range(0..n)] += rng.random_range(0.05..1.0);
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    row
}

/// Dense kernel with uniform smoothing `eps`, as `smooth_ergodic` defines it.
pub fn smoothed(rows: &Dense, eps: f64) -> Dense {
    rows.iter()
        .map(|r| {
            let n = r.len() as f64;
            r.iter().map(|p| (p + eps) / (1.0 + n * eps)).collect()
        })
        .collect()
}

/// Random chain on `n` states with smoothing `eps`, as a dense oracle
/// kernel and as the library type.
pub fn random_chain(n: usize, eps: f64, seed: u64) -> (Dense, MarkovChain) {
    let mut rng = seeded(seed);
    let base: Dense = (0..n).map(|_| random_row(n, &mut rng)).collect();
    let p = smoothed(&base, eps);
    let chain = MarkovChain::from_dense(&p).unwrap();
    (p, chain)
}

/// Lazy chain (self-loop ≥ 1/2) over a random cycle plus random extra edges,
/// without smoothing, so its support graph is sparse.
pub fn random_lazy_chain(n: usize, seed: u64) -> (Dense, MarkovChain) {
    let mut rng = seeded(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        let s = order[i];
        let mut out = vec![0.0; n];
        out[order[(i + 1) % n]] += 1.0;
        if rng.random_bool(0.3) {
            out[rng.random_range(0..n)] += rng.random_range(0.1..1.0);
        }
        let total: f64 = out.iter().sum();
        let lazy = rng.random_range(0.5..0.9);
        for j in 0..n {
            p[s][j] = (1.0 - lazy) * out[j] / total;
        }
        p[s][s] += lazy;
    }
    let chain = MarkovChain::from_dense(&p).unwrap();
    (p, chain)
}

/// Random MDP as dense `t[s][a][s']`, `r[s][a]`, with smoothing applied.
pub fn random_mdp(n: usize, m: usize, eps: f64, seed: u64) -> (Vec<Dense>, Dense, TabularMdp) {
    let mut rng = seeded(seed);
    let t: Vec<Dense> = (0..n)
        .map(|_| {
            let rows: Dense = (0..m).map(|_| random_row(n, &mut rng)).collect();
            smoothed(&rows, eps)
        })
        .collect();
    let r: Dense = (0..n).map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let mdp = TabularMdp::from_dense(&t, &r, Some(1.0)).unwrap();
    (t, r, mdp)
}

pub fn random_policy(n: usize, m: usize, seed: u64) -> Dense {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= total);
            row
        })
        .collect()
}

/// Triple-loop `P[s][s'] = Σ_a π(a|s) T[s][a][s']`.
pub fn induce(t: &[Dense], pi: &Dense) -> Dense {
    let n = t.len();
    let mut p = vec![vec![0.0; n]; n];
    for s in 0..n {
        for (a, row) in t[s].iter().enumerate() {
            for j in 0..n {
                p[s][j] += pi[s][a] * row[j];
            }
        }
    }
    p
}

pub fn step_dist(x: &[f64], p: &Dense) -> Vec<f64> {
    let n = p.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            y[j] += x[i] * p[i][j];
        }
    }
    y
}

/// Stationary vector by power iteration from the uniform vector.
pub fn power_iteration(p: &Dense, max_iter: usize) -> Vec<f64> {
    let n = p.len();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let y = step_dist(&x, p);
        let change = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if change < 1e-16 {
            break;
        }
    }
    x
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..n {
                    c[i][j] += aik * b[k][j];
                }
            }
        }
    }
    c
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Smallest `h ≥ 0` with `max_s TV(P^h(s,·), μ) ≤ eps`, by explicit powers.
pub fn brute_mixing_time(p: &Dense, mu: &[f64], eps: f64, cap: usize) -> Option<usize> {
    let n = p.len();
    let mut power: Dense = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for h in 0..=cap {
        if power.iter().map(|row| tv(row, mu)).fold(0.0, f64::max) <= eps {
            return Some(h);
        }
        power = matmul(&power, p);
    }
    None
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Dense, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Stationary vector from the balance equations with one row replaced by
/// the normalisation.
pub fn stationary(p: &Dense) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[j][i] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    solve(a, b)
}

/// First-step analysis: `m(s) = 1 + Σ_{s'≠target} P(s'|s) m(s')`.
pub fn hitting_to(p: &Dense, target: usize) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![1.0; n];
    for s in 0..n {
        a[s][s] = 1.0;
        if s == target {
            b[s] = 0.0;
            continue;
        }
        for j in 0..n {
            if j != target {
                a[s][j] -= p[s][j];
            }
        }
    }
    solve(a, b)
}

pub fn sample<R: Rng>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    row.len() - 1
}

/// Mean and standard error of the hitting time, by simulation.
pub fn simulate_hitting(p: &Dense, from: usize, to: usize, episodes: usize, seed: u64) -> (f64, f64) {
    let mut rng = seeded(seed);
    let mut xs = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let (mut s, mut t) = (from, 0u64);
        while s != to {
            s = sample(&p[s], &mut rng);
            t += 1;
        }
        xs.push(t as f64);
    }
    mean_se(&xs)
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Gain of a deterministic policy, from the oracle stationary vector.
pub fn gain(t: &[Dense], r: &Dense, actions: &[usize]) -> f64 {
    let n = t.len();
    let p: Dense = (0..n).map(|s| t[s][actions[s]].clone()).collect();
    let mu = stationary(&p);
    (0..n).map(|s| mu[s] * r[s][actions[s]]).sum()
}

/// Best gain over all `m^n` deterministic policies.
pub fn enumerate_optimum(t: &[Dense], r: &Dense) -> f64 {
    let n = t.len();
    let m = t[0].len();
    let mut actions = vec![0; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        best = best.max(gain(t, r, &actions));
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            actions[i] += 1;
            if actions[i] < m {
                break;
            }
            actions[i] = 0;
            i += 1;
        }
    }
}

/// Dense `(t, r)` view of a library MDP.
pub fn dense_mdp(mdp: &TabularMdp) -> (Vec<Dense>, Dense) {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let t = (0..n).map(|s| (0..m).map(|a| mdp.dense_row(s, a)).collect()).collect();
    let r = (0..n).map(|s| (0..m).map(|a| mdp.reward(s, a)).collect()).collect();
    (t, r)
}
