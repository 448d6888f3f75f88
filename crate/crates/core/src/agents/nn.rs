use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{invalid, Result};

/// Fully connected ReLU network with a linear output layer.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs; its weights
/// are stored row-major (`out × in`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// REINFORCE policy parameters and optimiser settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub net: Mlp,
    pub step_size: f64,
    pub entropy_coef: f64,
    pub grad_clip: f64,
}

/// One frozen policy-gradient sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub action: usize,
    pub reward: f64,
}

impl Mlp {
    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(invalid("an MLP needs at least two nonzero layer sizes"));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            weights.push((0..w[0] * w[1]).map(|_| rng.random_range(-bound..bound)).collect());
            biases.push(vec![0.0; w[1]]);
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            sizes: self.sizes.clone(),
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases).flatten()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.biases.iter_mut()).flatten()
    }

    /// Every layer's output; hidden layers after the ReLU.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let layers = self.weights.len();
        let mut acts = vec![x.to_vec()];
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let input = &acts[l];
            let w = &self.weights[l];
            let mut out = self.biases[l].clone();
            for (o, row) in out.iter_mut().zip(w.chunks(n_in)) {
                *o += row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
            }
            if l + 1 < layers {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            debug_assert_eq!(out.len(), n_out);
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).pop().unwrap_or_default()
    }

    /// Add `∂(gᵀ out)/∂θ` to `grad`, given the upstream gradient `g` of the
    /// output layer.
    fn backward(&self, acts: &[Vec<f64>], upstream: &[f64], grad: &mut Mlp) {
        let mut delta = upstream.to_vec();
        for l in (0..self.weights.len()).rev() {
            let n_in = self.sizes[l];
            let input = &acts[l];
            for (o, &dv) in delta.iter().enumerate() {
                grad.biases[l][o] += dv;
                if dv != 0.0 {
                    let row = &mut grad.weights[l][o * n_in..(o + 1) * n_in];
                    for (g, &x) in row.iter_mut().zip(input) {
                        *g += dv * x;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.weights[l];
            let mut back = vec![0.0; n_in];
            for (o, &dv) in delta.iter().enumerate() {
                if dv != 0.0 {
                    for (b, &wv) in back.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *b += dv * wv;
                    }
                }
            }
            // ReLU gate of the layer below
            for (b, &a) in back.iter_mut().zip(&acts[l]) {
                if a <= 0.0 {
                    *b = 0.0;
                }
            }
            delta = back;
        }
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

pub(crate) fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

impl PolicyParams {
    pub fn probabilities(&self, features: &[f64]) -> Vec<f64> {
        softmax(&self.net.forward(features))
    }

    /// Batch mean of `r · log π(a|x) + β H(π(·|x))`.
    pub fn surrogate(&self, batch: &[Sample]) -> f64 {
        let total: f64 = batch
            .iter()
            .map(|s| {
                let p = self.probabilities(&s.features);
                s.reward * p[s.action].ln() + self.entropy_coef * entropy(&p)
            })
            .sum();
        total / batch.len() as f64
    }

    /// Exact gradient of [`surrogate`](Self::surrogate).
    pub fn gradient(&self, batch: &[Sample]) -> Mlp {
        let mut grad = self.net.zeros_like();
        let scale = 1.0 / batch.len() as f64;
        for s in batch {
            let acts = self.net.activations(&s.features);
            let p = softmax(acts.last().expect("output layer"));
            let logp: Vec<f64> = p.iter().map(|v| v.max(1e-300).ln()).collect();
            let h = entropy(&p);
            let upstream: Vec<f64> = (0..p.len())
                .map(|j| {
                    let onehot = if j == s.action { 1.0 } else { 0.0 };
                    let pg = s.reward * (onehot - p[j]);
                    let ent = -p[j] * (logp[j] + h);
                    scale * (pg + self.entropy_coef * ent)
                })
                .collect();
            self.net.backward(&acts, &upstream, &mut grad);
        }
        grad
    }

    /// One ascent step on the surrogate with the gradient norm clipped.
    /// Returns the clipped gradient norm.
    pub fn ascend(&mut self, batch: &[Sample]) -> f64 {
        let grad = self.gradient(batch);
        let norm = grad.params().map(|g| g * g).sum::<f64>().sqrt();
        let factor = if norm > self.grad_clip { self.grad_clip / norm } else { 1.0 };
        for (p, g) in self.net.params_mut().zip(grad.params()) {
            *p += self.step_size * factor * g;
        }
        norm * factor
    }
}
