//! Tabular average-reward reinforcement learning and Markov-chain mixing
//! analysis for scalable MDP families.
//!
//! The crate is organised bottom-up:
//!
//! - [`mdp`]: finite MDPs, policies, induced chains and the exact
//!   steady-state / average-reward / bias solvers.
//! - [`chain`]: mixing times (distributional, Cesàro and return-based),
//!   hitting times and diameters, bottleneck ratios and spectral gaps.
//! - [`envs`]: generators for the scalable environment families (goal grid,
//!   rooms, passively switching rooms, the 3-D task grid).
//! - [`agents`]: ρ-learning (on- and off-policy), tabular Q-learning
//!   baselines, Dyna, model-based n-step TD and a small REINFORCE network.
//! - [`harness`]: lifelong-regret runs, hyperparameter sweeps, scaling
//!   studies, file formats and the command-line front end.
//!
//! ```
//! use polymix::mdp::{MarkovChain, steady_state};
//!
//! let chain = MarkovChain::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
//! let mu = steady_state(&chain).unwrap();
//! assert!((mu.mu[0] - 2.0 / 3.0).abs() < 1e-12);
//! ```

pub mod agents;
pub mod chain;
pub mod envs;
mod error;
pub mod harness;
mod linalg;
pub mod mdp;
pub mod reservoir;
pub mod rng;

pub use error::{Error, Result};
pub(crate) use error::invalid;
