//! Replay-memory fitted Q-learning for episodic fixed-horizon process control.
//!
//! The crate is organised bottom-up:
//!
//! - [`rng`]: named, seed-derived random substreams.
//! - [`mdp`]: the fixed-horizon environment contract, episode runner and replay memory.
//! - [`drawsim`]: a stochastic, partially observable surrogate of a deep-drawing plant.
//! - [`observer`]: history-concatenation surrogate states for three observability modes.
//! - [`neural`]: a small ReLU regression network trained full-batch with L-BFGS.
//! - [`qlearn`]: the per-step Q ensemble, exploration schedule and backward retraining.
//! - [`oracle`]: exhaustive enumeration and backward induction ground truth.
//! - [`harness`]: configuration, the training loop, metrics files and sweeps.

pub mod drawsim;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod neural;
pub mod observer;
pub mod oracle;
pub mod qlearn;
pub mod rng;

pub use error::{Error, Result};
