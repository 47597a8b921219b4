//! Desk-scale laboratory for transferring control policies across dynamics gaps.
//!
//! The pipeline has two stages. First, a *universal policy* is trained with PPO
//! in a source environment whose physical parameters μ are resampled every
//! rollout, yielding a whole family of strategies π_μ parameterized by μ.
//! Second, the policy is deployed in a structurally different target
//! environment (different contact solver, latency, actuator curve, ...) and the
//! best strategy is found by searching directly over μ for maximal task return
//! — with CMA-ES as the primary search engine, plus Bayesian and model-based
//! alternatives — under the same target-sample budget granted to the
//! fine-tuning baselines (Robust, Hist, UPOSI).
//!
//! Modules:
//! - [`nn`]: minimal MLP/GRU machinery with exact hand-written gradients.
//! - [`envs`]: two micro-environments (`pendulum_x`, `hopper_lite`) plus
//!   composable reality-gap wrappers.
//! - [`ppo`]: rollout collection, GAE, clipped-surrogate updates.
//! - [`policies`]: universal/strategy, robust, history, and UPOSI policies.
//! - [`strategy`]: CMA-ES, Gaussian-process, and model-based strategy search.
//! - [`harness`]: experiment configs, the method-comparison protocol, CSV
//!   emission, and everything behind the `tlab` CLI.

pub mod budget;
pub mod checkpoint;
pub mod envs;
pub mod error;
pub mod harness;
pub mod nn;
pub mod policies;
pub mod ppo;
pub mod rng;
pub mod scalar;
pub mod strategy;

pub use error::{Error, Result};
pub use rng::LabRng;

/// Default scalar type for everything outside the generic [`nn`] kernels.
pub type Scalar = f64;

// Concrete aliases for the scalar-generic network machinery. The rest of the
// crate (physics, PPO, strategy search) is pinned to f64: its tolerances are
// stated in f64 terms.
pub type Mlp = nn::Mlp<f64>;
pub type Mlp32 = nn::Mlp<f32>;
pub type Adam = nn::Adam<f64>;
pub type GaussianHead = nn::GaussianHead<f64>;
pub type Gru = nn::Gru<f64>;
