//! Offline policy learning for finite contextual bandits from logged data.
//!
//! The crate centers on importance-weighted value estimation with a smoothed
//! denominator: adding a constant `gamma` to each logged propensity caps
//! every weight at `1/gamma`, trading a small downward bias for
//! exponential-tail concentration that the plain estimator lacks. On top of
//! that sit pessimistic learners (pick the policy with the best smoothed
//! estimate, which implicitly penalizes poor logging coverage), their
//! distribution-level analogues (Gibbs posteriors with exponential-weight
//! updates), and Monte Carlo harnesses that stress the deviation and regret
//! guarantees on concrete instances.
//!
//! Module map:
//! - [`bandit`]: instances, tabular policies, logged datasets, exact values
//!   and coverage functionals.
//! - [`estimators`]: importance-weighted, smoothed, and clipped value
//!   estimates plus the recommended smoothing level.
//! - [`learners`]: offline learners over finite policy classes and the
//!   cost-sensitive-classification reduction.
//! - [`pac_bayes`]: distributions over policy classes, KL divergence, Gibbs
//!   posteriors.
//! - [`tails`]: randomized bound checks — deviation and regret targets
//!   evaluated over thousands of independent datasets.
//! - [`experiment`]: classification-to-bandit conversion, ridge regression,
//!   and the hyperparameter-sensitivity sweep.
//! - [`io`]: TOML/CSV readers and writers for every artifact above.
//!
//! Everything is deterministic given a seed: datasets, probe distributions,
//! synthetic tables, and sweeps all derive their randomness from named
//! substreams of a single `u64`, so any reported number can be reproduced
//! from the command line it came from.

pub mod bandit;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod io;
pub mod learners;
pub mod numeric;
pub mod pac_bayes;
pub mod rng;
pub mod tails;

pub use error::{Error, Result};
