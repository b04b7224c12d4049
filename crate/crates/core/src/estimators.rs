//! Off-policy value estimators over logged data.
//!
//! Three estimators share the same skeleton (1/n) Σ_t π(A_t|X_t)·R_t/D_t and
//! differ only in the denominator:
//!
//! * IW:  D_t = μ(A_t|X_t) — unbiased, unbounded weights;
//! * IX:  D_t = μ(A_t|X_t) + γ — biased low, every term capped by 1/γ;
//! * CIW: D_t = max{μ(A_t|X_t), γ} — the clipped-weights variant.
//!
//! All of them read the propensity stored in the record and never re-query
//! the behavior policy. On enumerable instances [`expected_ix_value`] gives
//! the exact expectation of a single IX term, which ties the estimator to the
//! identity E[ṽ_n(π)] = v(π) − γ·C_γ(π) used throughout the test suite.

use crate::bandit::{FiniteContextualBandit, LoggedDataset, TabularPolicy};
use crate::numeric::KahanSum;
use crate::{Error, Result};

/// Which estimator a caller wants, with its smoothing/clipping parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    Iw,
    Ix(f64),
    Ciw(f64),
}

impl EstimatorKind {
    pub fn estimate(self, dataset: &LoggedDataset, policy: &TabularPolicy) -> Result<f64> {
        match self {
            EstimatorKind::Iw => iw_estimate(dataset, policy),
            EstimatorKind::Ix(gamma) => ix_estimate(dataset, policy, gamma),
            EstimatorKind::Ciw(gamma) => ciw_estimate(dataset, policy, gamma),
        }
    }
}

#[inline]
fn check_record_bounds(dataset: &LoggedDataset, policy: &TabularPolicy) -> Result<()> {
    for r in dataset.records() {
        if r.context >= policy.num_contexts() || r.action >= policy.num_actions() {
            return Err(Error::config(format!(
                "record (context {}, action {}) out of range for a {}x{} policy",
                r.context,
                r.action,
                policy.num_contexts(),
                policy.num_actions()
            )));
        }
    }
    Ok(())
}

/// Shared accumulation. The per-record term is computed as
/// `π(A_t|X_t) * (R_t / D_t)` — policy probability times a gain — in exactly
/// the same order the CSC gain construction uses, so learner objectives and
/// estimator values agree bit for bit, ties included.
fn weighted_mean(
    dataset: &LoggedDataset,
    policy: &TabularPolicy,
    denom: impl Fn(f64) -> f64,
) -> f64 {
    let mut acc = KahanSum::new();
    for r in dataset.records() {
        acc.add(policy.prob(r.context, r.action) * (r.reward / denom(r.propensity)));
    }
    acc.value() / dataset.len() as f64
}

/// The plain importance-weighted estimator (1/n) Σ π(A_t|X_t)·R_t/μ(A_t|X_t).
/// Positive propensities are a dataset invariant, enforced at construction.
pub fn iw_estimate(dataset: &LoggedDataset, policy: &TabularPolicy) -> Result<f64> {
    ix_estimate(dataset, policy, 0.0)
}

/// The implicit-exploration estimator (1/n) Σ π(A_t|X_t)·R_t/(μ(A_t|X_t)+γ).
/// γ = 0 recovers [`iw_estimate`]; any γ > 0 bounds the result by 1/γ.
pub fn ix_estimate(dataset: &LoggedDataset, policy: &TabularPolicy, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::argument(format!("gamma = {gamma}, expected gamma >= 0")));
    }
    if dataset.is_empty() {
        return Err(Error::data("cannot estimate from an empty dataset"));
    }
    check_record_bounds(dataset, policy)?;
    Ok(weighted_mean(dataset, policy, |mu| mu + gamma))
}

/// The clipped-importance-weights estimator, denominator max{μ(A_t|X_t), γ}.
pub fn ciw_estimate(dataset: &LoggedDataset, policy: &TabularPolicy, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::argument(format!("gamma = {gamma}, expected gamma >= 0")));
    }
    if dataset.is_empty() {
        return Err(Error::data("cannot estimate from an empty dataset"));
    }
    check_record_bounds(dataset, policy)?;
    Ok(weighted_mean(dataset, policy, |mu| mu.max(gamma)))
}

/// Exact expectation of a single IX term on an enumerable instance:
/// Σ_{x,a} ν(x)·μ(a|x)·π(a|x)·r(x,a)/(μ(a|x)+γ). Equals
/// `policy_value − γ·smoothed_coverage_ratio` up to roundoff; at γ = 0 it is
/// the policy value itself whenever the behavior covers the policy.
pub fn expected_ix_value(
    instance: &FiniteContextualBandit,
    policy: &TabularPolicy,
    behavior: &TabularPolicy,
    gamma: f64,
) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::argument(format!("gamma = {gamma}, expected gamma >= 0")));
    }
    // Shape checks happen inside the instance accessors below.
    let _ = instance.policy_value(policy)?;
    let _ = instance.policy_value(behavior)?;
    let mut acc = KahanSum::new();
    for (x, &nu) in instance.context_probs().iter().enumerate() {
        if nu == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for a in 0..instance.num_actions() {
            let mu = behavior.prob(x, a);
            let weight = nu * mu;
            if weight == 0.0 {
                continue;
            }
            let contribution = policy.prob(x, a) * instance.mean_reward(x, a) / (mu + gamma);
            inner += mu * contribution;
        }
        acc.add(nu * inner);
    }
    Ok(acc.value())
}

/// The tuning rule γ = √(log(2|Π|/δ)/n) that balances the concentration and
/// bias terms of the IX regret bound.
pub fn recommended_gamma(class_size: usize, delta: f64, n: usize) -> Result<f64> {
    if class_size == 0 {
        return Err(Error::argument("class_size must be at least 1"));
    }
    if n == 0 {
        return Err(Error::argument("n must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::argument(format!("delta = {delta}, expected delta in (0,1)")));
    }
    Ok(((2.0 * class_size as f64 / delta).ln() / n as f64).sqrt())
}
