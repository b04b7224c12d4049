//! Distributions over a policy class: KL divergence, Gibbs posteriors, and
//! distribution-level functionals.
//!
//! The Gibbs posterior reweights a prior by exp(λ·ṽ_n(π)) with λ = 2γn. It is
//! the exact maximizer of ṽ_n(Q) − KL(Q‖P)/λ over all distributions on the
//! class, which is what the variational-optimality test asserts. Exponents are
//! max-shifted before exponentiation: λ·ṽ_n can exceed 700 at realistic n and
//! would overflow naïvely.

use crate::bandit::{LoggedDataset, PolicyClass};
use crate::estimators::ix_estimate;
use crate::numeric::{kahan_sum, normalized_probabilities};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A probability distribution over the members of a [`PolicyClass`], indexed
/// in class order. Weights sum to 1 within 1e-12 (renormalized on
/// construction when inside the tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDistribution {
    weights: Vec<f64>,
}

impl PolicyDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let weights = normalized_probabilities(&weights, "policy distribution")?;
        Ok(PolicyDistribution { weights })
    }

    /// Build from arbitrary nonnegative weights by normalizing. Zero total
    /// mass is an argument error.
    pub fn from_unnormalized(weights: &[f64]) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::argument(format!(
                    "weight {i} is {w}, expected finite and nonnegative"
                )));
            }
        }
        let total = kahan_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(Error::argument("distribution has zero total mass"));
        }
        // Already-normalized input passes through bit-identical, so
        // normalizing is idempotent and distributions survive write/read
        // cycles exactly.
        if (total - 1.0).abs() <= crate::numeric::PROB_TOLERANCE {
            return Ok(PolicyDistribution {
                weights: weights.to_vec(),
            });
        }
        Ok(PolicyDistribution {
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::argument("distribution over an empty class"));
        }
        Ok(PolicyDistribution {
            weights: vec![1.0 / len as f64; len],
        })
    }

    pub fn point_mass(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::argument(format!(
                "point mass at {index} outside a class of {len}"
            )));
        }
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        Ok(PolicyDistribution { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }
}

/// KL(q‖p) = Σ q_i log(q_i/p_i), with 0·log(0/·) = 0 and +∞ whenever q puts
/// mass where p has none. Both distributions must index the same class.
pub fn kl_divergence(q: &PolicyDistribution, p: &PolicyDistribution) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::argument(format!(
            "KL between distributions over {} and {} policies",
            q.len(),
            p.len()
        )));
    }
    let mut total = 0.0;
    for (&qi, &pi) in q.weights.iter().zip(&p.weights) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += qi * (qi / pi).ln();
    }
    Ok(total)
}

/// Expectation Σ_i q_i·f_i of per-policy values under a distribution. Values
/// at zero-weight indices are ignored, so f only needs to be meaningful on
/// the support (a policy with infinite coverage outside the support must not
/// poison the sum).
pub fn distribution_functional(f: &[f64], q: &PolicyDistribution) -> Result<f64> {
    if f.len() != q.len() {
        return Err(Error::argument(format!(
            "functional over {} values for a distribution over {}",
            f.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (&fi, &qi) in f.iter().zip(&q.weights) {
        if qi > 0.0 {
            total += qi * fi;
        }
    }
    Ok(total)
}

/// The inverse-temperature rule λ = 2γn paired with the Gibbs posterior.
pub fn gibbs_lambda(gamma: f64, n: usize) -> f64 {
    2.0 * gamma * n as f64
}

/// Gibbs reweighting of a prior by per-policy value estimates at a given λ:
/// weights_i ∝ prior_i · exp(λ·estimates_i). Zero-prior members stay at zero
/// (the posterior is absolutely continuous with respect to the prior).
pub fn gibbs_from_estimates(
    estimates: &[f64],
    prior: &PolicyDistribution,
    lambda: f64,
) -> Result<PolicyDistribution> {
    if estimates.len() != prior.len() {
        return Err(Error::argument(format!(
            "{} estimates for a prior over {} policies",
            estimates.len(),
            prior.len()
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::argument(format!(
            "lambda = {lambda}, expected finite and nonnegative"
        )));
    }
    // Max-shift over the supported members only.
    let shift = estimates
        .iter()
        .zip(prior.weights())
        .filter(|(_, &p)| p > 0.0)
        .map(|(&e, _)| lambda * e)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(Error::argument("prior has zero total mass"));
    }
    let raw: Vec<f64> = estimates
        .iter()
        .zip(prior.weights())
        .map(|(&e, &p)| {
            if p > 0.0 {
                p * (lambda * e - shift).exp()
            } else {
                0.0
            }
        })
        .collect();
    PolicyDistribution::from_unnormalized(&raw)
}

/// The Gibbs posterior over a class given logged data: prior reweighted by
/// exp(λ·ṽ_n(π)) with ṽ_n the IX estimate and λ = 2γn.
pub fn gibbs_posterior(
    dataset: &LoggedDataset,
    class: &PolicyClass,
    prior: &PolicyDistribution,
    gamma: f64,
) -> Result<PolicyDistribution> {
    if !(gamma > 0.0) {
        return Err(Error::argument(format!("gamma = {gamma}, expected gamma > 0")));
    }
    gibbs_posterior_with_lambda(dataset, class, prior, gamma, gibbs_lambda(gamma, dataset.len()))
}

/// [`gibbs_posterior`] with an explicit λ override. The λ = 2γn coupling is
/// the documented default; overrides exist for limit checks and diagnostics.
pub fn gibbs_posterior_with_lambda(
    dataset: &LoggedDataset,
    class: &PolicyClass,
    prior: &PolicyDistribution,
    gamma: f64,
    lambda: f64,
) -> Result<PolicyDistribution> {
    if prior.len() != class.len() {
        return Err(Error::argument(format!(
            "prior over {} policies for a class of {}",
            prior.len(),
            class.len()
        )));
    }
    let estimates = class
        .iter()
        .map(|p| ix_estimate(dataset, p, gamma))
        .collect::<Result<Vec<_>>>()?;
    gibbs_from_estimates(&estimates, prior, lambda)
}

/// Draw a class index from a distribution by inverse-CDF walk in class-index
/// order; deterministic per seed.
pub fn sample_policy(q: &PolicyDistribution, seed: u64) -> usize {
    let mut rng = SplitMix64::new(seed);
    let u = rng.next_f64();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &w) in q.weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        cum += w;
        last_positive = i;
        if u < cum {
            return i;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{random_instance, random_policy, random_policy_class, NoiseModel};
    use crate::rng::derive_seed;

    #[test]
    fn kl_closed_forms() {
        let p = PolicyDistribution::uniform(2).unwrap();
        let q = PolicyDistribution::point_mass(2, 0).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!((kl_divergence(&q, &p).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let q = PolicyDistribution::new(vec![0.75, 0.25]).unwrap();
        assert!((kl_divergence(&q, &p).unwrap() - 0.13081203594113697).abs() < 1e-15);
        // Mass outside the prior support → +∞.
        let narrow = PolicyDistribution::point_mass(2, 1).unwrap();
        let q = PolicyDistribution::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(kl_divergence(&q, &narrow).unwrap(), f64::INFINITY);
        // Mismatched classes are an error, not a silent zero.
        assert!(kl_divergence(&PolicyDistribution::uniform(3).unwrap(), &p).is_err());
    }

    #[test]
    fn gibbs_closed_form_and_identity_cases() {
        let prior = PolicyDistribution::uniform(2).unwrap();
        let post = gibbs_from_estimates(&[0.6, 0.3], &prior, 10.0).unwrap();
        assert!((post.weight(0) - 0.9525741268224334).abs() < 1e-12);
        assert!((post.weight(1) - 0.0474258731775666).abs() < 1e-12);

        // Equal estimates leave the prior untouched.
        let post = gibbs_from_estimates(&[0.4, 0.4], &prior, 50.0).unwrap();
        assert_eq!(post.weights(), prior.weights());

        // λ → 0 recovers the prior.
        let skew = PolicyDistribution::new(vec![0.9, 0.1]).unwrap();
        let post = gibbs_from_estimates(&[0.9, 0.1], &skew, 1e-9).unwrap();
        for (w, p) in post.weights().iter().zip(skew.weights()) {
            assert!((w - p).abs() < 1e-8);
        }
    }

    #[test]
    fn gibbs_survives_huge_exponents() {
        let prior = PolicyDistribution::uniform(3).unwrap();
        // λ·ṽ up to 2·0.5·10^6 · 2 = 10^6: naive exp overflows.
        let post = gibbs_from_estimates(&[2.0, 1.0, 0.0], &prior, 1e6).unwrap();
        assert!(post.weights().iter().all(|w| w.is_finite()));
        assert!((kahan_sum(post.weights().iter().copied()) - 1.0).abs() < 1e-12);
        assert!(post.weight(0) > 0.999999);
    }

    #[test]
    fn posterior_keeps_prior_support() {
        let prior = PolicyDistribution::new(vec![0.5, 0.0, 0.5]).unwrap();
        let post = gibbs_from_estimates(&[0.1, 100.0, 0.2], &prior, 5.0).unwrap();
        assert_eq!(post.weight(1), 0.0);
        // All-zero prior cannot be built in the first place.
        assert!(PolicyDistribution::from_unnormalized(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn dataset_route_matches_estimate_route() {
        let inst = random_instance(4, 3, NoiseModel::Bernoulli, 5);
        let mu = random_policy(4, 3, 6);
        let class = random_policy_class(5, 4, 3, 7);
        let d = inst.sample_dataset(&mu, 50, 8).unwrap();
        let gamma = 0.2;
        let prior = PolicyDistribution::uniform(5).unwrap();
        let via_dataset = gibbs_posterior(&d, &class, &prior, gamma).unwrap();
        let estimates: Vec<f64> = class
            .iter()
            .map(|p| ix_estimate(&d, p, gamma).unwrap())
            .collect();
        let via_estimates =
            gibbs_from_estimates(&estimates, &prior, gibbs_lambda(gamma, 50)).unwrap();
        assert_eq!(via_dataset.weights(), via_estimates.weights());
    }

    #[test]
    fn functional_examples() {
        let q = PolicyDistribution::point_mass(3, 2).unwrap();
        assert_eq!(distribution_functional(&[1.0, 2.0, 3.0], &q).unwrap(), 3.0);
        let u = PolicyDistribution::uniform(2).unwrap();
        assert!((distribution_functional(&[0.75, 0.5], &u).unwrap() - 0.625).abs() < 1e-15);
        // Constants integrate to themselves, and +∞ off the support is inert.
        let q = PolicyDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            distribution_functional(&[0.7, f64::INFINITY], &q).unwrap(),
            0.7
        );
    }

    #[test]
    fn sampling_is_deterministic_and_respects_weights() {
        let q = PolicyDistribution::point_mass(4, 1).unwrap();
        for seed in 0..100 {
            assert_eq!(sample_policy(&q, seed), 1);
        }
        let u = PolicyDistribution::uniform(4).unwrap();
        let mut counts = [0usize; 4];
        let trials = 40_000;
        for seed in 0..trials {
            counts[sample_policy(&u, derive_seed(99, seed))] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.25).abs() < 0.01, "{counts:?}");
        }
        assert_eq!(sample_policy(&u, 42), sample_policy(&u, 42));
    }

    #[test]
    fn posterior_mass_on_best_policy_is_monotone_in_lambda() {
        for seed in 0..20u64 {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let k = 2 + (seed as usize % 6);
            let estimates: Vec<f64> = (0..k).map(|_| rng.next_f64()).collect();
            let prior_w: Vec<f64> = (0..k).map(|_| 0.1 + rng.next_f64()).collect();
            let prior = PolicyDistribution::from_unnormalized(&prior_w).unwrap();
            let best = crate::learners::argmax_lowest_index(&estimates);
            let mut prev = 0.0;
            for lambda in [0.0, 0.5, 1.0, 5.0, 25.0, 125.0] {
                let post = gibbs_from_estimates(&estimates, &prior, lambda).unwrap();
                let mass = post.weight(best);
                assert!(mass >= prev - 1e-12, "seed {seed} λ {lambda}: {mass} < {prev}");
                prev = mass;
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn kl_is_nonnegative_and_zero_only_at_equality(seed in 0u64..300) {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let k = 2 + (seed as usize % 5);
            let a: Vec<f64> = (0..k).map(|_| 0.01 + rng.next_f64()).collect();
            let b: Vec<f64> = (0..k).map(|_| 0.01 + rng.next_f64()).collect();
            let q = PolicyDistribution::from_unnormalized(&a).unwrap();
            let p = PolicyDistribution::from_unnormalized(&b).unwrap();
            proptest::prop_assert!(kl_divergence(&q, &p).unwrap() >= -1e-12);
            proptest::prop_assert!(kl_divergence(&q, &q).unwrap().abs() <= 1e-12);
        }

        #[test]
        fn gibbs_normalization_and_variational_optimality(seed in 0u64..100) {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let k = 2 + (seed as usize % 6);
            let estimates: Vec<f64> = (0..k).map(|_| rng.next_f64() * 2.0).collect();
            let prior = PolicyDistribution::from_unnormalized(
                &(0..k).map(|_| 0.05 + rng.next_f64()).collect::<Vec<_>>(),
            )
            .unwrap();
            let lambda = 0.1 + rng.next_f64() * 30.0;
            let post = gibbs_from_estimates(&estimates, &prior, lambda).unwrap();
            proptest::prop_assert!(
                (kahan_sum(post.weights().iter().copied()) - 1.0).abs() <= 1e-12
            );

            let objective = |q: &PolicyDistribution| -> f64 {
                distribution_functional(&estimates, q).unwrap()
                    - kl_divergence(q, &prior).unwrap() / lambda
            };
            let opt = objective(&post);
            for probe in 0..20 {
                let w: Vec<f64> = (0..k)
                    .map(|_| -(rng.next_f64().max(1e-12)).ln())
                    .collect();
                let q = PolicyDistribution::from_unnormalized(&w).unwrap();
                proptest::prop_assert!(
                    opt >= objective(&q) - 1e-9,
                    "seed {} probe {}: {} < {}",
                    seed,
                    probe,
                    opt,
                    objective(&q)
                );
            }
        }
    }
}
