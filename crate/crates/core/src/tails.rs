//! Monte-Carlo verification of the concentration and regret guarantees on
//! enumerable instances.
//!
//! Every guarantee has the shape "with probability at least 1−δ over the
//! logged data set, deviation ≤ bound". On a finite instance both sides are
//! computable: true policy values and coverage ratios come from enumeration,
//! the estimate from the logged data, and the bound from its closed form. A
//! check draws `trials` independent data sets and counts the trials where the
//! inequality fails anywhere it is quantified (at most one violation per
//! trial, matching the union-bounded statements). The empirical violation
//! rate must stay below δ plus a three-sigma binomial slack.
//!
//! Distribution-level ("for all Q") targets cannot be enumerated; they are
//! checked on a fixed probe set — every point mass, the uniform distribution,
//! and a seeded batch of random mixtures — which exercises both the low- and
//! high-KL regimes. This is deliberately a partial check.
//!
//! Trials are independent: trial t draws its data set from the substream
//! `derive_seed(seed, t)`, so runs parallelize freely and reduce to the same
//! counts in any order. The probe mixtures draw from the reserved substream
//! tag [`PROBE_STREAM_TAG`], which no trial index can collide with.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{FiniteContextualBandit, LoggedDataset, PolicyClass, TabularPolicy};
use crate::estimators::{ix_estimate, recommended_gamma};
use crate::learners::{best_in_class, coverage_scaled_gammas, coverage_scaled_piwo_ix, piwo_ix};
use crate::numeric::kahan_sum;
use crate::pac_bayes::{
    distribution_functional, gibbs_from_estimates, gibbs_lambda, kl_divergence,
    PolicyDistribution,
};
use crate::rng::{derive_seed, SplitMix64};
use crate::{Error, Result};

/// Substream tag reserved for probe-mixture generation ("probe" in ASCII);
/// far above any realistic trial count, so probe draws never reuse a trial's
/// data stream.
pub const PROBE_STREAM_TAG: u64 = 0x70_72_6f_62_65;

/// Which guarantee a bound check exercises.
///
/// The two tails bound the estimate from above and below uniformly over the
/// class; the PAC-Bayes variants do the same for distributions over the
/// class with a KL penalty instead of a union bound; the regret targets
/// bound the value gap between a comparator and the learned policy (or
/// learned posterior).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundTarget {
    /// ṽ_n(π) − v(π) ≤ log(|Π|/δ)/(2γn) for all π simultaneously.
    UpperTail,
    /// v(π) − ṽ_n(π) ≤ log(|Π|/δ)/(2γn) + 2γ·C_γ(π) for all π simultaneously.
    LowerTail,
    /// ṽ_n(Q) − v(Q) ≤ (KL(Q‖P) + log(1/δ))/(2γn) on the probe set.
    PacBayesUpperTail,
    /// v(Q) − ṽ_n(Q) ≤ (KL(Q‖P) + log(1/δ))/(2γn) + 2γ·C_γ(Q) on the probe set.
    PacBayesLowerTail,
    /// v(π*) − v(π̂_n) ≤ log(2|Π|/δ)/(γn) + 2γ·C_γ(π*) for π̂_n from `piwo_ix`.
    IxRegret,
    /// v(Q*) − v(Q̂_n) ≤ (KL(Q*‖P) + log(1/δ))/(γn) + 2γ·C_γ(Q*) for the
    /// Gibbs posterior Q̂_n, each probe playing Q*.
    PacBayesRegret,
    /// v(π*) − v(π̂_n) ≤ √(8·C_0(π*)·log(2|Π|/δ)/n) for π̂_n from
    /// `coverage_scaled_piwo_ix` under its own per-policy gamma schedule.
    CoverageScaledRegret,
}

impl BoundTarget {
    /// Targets quantified over distributions, checked on the probe set.
    pub fn uses_probes(self) -> bool {
        matches!(
            self,
            BoundTarget::PacBayesUpperTail
                | BoundTarget::PacBayesLowerTail
                | BoundTarget::PacBayesRegret
        )
    }

    /// Targets driven by a single scalar γ (everything except the
    /// coverage-scaled learner, which derives one γ per policy).
    pub fn uses_scalar_gamma(self) -> bool {
        !matches!(self, BoundTarget::CoverageScaledRegret)
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundTarget::UpperTail => "upper-tail",
            BoundTarget::LowerTail => "lower-tail",
            BoundTarget::PacBayesUpperTail => "pac-bayes-upper-tail",
            BoundTarget::PacBayesLowerTail => "pac-bayes-lower-tail",
            BoundTarget::IxRegret => "ix-regret",
            BoundTarget::PacBayesRegret => "pac-bayes-regret",
            BoundTarget::CoverageScaledRegret => "coverage-scaled-regret",
        }
    }
}

impl std::fmt::Display for BoundTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully-specified bound check. Build with [`BoundCheck::new`], adjust the
/// optional knobs with the `with_*` methods, and execute with
/// [`BoundCheck::run`].
#[derive(Debug, Clone)]
pub struct BoundCheck<'a> {
    pub target: BoundTarget,
    pub instance: &'a FiniteContextualBandit,
    pub behavior: &'a TabularPolicy,
    pub class: &'a PolicyClass,
    /// Reference distribution for PAC-Bayes targets; `None` means uniform.
    pub prior: Option<PolicyDistribution>,
    /// Comparator index for regret targets; `None` means best-in-class.
    pub comparator: Option<usize>,
    /// Logged interactions per trial.
    pub n: usize,
    /// Scalar smoothing parameter; `None` resolves to
    /// [`recommended_gamma`]`(|Π|, δ, n)`. Must stay unset for
    /// [`BoundTarget::CoverageScaledRegret`].
    pub gamma: Option<f64>,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Number of random mixtures appended to the probe set.
    pub probe_mixtures: usize,
}

impl<'a> BoundCheck<'a> {
    pub fn new(
        target: BoundTarget,
        instance: &'a FiniteContextualBandit,
        behavior: &'a TabularPolicy,
        class: &'a PolicyClass,
        n: usize,
        delta: f64,
        trials: usize,
        seed: u64,
    ) -> Self {
        BoundCheck {
            target,
            instance,
            behavior,
            class,
            prior: None,
            comparator: None,
            n,
            gamma: None,
            delta,
            trials,
            seed,
            probe_mixtures: 10,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_prior(mut self, prior: PolicyDistribution) -> Self {
        self.prior = Some(prior);
        self
    }

    pub fn with_comparator(mut self, comparator: usize) -> Self {
        self.comparator = Some(comparator);
        self
    }

    pub fn with_probe_mixtures(mut self, probe_mixtures: usize) -> Self {
        self.probe_mixtures = probe_mixtures;
        self
    }

    pub fn run(&self) -> Result<ViolationReport> {
        run_bound_check(self)
    }
}

/// Outcome of a bound check: violation counts against the δ + slack budget
/// plus summary statistics of the right-hand sides and the tightest margin
/// observed across all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub target: BoundTarget,
    pub trials: usize,
    pub violations: usize,
    pub violation_rate: f64,
    pub delta: f64,
    /// Three-sigma binomial tolerance 3·√(δ(1−δ)/trials) on the empirical
    /// rate.
    pub slack: f64,
    /// The resolved scalar γ; `None` for the coverage-scaled target, which
    /// runs its own per-policy schedule.
    pub gamma: Option<f64>,
    pub bound_min: f64,
    pub bound_mean: f64,
    pub bound_max: f64,
    /// min over trials of (bound − deviation); negative iff any violation.
    pub min_margin: f64,
    pub passed: bool,
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "bound check: {}", self.target)?;
        writeln!(f, "  trials:      {}", self.trials)?;
        writeln!(
            f,
            "  violations:  {} (rate {:.6}, budget {:.6})",
            self.violations,
            self.violation_rate,
            self.delta + self.slack
        )?;
        match self.gamma {
            Some(g) => writeln!(f, "  gamma:       {g}")?,
            None => writeln!(f, "  gamma:       per-policy")?,
        }
        writeln!(
            f,
            "  bound rhs:   min {:.6}  mean {:.6}  max {:.6}",
            self.bound_min, self.bound_mean, self.bound_max
        )?;
        writeln!(f, "  min margin:  {:.6}", self.min_margin)?;
        write!(f, "  passed:      {}", self.passed)
    }
}

/// The probe set for distribution-level targets: one point mass per class
/// member, the uniform distribution, then `mixtures` random draws from the
/// flat Dirichlet (exponentials of the probe substream, normalized).
pub fn probe_distributions(
    class_len: usize,
    mixtures: usize,
    seed: u64,
) -> Result<Vec<PolicyDistribution>> {
    if class_len == 0 {
        return Err(Error::argument("probe set over an empty class"));
    }
    let mut probes = Vec::with_capacity(class_len + 1 + mixtures);
    for i in 0..class_len {
        probes.push(PolicyDistribution::point_mass(class_len, i)?);
    }
    probes.push(PolicyDistribution::uniform(class_len)?);
    let mut rng = SplitMix64::new(derive_seed(seed, PROBE_STREAM_TAG));
    for _ in 0..mixtures {
        let raw: Vec<f64> = (0..class_len)
            .map(|_| -(rng.next_f64().max(f64::MIN_POSITIVE)).ln())
            .collect();
        probes.push(PolicyDistribution::from_unnormalized(&raw)?);
    }
    Ok(probes)
}

fn class_estimates(
    dataset: &LoggedDataset,
    class: &PolicyClass,
    gamma: f64,
) -> Result<Vec<f64>> {
    class.iter().map(|p| ix_estimate(dataset, p, gamma)).collect()
}

/// Execute a bound check: draw `trials` data sets, evaluate deviation against
/// the exact right-hand side(s), and summarize. Deterministic per seed.
pub fn run_bound_check(check: &BoundCheck<'_>) -> Result<ViolationReport> {
    if check.trials == 0 {
        return Err(Error::argument("trials = 0, expected at least one trial"));
    }
    if check.n == 0 {
        return Err(Error::argument("n = 0, expected at least one interaction"));
    }
    if !(check.delta > 0.0 && check.delta < 1.0) {
        return Err(Error::argument(format!(
            "delta = {}, expected delta in (0,1)",
            check.delta
        )));
    }
    check.instance.check_policy(check.behavior, "behavior policy")?;
    for policy in check.class.iter() {
        check.instance.check_policy(policy, "class policy")?;
    }
    if let Some(c) = check.comparator {
        if c >= check.class.len() {
            return Err(Error::argument(format!(
                "comparator {} outside a class of {}",
                c,
                check.class.len()
            )));
        }
    }
    if let Some(prior) = &check.prior {
        if prior.len() != check.class.len() {
            return Err(Error::argument(format!(
                "prior over {} policies for a class of {}",
                prior.len(),
                check.class.len()
            )));
        }
    }

    let class_len = check.class.len();
    let nf = check.n as f64;
    let delta = check.delta;
    let gamma = if check.target.uses_scalar_gamma() {
        let g = match check.gamma {
            Some(g) => g,
            None => recommended_gamma(class_len, delta, check.n)?,
        };
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::argument(format!(
                "gamma = {g}, this bound is vacuous unless gamma > 0"
            )));
        }
        Some(g)
    } else {
        if check.gamma.is_some() {
            return Err(Error::argument(
                "the coverage-scaled target derives its own per-policy gammas; leave gamma unset",
            ));
        }
        None
    };

    let values = check
        .class
        .iter()
        .map(|p| check.instance.policy_value(p))
        .collect::<Result<Vec<_>>>()?;

    // Per-target preparation: the exact right-hand sides (fixed across
    // trials) and the per-trial worst margin, min over everything the
    // guarantee quantifies. A trial violates iff its margin is negative.
    type TrialFn<'f> = Box<dyn Fn(&LoggedDataset) -> Result<f64> + Send + Sync + 'f>;
    let class = check.class;
    let (rhs, trial_margin): (Vec<f64>, TrialFn<'_>) = match check.target {
        BoundTarget::UpperTail => {
            let g = gamma.unwrap();
            let bound = (class_len as f64 / delta).ln() / (2.0 * g * nf);
            let values = values.clone();
            (
                vec![bound],
                Box::new(move |ds| {
                    let est = class_estimates(ds, class, g)?;
                    Ok(est
                        .iter()
                        .zip(&values)
                        .map(|(e, v)| bound - (e - v))
                        .fold(f64::INFINITY, f64::min))
                }),
            )
        }
        BoundTarget::LowerTail => {
            let g = gamma.unwrap();
            let base = (class_len as f64 / delta).ln() / (2.0 * g * nf);
            let rhs = check
                .class
                .iter()
                .map(|p| {
                    Ok(base + 2.0 * g * check.instance.smoothed_coverage_ratio(p, check.behavior, g)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let values = values.clone();
            let rhs_inner = rhs.clone();
            (
                rhs,
                Box::new(move |ds| {
                    let est = class_estimates(ds, class, g)?;
                    Ok(est
                        .iter()
                        .zip(&values)
                        .zip(&rhs_inner)
                        .map(|((e, v), b)| b - (v - e))
                        .fold(f64::INFINITY, f64::min))
                }),
            )
        }
        BoundTarget::PacBayesUpperTail | BoundTarget::PacBayesLowerTail => {
            let g = gamma.unwrap();
            let upper = check.target == BoundTarget::PacBayesUpperTail;
            let prior = match &check.prior {
                Some(p) => p.clone(),
                None => PolicyDistribution::uniform(class_len)?,
            };
            let probes = probe_distributions(class_len, check.probe_mixtures, check.seed)?;
            let cgammas = check
                .class
                .iter()
                .map(|p| check.instance.smoothed_coverage_ratio(p, check.behavior, g))
                .collect::<Result<Vec<_>>>()?;
            let mut rhs = Vec::with_capacity(probes.len());
            let mut probe_values = Vec::with_capacity(probes.len());
            for q in &probes {
                let mut b = (kl_divergence(q, &prior)? + (1.0 / delta).ln()) / (2.0 * g * nf);
                if !upper {
                    b += 2.0 * g * distribution_functional(&cgammas, q)?;
                }
                rhs.push(b);
                probe_values.push(distribution_functional(&values, q)?);
            }
            let rhs_inner = rhs.clone();
            (
                rhs,
                Box::new(move |ds| {
                    let est = class_estimates(ds, class, g)?;
                    let mut margin = f64::INFINITY;
                    for (i, q) in probes.iter().enumerate() {
                        let est_q = distribution_functional(&est, q)?;
                        let dev = if upper {
                            est_q - probe_values[i]
                        } else {
                            probe_values[i] - est_q
                        };
                        margin = margin.min(rhs_inner[i] - dev);
                    }
                    Ok(margin)
                }),
            )
        }
        BoundTarget::IxRegret => {
            let g = gamma.unwrap();
            let star = match check.comparator {
                Some(c) => c,
                None => best_in_class(check.instance, class)?,
            };
            let cgamma_star =
                check
                    .instance
                    .smoothed_coverage_ratio(class.get(star), check.behavior, g)?;
            let bound = (2.0 * class_len as f64 / delta).ln() / (g * nf) + 2.0 * g * cgamma_star;
            let vstar = values[star];
            let values = values.clone();
            (
                vec![bound],
                Box::new(move |ds| {
                    let learned = piwo_ix(ds, class, g)?;
                    Ok(bound - (vstar - values[learned]))
                }),
            )
        }
        BoundTarget::PacBayesRegret => {
            let g = gamma.unwrap();
            let lambda = gibbs_lambda(g, check.n);
            let prior = match &check.prior {
                Some(p) => p.clone(),
                None => PolicyDistribution::uniform(class_len)?,
            };
            let probes = probe_distributions(class_len, check.probe_mixtures, check.seed)?;
            let cgammas = check
                .class
                .iter()
                .map(|p| check.instance.smoothed_coverage_ratio(p, check.behavior, g))
                .collect::<Result<Vec<_>>>()?;
            let mut rhs = Vec::with_capacity(probes.len());
            let mut probe_values = Vec::with_capacity(probes.len());
            for q in &probes {
                rhs.push(
                    (kl_divergence(q, &prior)? + (1.0 / delta).ln()) / (g * nf)
                        + 2.0 * g * distribution_functional(&cgammas, q)?,
                );
                probe_values.push(distribution_functional(&values, q)?);
            }
            let rhs_inner = rhs.clone();
            let values = values.clone();
            (
                rhs,
                Box::new(move |ds| {
                    let est = class_estimates(ds, class, g)?;
                    let posterior = gibbs_from_estimates(&est, &prior, lambda)?;
                    let v_post = distribution_functional(&values, &posterior)?;
                    Ok(probe_values
                        .iter()
                        .zip(&rhs_inner)
                        .map(|(vq, b)| b - (vq - v_post))
                        .fold(f64::INFINITY, f64::min))
                }),
            )
        }
        BoundTarget::CoverageScaledRegret => {
            let gammas =
                coverage_scaled_gammas(class, check.instance, check.behavior, delta, check.n)?;
            let star = match check.comparator {
                Some(c) => c,
                None => best_in_class(check.instance, class)?,
            };
            let c0_star = check.instance.coverage_ratio(class.get(star), check.behavior)?;
            let bound = (8.0 * c0_star * (2.0 * class_len as f64 / delta).ln() / nf).sqrt();
            let vstar = values[star];
            let values = values.clone();
            (
                vec![bound],
                Box::new(move |ds| {
                    let learned = coverage_scaled_piwo_ix(ds, class, &gammas, delta)?;
                    Ok(bound - (vstar - values[learned]))
                }),
            )
        }
    };

    let (violations, min_margin) = (0..check.trials)
        .into_par_iter()
        .map(|trial| -> Result<(usize, f64)> {
            let dataset = check.instance.sample_dataset(
                check.behavior,
                check.n,
                derive_seed(check.seed, trial as u64),
            )?;
            let margin = trial_margin(&dataset)?;
            Ok((usize::from(margin < 0.0), margin))
        })
        .try_reduce(
            || (0, f64::INFINITY),
            |a, b| Ok((a.0 + b.0, a.1.min(b.1))),
        )?;

    let violation_rate = violations as f64 / check.trials as f64;
    let slack = 3.0 * (delta * (1.0 - delta) / check.trials as f64).sqrt();
    Ok(ViolationReport {
        target: check.target,
        trials: check.trials,
        violations,
        violation_rate,
        delta,
        slack,
        gamma,
        bound_min: rhs.iter().copied().fold(f64::INFINITY, f64::min),
        bound_mean: kahan_sum(rhs.iter().copied()) / rhs.len() as f64,
        bound_max: rhs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_margin,
        passed: violation_rate <= delta + slack,
    })
}

/// The tightest observed slack, min over trials of (bound − deviation);
/// reruns the whole check, so prefer reading `min_margin` off an existing
/// [`ViolationReport`].
pub fn worst_case_margin(check: &BoundCheck<'_>) -> Result<f64> {
    Ok(run_bound_check(check)?.min_margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::tests::{mu_t1, pi_a, pi_b, t1};
    use crate::bandit::{random_policy_class, Context, FiniteContextualBandit, NoiseModel};

    fn t1_class() -> PolicyClass {
        PolicyClass::new(vec![pi_a(), pi_b()]).unwrap()
    }

    #[test]
    fn loose_upper_tail_never_violates_at_n_1() {
        let inst = t1();
        let mu = mu_t1();
        let class = t1_class();
        let report = BoundCheck::new(BoundTarget::UpperTail, &inst, &mu, &class, 1, 0.1, 400, 3)
            .with_gamma(0.1)
            .run()
            .unwrap();
        // bound = log(20)/0.2 ≈ 14.979 exceeds the 1/γ = 10 deviation cap.
        assert!((report.bound_min - 20f64.ln() / 0.2).abs() < 1e-12);
        assert_eq!(report.bound_min, report.bound_max);
        assert_eq!(report.violations, 0);
        assert!(report.min_margin >= 20f64.ln() / 0.2 - 10.0);
        assert!(report.passed);
        assert_eq!(report.gamma, Some(0.1));
    }

    #[test]
    fn zero_reward_lower_tail_margin_equals_bound() {
        let contexts = vec![Context::new("x1"), Context::new("x2")];
        let inst = FiniteContextualBandit::new(
            contexts,
            vec![0.5, 0.5],
            2,
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            NoiseModel::Deterministic,
        )
        .unwrap();
        let mu = TabularPolicy::uniform(2, 2);
        let class = PolicyClass::new(vec![TabularPolicy::uniform(2, 2)]).unwrap();
        let report = BoundCheck::new(BoundTarget::LowerTail, &inst, &mu, &class, 25, 0.1, 50, 9)
            .with_gamma(0.2)
            .run()
            .unwrap();
        // v = ṽ = 0 on every trial, so each trial's margin is exactly the rhs.
        assert_eq!(report.violations, 0);
        assert_eq!(report.min_margin, report.bound_min);
        assert_eq!(report.bound_min, report.bound_max);
    }

    #[test]
    fn reports_are_deterministic_per_seed() {
        let inst = t1();
        let mu = mu_t1();
        let class = random_policy_class(6, 2, 2, 21);
        let mk = |seed| {
            BoundCheck::new(BoundTarget::LowerTail, &inst, &mu, &class, 40, 0.1, 300, seed)
                .with_gamma(0.15)
                .run()
                .unwrap()
        };
        assert_eq!(mk(5), mk(5));
        let a = mk(5);
        let b = mk(6);
        assert_eq!(a.bound_min, b.bound_min); // rhs does not depend on the data
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        let inst = t1();
        let mu = mu_t1();
        let class = t1_class();
        let base = |target| BoundCheck::new(target, &inst, &mu, &class, 10, 0.1, 10, 0);
        assert!(base(BoundTarget::UpperTail).with_gamma(0.0).run().is_err());
        assert!(base(BoundTarget::CoverageScaledRegret).with_gamma(0.1).run().is_err());
        assert!(base(BoundTarget::IxRegret).with_comparator(2).run().is_err());
        assert!(base(BoundTarget::PacBayesUpperTail)
            .with_prior(PolicyDistribution::uniform(3).unwrap())
            .run()
            .is_err());
        let mut bad = base(BoundTarget::UpperTail);
        bad.trials = 0;
        assert!(bad.run().is_err());
        let mut bad = base(BoundTarget::UpperTail);
        bad.delta = 1.0;
        assert!(bad.run().is_err());
    }

    #[test]
    fn probe_set_has_expected_shape() {
        let probes = probe_distributions(4, 10, 7).unwrap();
        assert_eq!(probes.len(), 4 + 1 + 10);
        for (i, p) in probes.iter().take(4).enumerate() {
            assert_eq!(p.weight(i), 1.0);
        }
        assert_eq!(probes[4].weights(), &[0.25; 4]);
        for p in &probes {
            assert!((kahan_sum(p.weights().iter().copied()) - 1.0).abs() < 1e-12);
        }
        assert_eq!(
            probes[6].weights(),
            probe_distributions(4, 10, 7).unwrap()[6].weights()
        );
    }

    #[test]
    fn tail_checks_pass_on_a_random_class() {
        let inst = t1();
        let mu = mu_t1();
        let class = random_policy_class(12, 2, 2, 33);
        for target in [BoundTarget::UpperTail, BoundTarget::LowerTail] {
            let report = BoundCheck::new(target, &inst, &mu, &class, 60, 0.1, 600, 11)
                .with_gamma(0.1)
                .run()
                .unwrap();
            assert!(report.passed, "{report}");
        }
    }

    #[test]
    fn regret_targets_pass_quick_runs() {
        let inst = t1();
        let mu = mu_t1();
        let class = t1_class();
        let r = BoundCheck::new(BoundTarget::IxRegret, &inst, &mu, &class, 100, 0.05, 300, 17)
            .run()
            .unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(
            r.gamma,
            Some(crate::estimators::recommended_gamma(2, 0.05, 100).unwrap())
        );

        let r = BoundCheck::new(
            BoundTarget::CoverageScaledRegret,
            &inst,
            &mu,
            &class,
            200,
            0.1,
            300,
            17,
        )
        .run()
        .unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.gamma, None);
        assert!(r.bound_min.is_finite());
    }

    #[test]
    fn pac_bayes_targets_pass_quick_runs() {
        let inst = t1();
        let mu = mu_t1();
        let class = random_policy_class(8, 2, 2, 51);
        for target in [
            BoundTarget::PacBayesUpperTail,
            BoundTarget::PacBayesLowerTail,
            BoundTarget::PacBayesRegret,
        ] {
            let report = BoundCheck::new(target, &inst, &mu, &class, 80, 0.1, 400, 13)
                .run()
                .unwrap();
            assert!(report.passed, "{report}");
            // Point-mass probes put the uniform-prior KL term log|Π| in play.
            assert!(report.bound_max > report.bound_min);
        }
    }

    #[test]
    fn worst_case_margin_matches_report() {
        let inst = t1();
        let mu = mu_t1();
        let class = t1_class();
        let check = BoundCheck::new(BoundTarget::UpperTail, &inst, &mu, &class, 30, 0.1, 100, 2)
            .with_gamma(0.1);
        assert_eq!(worst_case_margin(&check).unwrap(), check.run().unwrap().min_margin);
    }

    #[test]
    fn target_names_round_trip_through_serde() {
        for (target, name) in [
            (BoundTarget::UpperTail, "upper-tail"),
            (BoundTarget::LowerTail, "lower-tail"),
            (BoundTarget::PacBayesUpperTail, "pac-bayes-upper-tail"),
            (BoundTarget::PacBayesLowerTail, "pac-bayes-lower-tail"),
            (BoundTarget::IxRegret, "ix-regret"),
            (BoundTarget::PacBayesRegret, "pac-bayes-regret"),
            (BoundTarget::CoverageScaledRegret, "coverage-scaled-regret"),
        ] {
            assert_eq!(target.to_string(), name);
            let toml = format!("target = \"{name}\"");
            #[derive(serde::Deserialize)]
            struct Probe {
                target: BoundTarget,
            }
            let parsed: Probe = toml::from_str(&toml).unwrap();
            assert_eq!(parsed.target, target);
        }
    }
}
