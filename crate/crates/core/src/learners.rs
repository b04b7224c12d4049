//! Policy selection over a finite class.
//!
//! Everything here reduces to one primitive: score each class member by a sum
//! of per-record, per-action gains and return the argmax, breaking ties
//! toward the lowest class index. The learners differ only in how they build
//! gains from the log:
//!
//! * `piwo_ix`   — sparse gains R_t/(μ_t+γ) at the logged action;
//! * `piwo_clip` — sparse gains R_t/max{μ_t,γ};
//! * `piwo_pl`   — importance-weighted value minus the dense pessimism
//!   adjustment β Σ_t Σ_a π(a|X_t)/μ(a|X_t), which is −∞ for any policy
//!   weighting an action the behavior never plays;
//! * `coverage_scaled_piwo_ix` — per-policy γ_π with a matching subtracted
//!   confidence penalty, so poorly covered policies are judged under heavier
//!   smoothing.
//!
//! Learners return the *index* of the selected policy; the class ordering is
//! part of the contract, so an index is the most faithful answer and the
//! policy itself is a lookup away.

use crate::bandit::{FiniteContextualBandit, LoggedDataset, PolicyClass, TabularPolicy};
use crate::estimators::ix_estimate;
use crate::numeric::KahanSum;
use crate::{Error, Result};

/// Hyperparameters shared by the learner entry points; mirrors what the CLI
/// accepts. `per_policy_gamma[i]` pairs with class index i.
#[derive(Debug, Clone, Default)]
pub struct LearnerParams {
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    pub per_policy_gamma: Option<Vec<f64>>,
}

// ─── CSC oracle ─────────────────────────────────────────────────────────────

/// A cost-sensitive classification instance: per logged context, a gain row
/// over actions. Gains are finite or −∞ (an infinite pessimism penalty);
/// +∞ and NaN are rejected at construction.
#[derive(Debug, Clone)]
pub struct CscInstance {
    rows: Vec<(usize, Vec<f64>)>,
    num_actions: usize,
}

impl CscInstance {
    pub fn new(rows: Vec<(usize, Vec<f64>)>, num_actions: usize) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::argument("CSC instance needs at least one action"));
        }
        for (i, (_, gains)) in rows.iter().enumerate() {
            if gains.len() != num_actions {
                return Err(Error::config(format!(
                    "gain row {i} has {} entries, expected {num_actions}",
                    gains.len()
                )));
            }
            for &g in gains {
                if g.is_nan() || g == f64::INFINITY {
                    return Err(Error::config(format!(
                        "gain row {i} contains {g}; gains must be finite or -inf"
                    )));
                }
            }
        }
        Ok(CscInstance { rows, num_actions })
    }

    pub fn rows(&self) -> &[(usize, Vec<f64>)] {
        &self.rows
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }
}

/// Objective value Σ_t Σ_a π(a|x_t)·g_t(a) for every class member. A −∞ gain
/// zeroes out against π(a|x) = 0 and sinks the whole objective otherwise.
pub fn csc_scores(csc: &CscInstance, class: &PolicyClass) -> Result<Vec<f64>> {
    if csc.num_actions != class.num_actions() {
        return Err(Error::config(format!(
            "CSC instance has {} actions, class has {}",
            csc.num_actions,
            class.num_actions()
        )));
    }
    for (i, &(ctx, _)) in csc.rows.iter().enumerate() {
        if ctx >= class.num_contexts() {
            return Err(Error::config(format!(
                "CSC row {i} references context {ctx}, class policies cover {}",
                class.num_contexts()
            )));
        }
    }
    let scores = class
        .iter()
        .map(|policy| {
            let mut acc = KahanSum::new();
            for &(ctx, ref gains) in &csc.rows {
                let probs = policy.row(ctx);
                for (a, &g) in gains.iter().enumerate() {
                    let p = probs[a];
                    if p == 0.0 {
                        continue;
                    }
                    if g == f64::NEG_INFINITY {
                        return f64::NEG_INFINITY;
                    }
                    if g != 0.0 {
                        acc.add(p * g);
                    }
                }
            }
            acc.value()
        })
        .collect();
    Ok(scores)
}

/// Index of the maximizing policy with lowest-index tie-breaking. −∞ scores
/// are returned only when every member scores −∞.
pub fn argmax_lowest_index(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// The CSC oracle: argmax_π Σ_t Σ_a π(a|x_t)·g_t(a) over the class.
pub fn csc_oracle(csc: &CscInstance, class: &PolicyClass) -> Result<usize> {
    Ok(argmax_lowest_index(&csc_scores(csc, class)?))
}

// ─── Gain construction ──────────────────────────────────────────────────────

/// Sparse IX gains: one row per record, the single possibly-nonzero entry at
/// the logged action holding R_t/(μ_t+γ).
pub fn piwo_ix_gains(dataset: &LoggedDataset, num_actions: usize, gamma: f64) -> Result<CscInstance> {
    sparse_gains(dataset, num_actions, gamma, |mu, g| mu + g)
}

/// Sparse clipped gains: R_t/max{μ_t, γ} at the logged action.
pub fn piwo_clip_gains(
    dataset: &LoggedDataset,
    num_actions: usize,
    gamma: f64,
) -> Result<CscInstance> {
    sparse_gains(dataset, num_actions, gamma, |mu, g| mu.max(g))
}

fn sparse_gains(
    dataset: &LoggedDataset,
    num_actions: usize,
    gamma: f64,
    denom: impl Fn(f64, f64) -> f64,
) -> Result<CscInstance> {
    if !(gamma > 0.0) {
        return Err(Error::argument(format!("gamma = {gamma}, expected gamma > 0")));
    }
    let rows = dataset
        .records()
        .iter()
        .map(|r| {
            if r.action >= num_actions {
                return Err(Error::data(format!(
                    "record action {} out of range for {num_actions} actions",
                    r.action
                )));
            }
            let mut gains = vec![0.0; num_actions];
            gains[r.action] = r.reward / denom(r.propensity, gamma);
            Ok((r.context, gains))
        })
        .collect::<Result<Vec<_>>>()?;
    CscInstance::new(rows, num_actions)
}

// ─── Learners ───────────────────────────────────────────────────────────────

/// Pessimistic IX learning: argmax over the class of the IX value estimate,
/// realized as a single CSC-oracle call on the sparse gains.
pub fn piwo_ix(dataset: &LoggedDataset, class: &PolicyClass, gamma: f64) -> Result<usize> {
    csc_oracle(&piwo_ix_gains(dataset, class.num_actions(), gamma)?, class)
}

/// Clipped-weights variant of [`piwo_ix`].
pub fn piwo_clip(dataset: &LoggedDataset, class: &PolicyClass, gamma: f64) -> Result<usize> {
    csc_oracle(&piwo_clip_gains(dataset, class.num_actions(), gamma)?, class)
}

/// Per-policy objectives of the propensity-penalized learner:
/// v̂_n(π) − β Σ_t Σ_a π(a|X_t)/μ(a|X_t). The adjustment is applied literally
/// with no 1/n, so β's useful scale depends on n. With β > 0, any policy
/// weighting a zero-propensity action at a logged context scores −∞.
pub fn piwo_pl_objectives(
    dataset: &LoggedDataset,
    class: &PolicyClass,
    beta: f64,
    behavior: &TabularPolicy,
) -> Result<Vec<f64>> {
    if !(beta >= 0.0) {
        return Err(Error::argument(format!("beta = {beta}, expected beta >= 0")));
    }
    if behavior.num_contexts() != class.num_contexts()
        || behavior.num_actions() != class.num_actions()
    {
        return Err(Error::config(
            "behavior policy shape does not match the policy class",
        ));
    }
    if dataset.is_empty() {
        return Err(Error::data("cannot learn from an empty dataset"));
    }
    for r in dataset.records() {
        if r.context >= class.num_contexts() || r.action >= class.num_actions() {
            return Err(Error::data(format!(
                "record (context {}, action {}) out of range for the class",
                r.context, r.action
            )));
        }
    }
    let n = dataset.len() as f64;
    let scores = class
        .iter()
        .map(|policy| {
            let mut value = KahanSum::new();
            let mut penalty = KahanSum::new();
            for r in dataset.records() {
                value.add(policy.prob(r.context, r.action) * (r.reward / r.propensity));
                if beta > 0.0 {
                    let probs = policy.row(r.context);
                    for (a, &p) in probs.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let mu = behavior.prob(r.context, a);
                        if mu == 0.0 {
                            return f64::NEG_INFINITY;
                        }
                        penalty.add(p / mu);
                    }
                }
            }
            value.value() / n - beta * penalty.value()
        })
        .collect();
    Ok(scores)
}

/// Argmax of [`piwo_pl_objectives`] with the standard tie-break.
pub fn piwo_pl(
    dataset: &LoggedDataset,
    class: &PolicyClass,
    beta: f64,
    behavior: &TabularPolicy,
) -> Result<usize> {
    Ok(argmax_lowest_index(&piwo_pl_objectives(
        dataset, class, beta, behavior,
    )?))
}

/// Coverage-scaled IX learning: each policy is scored with its own γ_π and a
/// subtracted confidence penalty log(2|Π|/δ)/(2γ_π n), then the argmax is
/// taken. With a uniform γ_π map the penalty is a constant shift and the
/// learner coincides with [`piwo_ix`].
pub fn coverage_scaled_piwo_ix(
    dataset: &LoggedDataset,
    class: &PolicyClass,
    per_policy_gamma: &[f64],
    delta: f64,
) -> Result<usize> {
    if per_policy_gamma.len() != class.len() {
        return Err(Error::argument(format!(
            "per-policy gamma map has {} entries for a class of {}",
            per_policy_gamma.len(),
            class.len()
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::argument(format!("delta = {delta}, expected delta in (0,1)")));
    }
    for (i, &g) in per_policy_gamma.iter().enumerate() {
        if !(g > 0.0) {
            return Err(Error::argument(format!(
                "per-policy gamma for class member {i} is {g}, expected > 0"
            )));
        }
    }
    let n = dataset.len() as f64;
    let log_term = (2.0 * class.len() as f64 / delta).ln();
    let mut scores = Vec::with_capacity(class.len());
    for (policy, &gamma) in class.iter().zip(per_policy_gamma) {
        let penalty = log_term / (2.0 * gamma * n);
        scores.push(ix_estimate(dataset, policy, gamma)? - penalty);
    }
    Ok(argmax_lowest_index(&scores))
}

/// The per-policy smoothing schedule γ_π = √(log(2|Π|/δ)/(2·C_0(π)·n)) used
/// by [`coverage_scaled_piwo_ix`], with C_0 computed exactly from the
/// instance. Fallbacks at the undefined extremes: γ_π = 1/n when C_0 = +∞,
/// γ_π = 1 when C_0 = 0.
pub fn coverage_scaled_gammas(
    class: &PolicyClass,
    instance: &FiniteContextualBandit,
    behavior: &TabularPolicy,
    delta: f64,
    n: usize,
) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::argument(format!("delta = {delta}, expected delta in (0,1)")));
    }
    if n == 0 {
        return Err(Error::argument("n must be at least 1"));
    }
    let log_term = (2.0 * class.len() as f64 / delta).ln();
    class
        .iter()
        .map(|policy| {
            let c0 = instance.smoothed_coverage_ratio(policy, behavior, 0.0)?;
            Ok(if c0 == f64::INFINITY {
                1.0 / n as f64
            } else if c0 == 0.0 {
                1.0
            } else {
                (log_term / (2.0 * c0 * n as f64)).sqrt()
            })
        })
        .collect()
}

/// Comparator value minus learned value; negative when the learned policy is
/// the better one.
pub fn regret(
    instance: &FiniteContextualBandit,
    learned: &TabularPolicy,
    comparator: &TabularPolicy,
) -> Result<f64> {
    Ok(instance.policy_value(comparator)? - instance.policy_value(learned)?)
}

/// Index of the best-in-class policy by exact value (lowest index on ties) —
/// the default comparator for regret checks.
pub fn best_in_class(instance: &FiniteContextualBandit, class: &PolicyClass) -> Result<usize> {
    let values = class
        .iter()
        .map(|p| instance.policy_value(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax_lowest_index(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{
        random_instance, random_policy_class, LoggedDataset, LoggedRecord, NoiseModel,
        TabularPolicy,
    };
    use crate::rng::derive_seed;

    fn d1() -> LoggedDataset {
        LoggedDataset::new(vec![
            LoggedRecord::new(0, 0, 1.0, 0.8).unwrap(),
            LoggedRecord::new(1, 1, 1.0, 0.5).unwrap(),
        ])
    }

    fn class_ab() -> PolicyClass {
        PolicyClass::new(vec![
            TabularPolicy::constant(2, 2, 0),
            TabularPolicy::constant(2, 2, 1),
        ])
        .unwrap()
    }

    #[test]
    fn csc_oracle_scores_and_picks_by_hand_computation() {
        let csc = CscInstance::new(vec![(0, vec![1.0, 0.0]), (1, vec![0.0, 2.0])], 2).unwrap();
        let class = PolicyClass::new(vec![
            TabularPolicy::constant(2, 2, 0),
            TabularPolicy::constant(2, 2, 1),
            TabularPolicy::uniform(2, 2),
        ])
        .unwrap();
        let scores = csc_scores(&csc, &class).unwrap();
        assert_eq!(scores, vec![1.0, 2.0, 1.5]);
        assert_eq!(csc_oracle(&csc, &class).unwrap(), 1);
    }

    #[test]
    fn all_zero_gains_fall_back_to_the_first_policy() {
        let csc = CscInstance::new(vec![(0, vec![0.0, 0.0]), (1, vec![0.0, 0.0])], 2).unwrap();
        assert_eq!(csc_oracle(&csc, &class_ab()).unwrap(), 0);
    }

    #[test]
    fn negative_infinity_gains_are_avoided_unless_unavoidable() {
        let csc = CscInstance::new(vec![(0, vec![f64::NEG_INFINITY, -5.0])], 2).unwrap();
        let class = class_ab();
        let scores = csc_scores(&csc, &class).unwrap();
        assert_eq!(scores[0], f64::NEG_INFINITY);
        assert_eq!(csc_oracle(&csc, &class).unwrap(), 1);
        // All −∞: the tie-break still yields the first member.
        let sunk = CscInstance::new(vec![(0, vec![f64::NEG_INFINITY, f64::NEG_INFINITY])], 2).unwrap();
        assert_eq!(csc_oracle(&sunk, &class).unwrap(), 0);
        // NaN and +∞ gains are construction errors.
        assert!(CscInstance::new(vec![(0, vec![f64::NAN, 0.0])], 2).is_err());
        assert!(CscInstance::new(vec![(0, vec![f64::INFINITY, 0.0])], 2).is_err());
    }

    #[test]
    fn ix_gain_rows_are_sparse_with_hand_computed_entries() {
        let gains = piwo_ix_gains(&d1(), 2, 0.2).unwrap();
        assert_eq!(gains.rows().len(), 2);
        assert_eq!(gains.rows()[0].0, 0);
        assert!((gains.rows()[0].1[0] - 1.0).abs() < 1e-15);
        assert_eq!(gains.rows()[0].1[1], 0.0);
        assert!((gains.rows()[1].1[1] - 1.0 / 0.7).abs() < 1e-15);
        assert_eq!(gains.rows()[1].1[0], 0.0);
        for (_, row) in gains.rows() {
            assert!(row.iter().filter(|&&g| g != 0.0).count() <= 1);
        }
        // Zero-reward records yield all-zero rows.
        let z = LoggedDataset::new(vec![LoggedRecord::new(0, 1, 0.0, 0.4).unwrap()]);
        let gains = piwo_ix_gains(&z, 2, 0.2).unwrap();
        assert_eq!(gains.rows()[0].1, vec![0.0, 0.0]);
    }

    #[test]
    fn piwo_ix_and_clip_match_hand_selected_policies_on_d1() {
        let class = class_ab();
        assert_eq!(piwo_ix(&d1(), &class, 0.2).unwrap(), 1);
        assert_eq!(piwo_clip(&d1(), &class, 0.2).unwrap(), 1);
        assert!(piwo_ix(&d1(), &class, 0.0).is_err());
        // Single-member class: no choice to make.
        let solo = PolicyClass::new(vec![TabularPolicy::constant(2, 2, 0)]).unwrap();
        assert_eq!(piwo_ix(&d1(), &solo, 0.2).unwrap(), 0);
        // All rewards zero: tie-break to index 0.
        let z = LoggedDataset::new(vec![
            LoggedRecord::new(0, 0, 0.0, 0.8).unwrap(),
            LoggedRecord::new(1, 1, 0.0, 0.5).unwrap(),
        ]);
        assert_eq!(piwo_ix(&z, &class, 0.2).unwrap(), 0);
    }

    #[test]
    fn piwo_pl_hand_computed_tie_breaks_to_pi_a() {
        let mu = crate::bandit::tests::mu_t1();
        let class = class_ab();
        let obj = piwo_pl_objectives(&d1(), &class, 0.1, &mu).unwrap();
        assert!((obj[0] - 0.300).abs() < 1e-12, "{obj:?}");
        assert!((obj[1] - 0.300).abs() < 1e-12, "{obj:?}");
        assert_eq!(piwo_pl(&d1(), &class, 0.1, &mu).unwrap(), 0);
    }

    #[test]
    fn piwo_pl_with_zero_beta_is_plain_iw_argmax() {
        let mu = crate::bandit::tests::mu_t1();
        let class = class_ab();
        // iw estimates: π_A → 0.625, π_B → 1.0.
        assert_eq!(piwo_pl(&d1(), &class, 0.0, &mu).unwrap(), 1);
    }

    #[test]
    fn piwo_pl_sinks_policies_weighting_unplayable_actions() {
        // Behavior never plays a2 at x1; the log still only contains played
        // actions, but π_B wants a2 everywhere.
        let mu = TabularPolicy::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let d = LoggedDataset::new(vec![
            LoggedRecord::new(0, 0, 1.0, 1.0).unwrap(),
            LoggedRecord::new(1, 1, 1.0, 0.5).unwrap(),
        ]);
        let class = class_ab();
        let obj = piwo_pl_objectives(&d, &class, 0.1, &mu).unwrap();
        assert!(obj[0].is_finite());
        assert_eq!(obj[1], f64::NEG_INFINITY);
        assert_eq!(piwo_pl(&d, &class, 0.1, &mu).unwrap(), 0);
    }

    #[test]
    fn coverage_scaled_hand_computed_example() {
        let class = class_ab();
        let idx = coverage_scaled_piwo_ix(&d1(), &class, &[0.2, 0.5], 0.5).unwrap();
        assert_eq!(idx, 1);
        // Uniform γ map collapses to plain piwo_ix (constant penalty shift).
        for seed in 0..20u64 {
            let inst = random_instance(3, 3, NoiseModel::Bernoulli, seed);
            let mu = crate::bandit::random_policy(3, 3, derive_seed(seed, 5));
            let class = random_policy_class(5, 3, 3, derive_seed(seed, 6));
            let d = inst.sample_dataset(&mu, 30, derive_seed(seed, 7)).unwrap();
            let a = coverage_scaled_piwo_ix(&d, &class, &vec![0.3; 5], 0.1).unwrap();
            let b = piwo_ix(&d, &class, 0.3).unwrap();
            assert_eq!(a, b, "seed {seed}");
        }
        // Map length must match the class.
        assert!(coverage_scaled_piwo_ix(&d1(), &class_ab(), &[0.2], 0.5).is_err());
        assert!(coverage_scaled_piwo_ix(&d1(), &class_ab(), &[0.2, 0.0], 0.5).is_err());
    }

    #[test]
    fn coverage_scaled_gamma_schedule_matches_formula_and_fallbacks() {
        let inst = crate::bandit::tests::t1();
        let mu = crate::bandit::tests::mu_t1();
        let class = class_ab();
        let gammas = coverage_scaled_gammas(&class, &inst, &mu, 0.5, 2).unwrap();
        // C_0(π_A) = 1.125 → √(log 8 / 4.5).
        assert!((gammas[0] - 0.6797779934458726).abs() < 1e-12);

        // π_B's positive-reward action at x2 unplayable → C_0 = ∞ → floor 1/n.
        let blocked = TabularPolicy::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let g = coverage_scaled_gammas(&class, &inst, &blocked, 0.5, 4).unwrap();
        assert_eq!(g[1], 0.25);
        // Blocking only a zero-reward action keeps C_0 finite: at x1 π_B's
        // action has reward 0, so only the x2 term (1/0.5 = 2) contributes,
        // C_0(π_B) = 1 and γ = √(log 8 / 8).
        let harmless = TabularPolicy::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let g = coverage_scaled_gammas(&class, &inst, &harmless, 0.5, 4).unwrap();
        assert!((g[1] - (8f64.ln() / 8.0).sqrt()).abs() < 1e-12);

        // Zero-reward instance → C_0 = 0 → cap 1.
        let zero = crate::bandit::FiniteContextualBandit::new(
            vec![
                crate::bandit::Context::new("x1"),
                crate::bandit::Context::new("x2"),
            ],
            vec![0.5, 0.5],
            2,
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            NoiseModel::Deterministic,
        )
        .unwrap();
        let g = coverage_scaled_gammas(&class, &zero, &mu, 0.5, 4).unwrap();
        assert_eq!(g, vec![1.0, 1.0]);
    }

    #[test]
    fn regret_examples() {
        let inst = crate::bandit::tests::t1();
        let pa = crate::bandit::tests::pi_a();
        let pb = crate::bandit::tests::pi_b();
        assert_eq!(regret(&inst, &pa, &pa).unwrap(), 0.0);
        assert!((regret(&inst, &pb, &pa).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(best_in_class(&inst, &class_ab()).unwrap(), 0);
    }

    #[test]
    fn oracle_route_equals_brute_force_estimate_argmax() {
        for seed in 0..60u64 {
            let m = 2 + (seed as usize % 5);
            let k = 2 + (seed as usize % 3);
            let inst = random_instance(m, k, NoiseModel::Bernoulli, seed);
            let mu = crate::bandit::random_policy(m, k, derive_seed(seed, 1));
            let class = random_policy_class(4 + seed as usize % 5, m, k, derive_seed(seed, 2));
            let n = 1 + seed as usize % 60;
            let d = inst.sample_dataset(&mu, n, derive_seed(seed, 3)).unwrap();
            let gamma = [0.05, 0.2, 0.7][seed as usize % 3];
            let fast = piwo_ix(&d, &class, gamma).unwrap();
            let brute = {
                let vals: Vec<f64> = class
                    .iter()
                    .map(|p| ix_estimate(&d, p, gamma).unwrap())
                    .collect();
                argmax_lowest_index(&vals)
            };
            assert_eq!(fast, brute, "seed {seed}");
        }
    }

    #[test]
    fn never_rewarded_policies_lose_to_rewarded_ones() {
        for seed in 0..30u64 {
            let inst = random_instance(4, 3, NoiseModel::Bernoulli, seed);
            let mu = crate::bandit::random_policy(4, 3, derive_seed(seed, 1));
            let class = random_policy_class(6, 4, 3, derive_seed(seed, 2));
            let d = inst.sample_dataset(&mu, 40, derive_seed(seed, 3)).unwrap();
            let vals: Vec<f64> = class
                .iter()
                .map(|p| ix_estimate(&d, p, 0.1).unwrap())
                .collect();
            if vals.iter().any(|&v| v > 0.0) {
                let chosen = piwo_ix(&d, &class, 0.1).unwrap();
                assert!(vals[chosen] > 0.0, "seed {seed}: {vals:?}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn csc_argmax_invariant_under_shift_and_scale(seed in 0u64..150) {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let m = 3;
            let k = 3;
            let class = random_policy_class(5, m, k, derive_seed(seed, 1));
            let rows: Vec<(usize, Vec<f64>)> = (0..8)
                .map(|_| {
                    let ctx = rng.next_below(m as u64) as usize;
                    let gains = (0..k).map(|_| rng.next_f64() * 4.0 - 1.0).collect();
                    (ctx, gains)
                })
                .collect();
            let base = CscInstance::new(rows.clone(), k).unwrap();
            let picked = csc_oracle(&base, &class).unwrap();

            // Per-row constant shift: Σ_a π(a|x) c_t adds the same c_t to
            // every policy's score.
            let shifted_rows: Vec<(usize, Vec<f64>)> = rows
                .iter()
                .map(|(ctx, gains)| {
                    let c = rng.next_f64() * 10.0 - 5.0;
                    (*ctx, gains.iter().map(|g| g + c).collect())
                })
                .collect();
            let shifted = CscInstance::new(shifted_rows, k).unwrap();
            proptest::prop_assert_eq!(csc_oracle(&shifted, &class).unwrap(), picked);

            // Positive scaling.
            let c = 0.1 + rng.next_f64() * 9.9;
            let scaled_rows: Vec<(usize, Vec<f64>)> = rows
                .iter()
                .map(|(ctx, gains)| (*ctx, gains.iter().map(|g| g * c).collect()))
                .collect();
            let scaled = CscInstance::new(scaled_rows, k).unwrap();
            proptest::prop_assert_eq!(csc_oracle(&scaled, &class).unwrap(), picked);
        }
    }
}
