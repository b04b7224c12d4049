//! Finite stochastic contextual bandits, tabular policies, and logged data.
//!
//! The core model is deliberately small: a finite context set with a sampling
//! distribution ν, K actions, a mean-reward table r(x,a) in [0,1], and a noise
//! model for realized rewards. Keeping the context space enumerable means
//! every expectation used as a test oracle — policy values, coverage ratios,
//! estimator biases — can be computed exactly by summation instead of being
//! estimated. Continuous features only enter through the experiment harness,
//! which induces a finite instance from a data table.

use crate::numeric::{normalized_probabilities, KahanSum};
use crate::rng::SplitMix64;
use crate::{Error, Result};

// ─── Instances ──────────────────────────────────────────────────────────────

/// How realized rewards are drawn around the mean-reward table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Rewards equal r(x,a) exactly.
    Deterministic,
    /// Rewards are Bernoulli with parameter r(x,a).
    Bernoulli,
}

/// A context: an identifier used by the file formats, plus an optional
/// feature vector carried along for instances induced from tabular data.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub id: String,
    pub features: Option<Vec<f64>>,
}

impl Context {
    pub fn new(id: impl Into<String>) -> Self {
        Context {
            id: id.into(),
            features: None,
        }
    }

    pub fn with_features(id: impl Into<String>, features: Vec<f64>) -> Self {
        Context {
            id: id.into(),
            features: Some(features),
        }
    }
}

/// A finite stochastic contextual bandit: contexts drawn from ν, K actions,
/// mean rewards in [0,1], and a reward noise model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteContextualBandit {
    contexts: Vec<Context>,
    context_probs: Vec<f64>,
    num_actions: usize,
    mean_rewards: Vec<Vec<f64>>,
    noise: NoiseModel,
}

impl FiniteContextualBandit {
    pub fn new(
        contexts: Vec<Context>,
        context_probs: Vec<f64>,
        num_actions: usize,
        mean_rewards: Vec<Vec<f64>>,
        noise: NoiseModel,
    ) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::config("instance needs at least one context"));
        }
        if num_actions == 0 {
            return Err(Error::config("instance needs at least one action"));
        }
        if context_probs.len() != contexts.len() || mean_rewards.len() != contexts.len() {
            return Err(Error::config(format!(
                "instance has {} contexts but {} probabilities and {} reward rows",
                contexts.len(),
                context_probs.len(),
                mean_rewards.len()
            )));
        }
        let context_probs = normalized_probabilities(&context_probs, "context distribution")?;
        for (i, row) in mean_rewards.iter().enumerate() {
            if row.len() != num_actions {
                return Err(Error::config(format!(
                    "reward row for context {} has {} entries, expected {num_actions}",
                    contexts[i].id,
                    row.len()
                )));
            }
            for (a, &r) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::config(format!(
                        "mean reward r({}, a{}) = {r} outside [0,1]",
                        contexts[i].id,
                        a + 1
                    )));
                }
            }
        }
        Ok(FiniteContextualBandit {
            contexts,
            context_probs,
            num_actions,
            mean_rewards,
            noise,
        })
    }

    pub fn num_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context_probs(&self) -> &[f64] {
        &self.context_probs
    }

    pub fn mean_reward(&self, context: usize, action: usize) -> f64 {
        self.mean_rewards[context][action]
    }

    pub fn mean_rewards(&self) -> &[Vec<f64>] {
        &self.mean_rewards
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    /// Index of a context by id, or None. Linear scan: id lookups only happen
    /// at file boundaries, never in estimator loops.
    pub fn context_index(&self, id: &str) -> Option<usize> {
        self.contexts.iter().position(|c| c.id == id)
    }

    /// Validate that a policy's shape matches this instance; `role` names the
    /// policy in error messages.
    pub fn check_policy(&self, policy: &TabularPolicy, role: &str) -> Result<()> {
        if policy.num_contexts() != self.num_contexts() {
            return Err(Error::config(format!(
                "{role} covers {} contexts, instance has {}",
                policy.num_contexts(),
                self.num_contexts()
            )));
        }
        if policy.num_actions() != self.num_actions {
            return Err(Error::config(format!(
                "{role} has {} actions, instance has {}",
                policy.num_actions(),
                self.num_actions
            )));
        }
        Ok(())
    }

    /// Exact expected reward of a policy: Σ_x ν(x) Σ_a π(a|x) r(x,a).
    pub fn policy_value(&self, policy: &TabularPolicy) -> Result<f64> {
        self.check_policy(policy, "policy")?;
        let mut acc = KahanSum::new();
        for (x, &nu) in self.context_probs.iter().enumerate() {
            if nu == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            let row = policy.row(x);
            for (a, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    inner += p * self.mean_rewards[x][a];
                }
            }
            acc.add(nu * inner);
        }
        Ok(acc.value())
    }

    /// Expected sum of importance weights E[Σ_a π(a|X)/μ(a|X)]. Returns
    /// +infinity — a value, not an error — when the policy puts mass on an
    /// action the behavior never plays in a reachable context. Terms with
    /// π(a|x) = 0 contribute nothing regardless of μ.
    pub fn coverage_ratio(&self, policy: &TabularPolicy, behavior: &TabularPolicy) -> Result<f64> {
        self.check_policy(policy, "policy")?;
        self.check_policy(behavior, "behavior policy")?;
        let mut acc = KahanSum::new();
        for (x, &nu) in self.context_probs.iter().enumerate() {
            if nu == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for a in 0..self.num_actions {
                let p = policy.prob(x, a);
                if p == 0.0 {
                    continue;
                }
                let mu = behavior.prob(x, a);
                if mu == 0.0 {
                    return Ok(f64::INFINITY);
                }
                inner += p / mu;
            }
            acc.add(nu * inner);
        }
        Ok(acc.value())
    }

    /// Reward-scaled, γ-smoothed coverage E[Σ_a π(a|x)·r(x,a)/(μ(a|x)+γ)].
    /// At γ = 0 this is the unsmoothed C_0, which may be +infinity; for γ > 0
    /// it is finite and at most 1/γ.
    pub fn smoothed_coverage_ratio(
        &self,
        policy: &TabularPolicy,
        behavior: &TabularPolicy,
        gamma: f64,
    ) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::argument(format!("gamma = {gamma}, expected gamma >= 0")));
        }
        self.check_policy(policy, "policy")?;
        self.check_policy(behavior, "behavior policy")?;
        let mut acc = KahanSum::new();
        for (x, &nu) in self.context_probs.iter().enumerate() {
            if nu == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for a in 0..self.num_actions {
                let weighted = policy.prob(x, a) * self.mean_rewards[x][a];
                if weighted == 0.0 {
                    continue;
                }
                let denom = behavior.prob(x, a) + gamma;
                if denom == 0.0 {
                    return Ok(f64::INFINITY);
                }
                inner += weighted / denom;
            }
            acc.add(nu * inner);
        }
        Ok(acc.value())
    }

    /// Simulate logging: n i.i.d. records with X ~ ν, A ~ μ(·|X), R from the
    /// noise model, and the propensity field storing μ(A|X) exactly as held
    /// by the behavior policy. Deterministic per seed.
    pub fn sample_dataset(
        &self,
        behavior: &TabularPolicy,
        n: usize,
        seed: u64,
    ) -> Result<LoggedDataset> {
        if n == 0 {
            return Err(Error::argument("dataset size n must be at least 1"));
        }
        self.check_policy(behavior, "behavior policy")?;
        let mut rng = SplitMix64::new(seed);
        let mut records = Vec::with_capacity(n);
        for _ in 0..n {
            let x = sample_index(&mut rng, &self.context_probs);
            let a = sample_index(&mut rng, behavior.row(x));
            let mean = self.mean_rewards[x][a];
            let reward = match self.noise {
                NoiseModel::Deterministic => mean,
                NoiseModel::Bernoulli => {
                    if rng.next_f64() < mean {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            records.push(LoggedRecord::new(x, a, reward, behavior.prob(x, a))?);
        }
        Ok(LoggedDataset::new(records))
    }
}

/// Inverse-CDF draw over an index set, walking probabilities in index order.
/// Zero-probability indices are never returned, including on the floating-
/// point edge where the cumulative total lands slightly below the draw.
fn sample_index(rng: &mut SplitMix64, probs: &[f64]) -> usize {
    let u = rng.next_f64();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last_positive = i;
        if u < cum {
            return i;
        }
    }
    last_positive
}

// ─── Policies ───────────────────────────────────────────────────────────────

/// A tabular stochastic policy: one probability row over actions per context,
/// aligned with the context order of the instance it is used with. Rows are
/// validated (and renormalized within 1e-12) on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    rows: Vec<Vec<f64>>,
}

impl TabularPolicy {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::config("policy needs at least one context row"));
        }
        let width = rows[0].len();
        let mut validated = Vec::with_capacity(rows.len());
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::config(format!(
                    "policy row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            validated.push(normalized_probabilities(row, &format!("policy row {x}"))?);
        }
        Ok(TabularPolicy { rows: validated })
    }

    /// The uniform policy over `num_actions` actions at every context.
    pub fn uniform(num_contexts: usize, num_actions: usize) -> Self {
        let row = vec![1.0 / num_actions as f64; num_actions];
        TabularPolicy {
            rows: vec![row; num_contexts],
        }
    }

    /// The deterministic policy playing `action` everywhere.
    pub fn constant(num_contexts: usize, num_actions: usize, action: usize) -> Self {
        assert!(action < num_actions);
        let mut row = vec![0.0; num_actions];
        row[action] = 1.0;
        TabularPolicy {
            rows: vec![row; num_contexts],
        }
    }

    pub fn num_contexts(&self) -> usize {
        self.rows.len()
    }

    pub fn num_actions(&self) -> usize {
        self.rows[0].len()
    }

    #[inline]
    pub fn row(&self, context: usize) -> &[f64] {
        &self.rows[context]
    }

    #[inline]
    pub fn prob(&self, context: usize, action: usize) -> f64 {
        self.rows[context][action]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// A nonempty ordered list of policies with identical shape. The ordering is
/// load-bearing: every learner breaks ties toward the lowest index, and
/// policy distributions are indexed against it.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyClass {
    policies: Vec<TabularPolicy>,
}

impl PolicyClass {
    pub fn new(policies: Vec<TabularPolicy>) -> Result<Self> {
        let first = policies
            .first()
            .ok_or_else(|| Error::argument("policy class must be nonempty"))?;
        let (m, k) = (first.num_contexts(), first.num_actions());
        for (i, p) in policies.iter().enumerate() {
            if p.num_contexts() != m || p.num_actions() != k {
                return Err(Error::config(format!(
                    "policy {i} has shape {}x{}, class shape is {m}x{k}",
                    p.num_contexts(),
                    p.num_actions()
                )));
            }
        }
        Ok(PolicyClass { policies })
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, index: usize) -> &TabularPolicy {
        &self.policies[index]
    }

    pub fn policies(&self) -> &[TabularPolicy] {
        &self.policies
    }

    pub fn num_contexts(&self) -> usize {
        self.policies[0].num_contexts()
    }

    pub fn num_actions(&self) -> usize {
        self.policies[0].num_actions()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TabularPolicy> {
        self.policies.iter()
    }
}

// ─── Logged data ────────────────────────────────────────────────────────────

/// One logged interaction. `context` and `action` are 0-based indexes into
/// the originating instance; `propensity` is the behavior probability of the
/// logged action, stored at logging time so estimators never re-query μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedRecord {
    pub context: usize,
    pub action: usize,
    pub reward: f64,
    pub propensity: f64,
}

impl LoggedRecord {
    pub fn new(context: usize, action: usize, reward: f64, propensity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::data(format!(
                "record reward {reward} outside [0,1] (context {context}, action {action})"
            )));
        }
        if !(propensity > 0.0 && propensity <= 1.0) {
            return Err(Error::data(format!(
                "record propensity {propensity} outside (0,1] (context {context}, action {action})"
            )));
        }
        Ok(LoggedRecord {
            context,
            action,
            reward,
            propensity,
        })
    }
}

/// An immutable sequence of logged records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoggedDataset {
    records: Vec<LoggedRecord>,
}

impl LoggedDataset {
    pub fn new(records: Vec<LoggedRecord>) -> Self {
        LoggedDataset { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[LoggedRecord] {
        &self.records
    }
}

// ─── Seeded synthetic inputs ────────────────────────────────────────────────

/// A random probability vector with strictly positive dyadic entries
/// (multiples of 2^-30 that sum to exactly 1.0 in floating point). Dyadic
/// construction keeps "sums to one" an exact statement, which in turn keeps
/// identities like coverage_ratio(μ,μ) = K exact on random inputs.
fn dyadic_simplex(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    const DEN: u64 = 1 << 30;
    assert!(len >= 1 && (len as u64) < DEN);
    if len == 1 {
        return vec![1.0];
    }
    let mut cuts = std::collections::BTreeSet::new();
    while cuts.len() < len - 1 {
        cuts.insert(1 + rng.next_below(DEN - 1));
    }
    let scale = (DEN as f64).recip();
    let mut parts = Vec::with_capacity(len);
    let mut prev = 0u64;
    for &c in &cuts {
        parts.push((c - prev) as f64 * scale);
        prev = c;
    }
    parts.push((DEN - prev) as f64 * scale);
    parts
}

/// A seeded random instance: dyadic ν, uniform mean rewards in [0,1), ids
/// `x1..xm`. Useful wherever many small instances are swept over.
pub fn random_instance(
    num_contexts: usize,
    num_actions: usize,
    noise: NoiseModel,
    seed: u64,
) -> FiniteContextualBandit {
    let mut rng = SplitMix64::new(seed);
    let contexts = (0..num_contexts)
        .map(|i| Context::new(format!("x{}", i + 1)))
        .collect();
    let nu = dyadic_simplex(&mut rng, num_contexts);
    let rewards = (0..num_contexts)
        .map(|_| (0..num_actions).map(|_| rng.next_f64()).collect())
        .collect();
    FiniteContextualBandit::new(contexts, nu, num_actions, rewards, noise)
        .expect("generated instance is valid by construction")
}

/// A seeded random policy with strictly positive dyadic rows.
pub fn random_policy(num_contexts: usize, num_actions: usize, seed: u64) -> TabularPolicy {
    let mut rng = SplitMix64::new(seed);
    let rows = (0..num_contexts)
        .map(|_| dyadic_simplex(&mut rng, num_actions))
        .collect();
    TabularPolicy::new(rows).expect("generated policy is valid by construction")
}

/// A seeded class of random policies (index i uses substream i of the seed).
pub fn random_policy_class(
    size: usize,
    num_contexts: usize,
    num_actions: usize,
    seed: u64,
) -> PolicyClass {
    let policies = (0..size)
        .map(|i| random_policy(num_contexts, num_actions, crate::rng::derive_seed(seed, i as u64)))
        .collect();
    PolicyClass::new(policies).expect("generated class is valid by construction")
}
