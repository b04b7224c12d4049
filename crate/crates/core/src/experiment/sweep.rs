//! Sweep execution: cross every behavior temperature with every learner and
//! hyperparameter, train on simulated logged data fold by fold, and score
//! each cell against the true mean rewards of the held-out fold.
//!
//! The protocol: a seeded shuffle sets aside `behavior_fit_fraction` of the
//! rows to fit the reward regressor that powers the softmax behavior family;
//! the remaining rows are split into `folds` contiguous blocks. For each
//! (η, fold) pair, one logged interaction is simulated per training row
//! (action from π_η, Bernoulli reward, propensity as computed), and that one
//! data set is shared by every learner and hyperparameter in the cell. A
//! learner trains by fitting the ridge oracle to its per-record gain vectors
//! and acting greedily; evaluation averages the true mean rewards of its
//! argmax actions over the held-out rows. Output rows are emitted in sorted
//! cell order no matter how the parallel cells finish.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::learners::argmax_lowest_index;
use crate::rng::{derive_seed, SplitMix64};
use crate::{Error, Result};

use super::ridge::{ridge_regression, softmax_row};
use super::{fit_ridge, ClassificationTable, RewardMatrix};

/// Magnitude cap on learner gain targets. The propensity-penalized learner's
/// dense adjustment β/μ(a|x) overflows once propensities underflow near
/// 1e-308; capping keeps the normal equations finite while preserving the
/// ordering everywhere short of the cap.
pub const GAIN_CLAMP: f64 = 1e250;

/// Substream tag for the behavior-fit/fold shuffle.
const SHUFFLE_TAG: u64 = 0x73_68_75_66; // "shuf"
/// Substream tag from which per-(η, fold) logging streams derive.
const DATA_TAG: u64 = 0x64_61_74_61; // "data"

/// Learners that run inside sweeps: the three that reduce to one ridge-oracle
/// call per hyperparameter on a shared logged data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepLearner {
    /// Gains R_t/(μ_t+γ) at the logged action.
    PiwoIx,
    /// Gains R_t/max{μ_t, γ} at the logged action.
    PiwoClip,
    /// Raw importance-weighted gains minus the dense penalty n·β/μ(a|x).
    PiwoPl,
}

impl SweepLearner {
    pub fn name(self) -> &'static str {
        match self {
            SweepLearner::PiwoIx => "piwo-ix",
            SweepLearner::PiwoClip => "piwo-clip",
            SweepLearner::PiwoPl => "piwo-pl",
        }
    }
}

impl std::fmt::Display for SweepLearner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Sign of the behavior softmax exponent: `Good` favors actions the reward
/// model likes, `Bad` favors the ones it dislikes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyDirection {
    Good,
    Bad,
}

impl PolicyDirection {
    pub fn name(self) -> &'static str {
        match self {
            PolicyDirection::Good => "good",
            PolicyDirection::Bad => "bad",
        }
    }
}

impl std::fmt::Display for PolicyDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A parameter grid: either explicit values or a `logspace(lo,hi,count)`
/// expression (log-even between 10^lo and 10^hi inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Expression(String),
}

impl GridSpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Values(v) => Ok(v.clone()),
            GridSpec::Expression(s) => parse_logspace(s),
        }
    }
}

/// Log-even grid of `count` values from 10^lo to 10^hi inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo)],
        _ => (0..count)
            .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

fn parse_logspace(text: &str) -> Result<Vec<f64>> {
    let inner = text
        .trim()
        .strip_prefix("logspace(")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| {
            Error::config(format!(
                "grid expression {text:?} is not of the form logspace(lo,hi,count)"
            ))
        })?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::config(format!(
            "logspace expects 3 arguments, found {} in {text:?}",
            parts.len()
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::config(format!("logspace lo {:?} is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::config(format!("logspace hi {:?} is not a number", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::config(format!("logspace count {:?} is not an integer", parts[2])))?;
    if count == 0 {
        return Err(Error::config("logspace count must be at least 1"));
    }
    Ok(logspace(lo, hi, count))
}

fn default_learners() -> Vec<SweepLearner> {
    vec![SweepLearner::PiwoIx, SweepLearner::PiwoClip, SweepLearner::PiwoPl]
}

fn default_folds() -> usize {
    10
}

fn default_fit_fraction() -> f64 {
    0.1
}

fn default_direction() -> PolicyDirection {
    PolicyDirection::Good
}

fn default_ridge_alpha() -> f64 {
    1.0
}

/// Full sweep configuration; deserializable from TOML. Omitted fields fall
/// back to the standard protocol (all learners, 10 folds, 10% behavior fit,
/// good direction, α = 1, seed 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eta_grid: GridSpec,
    pub hyper_grid: GridSpec,
    #[serde(default = "default_learners")]
    pub learners: Vec<SweepLearner>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_fit_fraction")]
    pub behavior_fit_fraction: f64,
    #[serde(default = "default_direction")]
    pub direction: PolicyDirection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ridge_alpha")]
    pub ridge_alpha: f64,
}

impl SweepConfig {
    /// A configuration with the given grids and every other field at its
    /// default (all learners, 10 folds, 10% behavior fit, good direction,
    /// α = 1, seed 0).
    pub fn new(eta_grid: GridSpec, hyper_grid: GridSpec) -> Self {
        SweepConfig {
            eta_grid,
            hyper_grid,
            learners: default_learners(),
            folds: default_folds(),
            behavior_fit_fraction: default_fit_fraction(),
            direction: default_direction(),
            seed: 0,
            ridge_alpha: default_ridge_alpha(),
        }
    }
}

/// One sweep cell's outcome: a learner/temperature/hyperparameter/fold
/// combination with its exact held-out value and regret.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub learner: SweepLearner,
    pub direction: PolicyDirection,
    pub eta: f64,
    pub hyperparam: f64,
    pub fold: usize,
    pub expected_reward: f64,
    pub regret: f64,
    pub n_train: usize,
    pub seed: u64,
}

/// Run a full sweep. Output is a pure function of (config, table, matrix):
/// rows arrive sorted by (learner position, η index, hyperparameter index,
/// fold), one row per cell.
pub fn run_sweep(
    config: &SweepConfig,
    table: &ClassificationTable,
    m: &RewardMatrix,
) -> Result<Vec<SweepRow>> {
    let etas = config.eta_grid.resolve()?;
    let hypers = config.hyper_grid.resolve()?;
    if etas.is_empty() || hypers.is_empty() {
        return Err(Error::config("sweep grids must be nonempty"));
    }
    if let Some(bad) = etas.iter().find(|e| !e.is_finite() || **e < 0.0) {
        return Err(Error::config(format!("eta grid value {bad} is not usable")));
    }
    if let Some(bad) = hypers.iter().find(|h| !h.is_finite() || **h < 0.0) {
        return Err(Error::config(format!(
            "hyperparameter grid value {bad} is not usable"
        )));
    }
    if config.learners.is_empty() {
        return Err(Error::config("sweep needs at least one learner"));
    }
    if config.folds < 2 {
        return Err(Error::config(format!(
            "folds = {}, expected at least 2",
            config.folds
        )));
    }
    if !(config.behavior_fit_fraction > 0.0 && config.behavior_fit_fraction < 1.0) {
        return Err(Error::config(format!(
            "behavior_fit_fraction = {}, expected in (0,1)",
            config.behavior_fit_fraction
        )));
    }
    if table.num_classes() != m.k() {
        return Err(Error::config(format!(
            "table has {} classes but the reward matrix is {}x{}",
            table.num_classes(),
            m.k(),
            m.k()
        )));
    }

    let n = table.num_rows();
    let fit_count = ((config.behavior_fit_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let pool = n - fit_count;
    if pool < config.folds {
        return Err(Error::config(format!(
            "{pool} rows available for {} folds; every fold needs at least one row",
            config.folds
        )));
    }

    // Seeded shuffle, then: behavior-fit block, fold pool in shuffled order.
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = SplitMix64::new(derive_seed(config.seed, SHUFFLE_TAG));
    for i in (1..n).rev() {
        let j = shuffle_rng.next_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let fit_rows = &order[..fit_count];
    let pool_rows = &order[fit_count..];

    let reg_model = fit_ridge(&table.select_rows(fit_rows)?, m, config.ridge_alpha)?;
    let predictions: Vec<Vec<f64>> = pool_rows
        .iter()
        .map(|&row| reg_model.predict(table.feature_row(row)))
        .collect::<Result<Vec<_>>>()?;

    // Contiguous fold blocks over the shuffled pool.
    let base = pool / config.folds;
    let extra = pool % config.folds;
    let mut fold_bounds = Vec::with_capacity(config.folds);
    let mut start = 0;
    for f in 0..config.folds {
        let size = base + usize::from(f < extra);
        fold_bounds.push((start, start + size));
        start += size;
    }

    let cells: Vec<(usize, usize)> = (0..etas.len())
        .flat_map(|e| (0..config.folds).map(move |f| (e, f)))
        .collect();
    let data_root = derive_seed(config.seed, DATA_TAG);

    type Keyed = ((usize, usize, usize, usize), SweepRow);
    let per_cell: Vec<Vec<Keyed>> = cells
        .into_par_iter()
        .map(|(eta_idx, fold)| -> Result<Vec<Keyed>> {
            let eta = etas[eta_idx];
            let (lo, hi) = fold_bounds[fold];
            let train_pos: Vec<usize> =
                (0..pool).filter(|p| *p < lo || *p >= hi).collect();
            let n_train = train_pos.len();

            // Behavior propensities and one logged interaction per training
            // row, shared by every learner and hyperparameter in this cell.
            let behavior: Vec<Vec<f64>> = train_pos
                .iter()
                .map(|&p| softmax_row(&predictions[p], eta, config.direction).0)
                .collect();
            let mut rng = SplitMix64::new(derive_seed(
                data_root,
                (eta_idx * config.folds + fold) as u64,
            ));
            let mut actions = Vec::with_capacity(n_train);
            let mut rewards = Vec::with_capacity(n_train);
            for (t, &p) in train_pos.iter().enumerate() {
                let a = sample_from_row(&mut rng, &behavior[t]);
                let mean = m.reward(a, table.label(pool_rows[p]));
                let r = if rng.next_f64() < mean { 1.0 } else { 0.0 };
                actions.push(a);
                rewards.push(r);
            }

            let train_features: Vec<Vec<f64>> = train_pos
                .iter()
                .map(|&p| table.feature_row(pool_rows[p]).to_vec())
                .collect();
            let k = m.k();

            let mut rows = Vec::with_capacity(config.learners.len() * hypers.len());
            for (li, &learner) in config.learners.iter().enumerate() {
                for (hi_idx, &h) in hypers.iter().enumerate() {
                    let targets: Vec<Vec<f64>> = (0..n_train)
                        .map(|t| {
                            gain_row(
                                learner,
                                k,
                                actions[t],
                                rewards[t],
                                &behavior[t],
                                h,
                                n_train,
                            )
                        })
                        .collect();
                    let oracle =
                        ridge_regression(&train_features, &targets, config.ridge_alpha, true)?;

                    let mut reward_sum = 0.0;
                    let mut best_sum = 0.0;
                    for p in lo..hi {
                        let preds = oracle.predict(table.feature_row(pool_rows[p]))?;
                        let a = argmax_lowest_index(&preds);
                        let label = table.label(pool_rows[p]);
                        reward_sum += m.reward(a, label);
                        best_sum += (0..k)
                            .map(|b| m.reward(b, label))
                            .fold(f64::NEG_INFINITY, f64::max);
                    }
                    let fold_size = (hi - lo) as f64;
                    rows.push((
                        (li, eta_idx, hi_idx, fold),
                        SweepRow {
                            learner,
                            direction: config.direction,
                            eta,
                            hyperparam: h,
                            fold,
                            expected_reward: reward_sum / fold_size,
                            regret: (best_sum - reward_sum) / fold_size,
                            n_train,
                            seed: config.seed,
                        },
                    ));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut keyed: Vec<Keyed> = per_cell.into_iter().flatten().collect();
    keyed.sort_by_key(|(key, _)| *key);
    Ok(keyed.into_iter().map(|(_, row)| row).collect())
}

/// Per-record gain vector handed to the ridge oracle.
fn gain_row(
    learner: SweepLearner,
    k: usize,
    action: usize,
    reward: f64,
    propensities: &[f64],
    h: f64,
    n_train: usize,
) -> Vec<f64> {
    let mut row = vec![0.0; k];
    match learner {
        SweepLearner::PiwoIx => {
            row[action] = reward / (propensities[action] + h);
        }
        SweepLearner::PiwoClip => {
            row[action] = reward / propensities[action].max(h);
        }
        SweepLearner::PiwoPl => {
            for a in 0..k {
                row[a] = -(n_train as f64 * h / propensities[a]);
            }
            row[action] += reward / propensities[action];
            for g in &mut row {
                *g = g.clamp(-GAIN_CLAMP, GAIN_CLAMP);
            }
        }
    }
    row
}

fn sample_from_row(rng: &mut SplitMix64, probs: &[f64]) -> usize {
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
