//! File formats: TOML for structured artifacts (instances, policy classes,
//! bound-check specs), CSV for tabular ones (logged data, distributions,
//! reward matrices, sweep results).
//!
//! Numbers round-trip exactly: both the TOML and CSV writers emit the
//! shortest representation that parses back to the identical f64, so
//! write-then-read is lossless and rerunning a writer is byte-identical.
//! Action indexes are 1-based in every file and 0-based in memory; logged
//! records reference contexts by id, resolved against the instance on read.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandit::{
    Context, FiniteContextualBandit, LoggedDataset, LoggedRecord, NoiseModel, PolicyClass,
    TabularPolicy,
};
use crate::experiment::{ClassificationTable, RewardMatrix, SweepConfig, SweepRow};
use crate::pac_bayes::PolicyDistribution;
use crate::tails::{BoundTarget, ViolationReport};
use crate::{Error, Result};

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

fn render_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string_pretty(value).map_err(|e| Error::data(format!("cannot serialize: {e}")))
}

// ─── Instances ──────────────────────────────────────────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum NoiseName {
    Deterministic,
    Bernoulli,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextFile {
    id: String,
    prob: f64,
    rewards: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    num_actions: usize,
    noise: NoiseName,
    contexts: Vec<ContextFile>,
}

/// Read a bandit instance from TOML: `num_actions`, `noise`
/// (`"deterministic"` or `"bernoulli"`), and one `[[contexts]]` block per
/// context with `id`, `prob`, `rewards` (and optional `features`).
pub fn read_instance(path: impl AsRef<Path>) -> Result<FiniteContextualBandit> {
    let path = path.as_ref();
    let file: InstanceFile = parse_toml(path, &read_file(path)?)?;
    let mut contexts = Vec::with_capacity(file.contexts.len());
    let mut probs = Vec::with_capacity(file.contexts.len());
    let mut rewards = Vec::with_capacity(file.contexts.len());
    for c in file.contexts {
        contexts.push(match c.features {
            Some(f) => Context::with_features(c.id, f),
            None => Context::new(c.id),
        });
        probs.push(c.prob);
        rewards.push(c.rewards);
    }
    let noise = match file.noise {
        NoiseName::Deterministic => NoiseModel::Deterministic,
        NoiseName::Bernoulli => NoiseModel::Bernoulli,
    };
    FiniteContextualBandit::new(contexts, probs, file.num_actions, rewards, noise)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &FiniteContextualBandit) -> Result<()> {
    let file = InstanceFile {
        num_actions: instance.num_actions(),
        noise: match instance.noise() {
            NoiseModel::Deterministic => NoiseName::Deterministic,
            NoiseModel::Bernoulli => NoiseName::Bernoulli,
        },
        contexts: instance
            .contexts()
            .iter()
            .enumerate()
            .map(|(i, c)| ContextFile {
                id: c.id.clone(),
                prob: instance.context_probs()[i],
                rewards: instance.mean_rewards()[i].clone(),
                features: c.features.clone(),
            })
            .collect(),
    };
    write_file(path.as_ref(), &render_toml(&file)?)
}

// ─── Policy classes ─────────────────────────────────────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    name: String,
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyClassFile {
    contexts: Vec<String>,
    num_actions: usize,
    policies: Vec<PolicyFile>,
}

/// A policy class as loaded from disk: the class itself plus the context-id
/// binding and per-policy names the file carries.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyClassDocument {
    pub context_ids: Vec<String>,
    pub names: Vec<String>,
    pub class: PolicyClass,
}

impl PolicyClassDocument {
    pub fn new(context_ids: Vec<String>, names: Vec<String>, class: PolicyClass) -> Result<Self> {
        if context_ids.len() != class.num_contexts() {
            return Err(Error::config(format!(
                "{} context ids for policies over {} contexts",
                context_ids.len(),
                class.num_contexts()
            )));
        }
        if names.len() != class.len() {
            return Err(Error::config(format!(
                "{} names for {} policies",
                names.len(),
                class.len()
            )));
        }
        Ok(PolicyClassDocument {
            context_ids,
            names,
            class,
        })
    }

    /// Verify that this document's context binding matches an instance's
    /// context order and action count.
    pub fn check_instance_alignment(&self, instance: &FiniteContextualBandit) -> Result<()> {
        if self.class.num_actions() != instance.num_actions() {
            return Err(Error::config(format!(
                "policy file has {} actions, instance has {}",
                self.class.num_actions(),
                instance.num_actions()
            )));
        }
        let instance_ids: Vec<&str> =
            instance.contexts().iter().map(|c| c.id.as_str()).collect();
        let file_ids: Vec<&str> = self.context_ids.iter().map(String::as_str).collect();
        if instance_ids != file_ids {
            return Err(Error::config(format!(
                "policy file context order {file_ids:?} does not match instance {instance_ids:?}"
            )));
        }
        Ok(())
    }
}

/// Read a policy class from TOML: the `contexts` id list fixing row order,
/// `num_actions`, and one `[[policies]]` block (`name`, `rows`) per member.
pub fn read_policy_class(path: impl AsRef<Path>) -> Result<PolicyClassDocument> {
    let path = path.as_ref();
    let file: PolicyClassFile = parse_toml(path, &read_file(path)?)?;
    let mut names = Vec::with_capacity(file.policies.len());
    let mut members = Vec::with_capacity(file.policies.len());
    for p in file.policies {
        let policy = TabularPolicy::new(p.rows)
            .map_err(|e| Error::config(format!("{}: policy {}: {e}", path.display(), p.name)))?;
        if policy.num_contexts() != file.contexts.len()
            || policy.num_actions() != file.num_actions
        {
            return Err(Error::config(format!(
                "{}: policy {} is {}x{}, expected {}x{}",
                path.display(),
                p.name,
                policy.num_contexts(),
                policy.num_actions(),
                file.contexts.len(),
                file.num_actions
            )));
        }
        names.push(p.name);
        members.push(policy);
    }
    let class = PolicyClass::new(members)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    PolicyClassDocument::new(file.contexts, names, class)
}

pub fn write_policy_class(path: impl AsRef<Path>, doc: &PolicyClassDocument) -> Result<()> {
    let file = PolicyClassFile {
        contexts: doc.context_ids.clone(),
        num_actions: doc.class.num_actions(),
        policies: doc
            .names
            .iter()
            .zip(doc.class.iter())
            .map(|(name, policy)| PolicyFile {
                name: name.clone(),
                rows: policy.rows().to_vec(),
            })
            .collect(),
    };
    write_file(path.as_ref(), &render_toml(&file)?)
}

/// Read a class file that must contain exactly one policy (used for behavior
/// policies).
pub fn read_single_policy(path: impl AsRef<Path>) -> Result<(String, TabularPolicy)> {
    let path = path.as_ref();
    let doc = read_policy_class(path)?;
    if doc.class.len() != 1 {
        return Err(Error::config(format!(
            "{}: expected exactly one policy, found {}",
            path.display(),
            doc.class.len()
        )));
    }
    Ok((doc.names[0].clone(), doc.class.get(0).clone()))
}

// ─── Logged data ────────────────────────────────────────────────────────────

const DATASET_HEADER: [&str; 4] = ["context_id", "action", "reward", "propensity"];

/// Write logged data as CSV with header `context_id,action,reward,propensity`
/// (actions 1-based, contexts by id).
pub fn write_dataset(
    path: impl AsRef<Path>,
    dataset: &LoggedDataset,
    instance: &FiniteContextualBandit,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&DATASET_HEADER.join(","));
    out.push('\n');
    for r in dataset.records() {
        let id = &instance
            .contexts()
            .get(r.context)
            .ok_or_else(|| {
                Error::data(format!("record context {} outside the instance", r.context))
            })?
            .id;
        out.push_str(&format!(
            "{},{},{},{}\n",
            id,
            r.action + 1,
            r.reward,
            r.propensity
        ));
    }
    write_file(path.as_ref(), &out)
}

/// Read logged data written by [`write_dataset`], resolving context ids
/// against the instance. Errors name the offending line (header = line 1).
pub fn read_dataset(
    path: impl AsRef<Path>,
    instance: &FiniteContextualBandit,
) -> Result<LoggedDataset> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data(format!("{}: empty dataset file", path.display())))?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != DATASET_HEADER {
        return Err(Error::parse(
            1,
            format!("expected header {:?}, found {header:?}", DATASET_HEADER.join(",")),
        ));
    }
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let context = instance.context_index(fields[0]).ok_or_else(|| {
            Error::parse(line, format!("unknown context id {:?}", fields[0]))
        })?;
        let action: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("action {:?} is not an integer", fields[1])))?;
        if action == 0 || action > instance.num_actions() {
            return Err(Error::parse(
                line,
                format!(
                    "action {action} outside 1..={}",
                    instance.num_actions()
                ),
            ));
        }
        let reward: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(line, format!("reward {:?} is not a number", fields[2])))?;
        let propensity: f64 = fields[3].parse().map_err(|_| {
            Error::parse(line, format!("propensity {:?} is not a number", fields[3]))
        })?;
        records.push(
            LoggedRecord::new(context, action - 1, reward, propensity)
                .map_err(|e| Error::parse(line, e.to_string()))?,
        );
    }
    Ok(LoggedDataset::new(records))
}

// ─── Distributions ──────────────────────────────────────────────────────────

/// Write a policy distribution as CSV with header `index,weight`, one row
/// per class index (0-based).
pub fn write_distribution(path: impl AsRef<Path>, dist: &PolicyDistribution) -> Result<()> {
    let mut out = String::from("index,weight\n");
    for (i, w) in dist.weights().iter().enumerate() {
        out.push_str(&format!("{i},{w}\n"));
    }
    write_file(path.as_ref(), &out)
}

/// Read a distribution over `len` policies from `index,weight` CSV. Indexes
/// may be sparse (missing ones get weight 0) but not repeated; weights are
/// normalized, so priors may be written unnormalized.
pub fn read_distribution(path: impl AsRef<Path>, len: usize) -> Result<PolicyDistribution> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data(format!("{}: empty distribution file", path.display())))?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != ["index", "weight"] {
        return Err(Error::parse(
            1,
            format!("expected header \"index,weight\", found {header:?}"),
        ));
    }
    let mut weights = vec![0.0; len];
    let mut seen = vec![false; len];
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                line,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("index {:?} is not an integer", fields[0])))?;
        if index >= len {
            return Err(Error::parse(
                line,
                format!("index {index} outside a class of {len}"),
            ));
        }
        if seen[index] {
            return Err(Error::parse(line, format!("index {index} listed twice")));
        }
        seen[index] = true;
        weights[index] = fields[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("weight {:?} is not a number", fields[1])))?;
    }
    PolicyDistribution::from_unnormalized(&weights)
}

// ─── Reward matrices ────────────────────────────────────────────────────────

/// Write a reward matrix as headerless CSV, one row per action.
pub fn write_reward_matrix(path: impl AsRef<Path>, m: &RewardMatrix) -> Result<()> {
    let mut out = String::new();
    for row in m.entries() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(path.as_ref(), &out)
}

pub fn read_reward_matrix(path: impl AsRef<Path>) -> Result<RewardMatrix> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let row = raw
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    Error::parse(idx + 1, format!("entry {:?} is not a number", f.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        entries.push(row);
    }
    RewardMatrix::new(entries)
}

// ─── Classification tables ──────────────────────────────────────────────────

/// Write a classification table as headerless CSV: feature columns then the
/// 1-based label, matching what `load_classification_csv` reads back.
pub fn write_classification_csv(path: impl AsRef<Path>, table: &ClassificationTable) -> Result<()> {
    let mut out = String::new();
    for i in 0..table.num_rows() {
        let mut cells: Vec<String> = table.feature_row(i).iter().map(f64::to_string).collect();
        cells.push((table.label(i) + 1).to_string());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(path.as_ref(), &out)
}

// ─── Sweep results and reports ──────────────────────────────────────────────

/// Write sweep rows as CSV with the exact header
/// `learner,direction,eta,hyperparam,fold,expected_reward,regret,n_train,seed`.
pub fn write_sweep_rows(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(
        "learner,direction,eta,hyperparam,fold,expected_reward,regret,n_train,seed\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.learner,
            r.direction,
            r.eta,
            r.hyperparam,
            r.fold,
            r.expected_reward,
            r.regret,
            r.n_train,
            r.seed
        ));
    }
    write_file(path, &out)
}

/// Write a violation report as a one-row CSV (plus header); the per-policy
/// gamma of the coverage-scaled target renders as an empty field.
pub fn write_violation_report_csv(path: impl AsRef<Path>, report: &ViolationReport) -> Result<()> {
    let gamma = report.gamma.map(|g| g.to_string()).unwrap_or_default();
    let out = format!(
        "target,trials,violations,violation_rate,delta,slack,gamma,bound_min,bound_mean,bound_max,min_margin,passed\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
        report.target,
        report.trials,
        report.violations,
        report.violation_rate,
        report.delta,
        report.slack,
        gamma,
        report.bound_min,
        report.bound_mean,
        report.bound_max,
        report.min_margin,
        report.passed
    );
    write_file(path.as_ref(), &out)
}

// ─── Run specs ──────────────────────────────────────────────────────────────

/// A bound-check run spec as stored on disk: the target and its parameters
/// plus paths (relative to the spec file) of the artifacts involved.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsSpecFile {
    pub target: BoundTarget,
    pub instance: PathBuf,
    pub behavior: PathBuf,
    pub class: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<usize>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub delta: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_mixtures: Option<usize>,
}

impl TailsSpecFile {
    /// Rebase the artifact paths onto the directory containing the spec file.
    pub fn rebase(&mut self, spec_path: &Path) {
        let base = spec_path.parent().unwrap_or_else(|| Path::new("."));
        let rebase_one = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        rebase_one(&mut self.instance);
        rebase_one(&mut self.behavior);
        rebase_one(&mut self.class);
        if let Some(prior) = &mut self.prior {
            rebase_one(prior);
        }
    }
}

/// Read a bound-check spec, rebasing relative artifact paths onto the spec
/// file's directory.
pub fn read_tails_spec(path: impl AsRef<Path>) -> Result<TailsSpecFile> {
    let path = path.as_ref();
    let mut spec: TailsSpecFile = parse_toml(path, &read_file(path)?)?;
    spec.rebase(path);
    Ok(spec)
}

pub fn read_sweep_config(path: impl AsRef<Path>) -> Result<SweepConfig> {
    let path = path.as_ref();
    parse_toml(path, &read_file(path)?)
}
