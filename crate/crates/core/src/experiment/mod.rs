//! Supervised-to-bandit experiments: classification tables, reward matrices,
//! the ridge reward model, softmax behavior families, and sweep execution.
//!
//! A classification data set becomes a contextual bandit by treating feature
//! rows as contexts and labels as optimal actions: a fixed random matrix M
//! (ones on the diagonal) maps (action, label) pairs to mean rewards, and
//! realized rewards are Bernoulli draws. Everything downstream — behavior
//! policies, logged data, learner evaluation — runs against that induced
//! instance, whose true mean rewards stay available for exact evaluation.

mod ridge;
mod sweep;

pub use ridge::{fit_ridge, ridge_regression, softmax_behavior, RidgeModel};
pub use sweep::{
    run_sweep, GridSpec, PolicyDirection, SweepConfig, SweepLearner, SweepRow, GAIN_CLAMP,
};

use std::path::Path;

use crate::bandit::{Context, FiniteContextualBandit, NoiseModel};
use crate::rng::{derive_seed, SplitMix64};
use crate::{Error, Result};

// ─── Classification tables ──────────────────────────────────────────────────

/// A plain classification data set: finite feature rows and one label per
/// row. Labels are stored 0-based internally; the file formats use 1..K.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationTable {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    num_features: usize,
    num_classes: usize,
}

impl ClassificationTable {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::data("classification table has no rows"));
        }
        if features.len() != labels.len() {
            return Err(Error::data(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if num_classes == 0 {
            return Err(Error::data("classification table needs at least one class"));
        }
        let num_features = features[0].len();
        if num_features == 0 {
            return Err(Error::data("classification rows need at least one feature"));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != num_features {
                return Err(Error::data(format!(
                    "row {} has {} features, expected {num_features}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::data(format!(
                    "row {} has non-finite feature value {bad}",
                    i + 1
                )));
            }
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::data(format!(
                "row {} has label {} outside 1..={num_classes}",
                i + 1,
                l + 1
            )));
        }
        Ok(ClassificationTable {
            features,
            labels,
            num_features,
            num_classes,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.features.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn feature_row(&self, row: usize) -> &[f64] {
        &self.features[row]
    }

    /// 0-based label of a row.
    pub fn label(&self, row: usize) -> usize {
        self.labels[row]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// A new table holding the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let features = rows.iter().map(|&r| self.features[r].clone()).collect();
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        ClassificationTable::new(features, labels, self.num_classes)
    }
}

// ─── Reward matrices ────────────────────────────────────────────────────────

/// The K×K reward table M: playing action a in a context whose optimal
/// action is a* yields mean reward M[a, a*]. The diagonal is exactly 1, so
/// the optimal action is always worth 1; off-diagonal entries live in [0,1)
/// and stay fixed for the lifetime of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix {
    entries: Vec<Vec<f64>>,
}

impl RewardMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let k = entries.len();
        if k == 0 {
            return Err(Error::data("reward matrix must be nonempty"));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != k {
                return Err(Error::data(format!(
                    "reward matrix row {} has {} entries, expected {k}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &m) in row.iter().enumerate() {
                if i == j {
                    if m != 1.0 {
                        return Err(Error::data(format!(
                            "reward matrix diagonal entry ({},{}) is {m}, expected exactly 1",
                            i + 1,
                            j + 1
                        )));
                    }
                } else if !(0.0..1.0).contains(&m) {
                    return Err(Error::data(format!(
                        "reward matrix entry ({},{}) is {m}, expected in [0,1)",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(RewardMatrix { entries })
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    /// Mean reward M[action, label] for playing `action` where `label` is
    /// the row's optimal action (both 0-based).
    pub fn reward(&self, action: usize, label: usize) -> f64 {
        self.entries[action][label]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

/// Draw a reward matrix: diagonal exactly 1, off-diagonal uniform on [0,1).
/// Deterministic per seed.
pub fn build_reward_matrix(k: usize, seed: u64) -> Result<RewardMatrix> {
    if k == 0 {
        return Err(Error::argument("reward matrix needs k >= 1"));
    }
    let mut rng = SplitMix64::new(derive_seed(seed, 0x4d)); // 'M'
    let entries = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { 1.0 } else { rng.next_f64() })
                .collect()
        })
        .collect();
    RewardMatrix::new(entries)
}

/// Induce a bandit instance from a classification table: one context per
/// row (uniform ν, features carried along), K actions, mean rewards
/// r(x,a) = M[a, a*(x)], Bernoulli reward noise.
pub fn supervised_to_bandit(
    table: &ClassificationTable,
    m: &RewardMatrix,
) -> Result<FiniteContextualBandit> {
    if table.num_classes() != m.k() {
        return Err(Error::data(format!(
            "table has {} classes but the reward matrix is {}x{}",
            table.num_classes(),
            m.k(),
            m.k()
        )));
    }
    let n = table.num_rows();
    let contexts = (0..n)
        .map(|i| Context::with_features(format!("r{}", i + 1), table.feature_row(i).to_vec()))
        .collect();
    let mean_rewards = (0..n)
        .map(|i| (0..m.k()).map(|a| m.reward(a, table.label(i))).collect())
        .collect();
    FiniteContextualBandit::new(
        contexts,
        vec![1.0 / n as f64; n],
        m.k(),
        mean_rewards,
        NoiseModel::Bernoulli,
    )
}

// ─── Synthetic data ─────────────────────────────────────────────────────────

/// Scale of the Gaussian cluster centers relative to unit per-class noise.
/// Chosen so classes overlap enough that a linear reward model leaves some
/// contexts genuinely ambiguous, but separate enough that good behavior
/// policies exist.
const CLUSTER_CENTER_SCALE: f64 = 0.5;

/// Generate a synthetic classification table: one Gaussian cluster per
/// class (seeded centers, unit noise), labels drawn uniformly per row.
/// Deterministic per seed.
pub fn generate_synthetic_classification(
    num_rows: usize,
    num_features: usize,
    k: usize,
    seed: u64,
) -> Result<ClassificationTable> {
    if num_rows == 0 || num_features == 0 || k == 0 {
        return Err(Error::argument(format!(
            "synthetic table needs positive sizes, got rows={num_rows} features={num_features} k={k}"
        )));
    }
    let mut center_rng = SplitMix64::new(derive_seed(seed, 0x63)); // 'c'
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            (0..num_features)
                .map(|_| CLUSTER_CENTER_SCALE * center_rng.next_gaussian())
                .collect()
        })
        .collect();
    let mut row_rng = SplitMix64::new(derive_seed(seed, 0x72)); // 'r'
    let mut features = Vec::with_capacity(num_rows);
    let mut labels = Vec::with_capacity(num_rows);
    for _ in 0..num_rows {
        let label = row_rng.next_below(k as u64) as usize;
        labels.push(label);
        features.push(
            (0..num_features)
                .map(|j| centers[label][j] + row_rng.next_gaussian())
                .collect(),
        );
    }
    ClassificationTable::new(features, labels, k)
}

// ─── CSV ingestion ──────────────────────────────────────────────────────────

/// Load a headerless classification CSV: numeric feature columns plus one
/// integer label column (`label_column` 0-based; `None` means the last
/// column). Distinct raw labels are remapped to 0..K in increasing order, so
/// the mapping depends only on which labels occur, not on row order, and a
/// table written back out (1-based labels) reloads identically. Errors name
/// the offending line.
pub fn load_classification_csv(
    path: impl AsRef<Path>,
    label_column: Option<usize>,
) -> Result<ClassificationTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::data(format!(
                "cannot open {}: {e}",
                path.as_ref().display()
            )),
            _ => Error::data(e.to_string()),
        })?;

    let mut features = Vec::new();
    let mut raw_labels: Vec<i64> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
        let width = record.len();
        if width < 2 {
            return Err(Error::parse(
                line,
                format!("expected at least one feature and a label, found {width} fields"),
            ));
        }
        let label_idx = label_column.unwrap_or(width - 1);
        if label_idx >= width {
            return Err(Error::parse(
                line,
                format!("label column {label_idx} out of range for {width} fields"),
            ));
        }
        let mut row = Vec::with_capacity(width - 1);
        let mut label = None;
        for (col, field) in record.iter().enumerate() {
            if col == label_idx {
                let value: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(line, format!("label {field:?} is not numeric")))?;
                if value.fract() != 0.0 || !value.is_finite() {
                    return Err(Error::parse(
                        line,
                        format!("label {field:?} is not an integer"),
                    ));
                }
                label = Some(value as i64);
            } else {
                row.push(field.parse::<f64>().map_err(|_| {
                    Error::parse(line, format!("feature {field:?} is not a number"))
                })?);
            }
        }
        features.push(row);
        raw_labels.push(label.expect("label column visited"));
    }
    if features.is_empty() {
        return Err(Error::data("classification file has no rows"));
    }

    let mut distinct = raw_labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let labels = raw_labels
        .iter()
        .map(|raw| distinct.binary_search(raw).expect("label is in the dedup set"))
        .collect();
    ClassificationTable::new(features, labels, distinct.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn reward_matrix_shapes_and_ranges() {
        assert_eq!(build_reward_matrix(1, 0).unwrap().entries(), &[vec![1.0]]);
        let m = build_reward_matrix(26, 9).unwrap();
        assert_eq!(m.k(), 26);
        for i in 0..26 {
            for j in 0..26 {
                let v = m.reward(i, j);
                if i == j {
                    assert_eq!(v, 1.0);
                } else {
                    assert!((0.0..1.0).contains(&v));
                }
            }
        }
        assert_eq!(m, build_reward_matrix(26, 9).unwrap());
        assert_ne!(m, build_reward_matrix(26, 10).unwrap());
    }

    #[test]
    fn reward_matrix_validation() {
        assert!(RewardMatrix::new(vec![]).is_err());
        assert!(RewardMatrix::new(vec![vec![0.999]]).is_err());
        assert!(RewardMatrix::new(vec![vec![1.0, 1.0], vec![0.0, 1.0]]).is_err());
        assert!(RewardMatrix::new(vec![vec![1.0, 0.5]]).is_err());
        assert!(RewardMatrix::new(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).is_ok());
    }

    #[test]
    fn bandit_induction_matches_column_lookup() {
        let m = RewardMatrix::new(vec![vec![1.0, 0.3], vec![0.6, 1.0]]).unwrap();
        let table = ClassificationTable::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0, 1, 0],
            2,
        )
        .unwrap();
        let inst = supervised_to_bandit(&table, &m).unwrap();
        assert_eq!(inst.num_contexts(), 3);
        assert_eq!(inst.num_actions(), 2);
        assert_eq!(inst.mean_rewards()[0], vec![1.0, 0.6]);
        assert_eq!(inst.mean_rewards()[1], vec![0.3, 1.0]);
        assert_eq!(inst.mean_rewards()[2], vec![1.0, 0.6]);
        assert_eq!(inst.noise(), NoiseModel::Bernoulli);
        for &p in inst.context_probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        // Playing the optimal action always has mean reward exactly 1.
        for (i, row) in inst.mean_rewards().iter().enumerate() {
            assert_eq!(row[table.label(i)], 1.0);
        }
    }

    #[test]
    fn bandit_induction_rejects_class_mismatch() {
        let m = build_reward_matrix(3, 0).unwrap();
        let table =
            ClassificationTable::new(vec![vec![0.0]], vec![0], 2).unwrap();
        assert!(supervised_to_bandit(&table, &m).is_err());
    }

    #[test]
    fn synthetic_tables_are_seeded_and_cover_classes() {
        let t = generate_synthetic_classification(2000, 8, 10, 1).unwrap();
        assert_eq!(t.num_rows(), 2000);
        assert_eq!(t.num_features(), 8);
        assert_eq!(t.num_classes(), 10);
        let mut seen = vec![false; 10];
        for &l in t.labels() {
            seen[l] = true;
        }
        assert!(seen.iter().all(|&s| s), "all classes present");
        assert_eq!(t, generate_synthetic_classification(2000, 8, 10, 1).unwrap());
        assert_ne!(t, generate_synthetic_classification(2000, 8, 10, 2).unwrap());

        let single = generate_synthetic_classification(50, 3, 1, 4).unwrap();
        assert!(single.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn table_validation_and_row_selection() {
        assert!(ClassificationTable::new(vec![], vec![], 2).is_err());
        assert!(ClassificationTable::new(vec![vec![1.0]], vec![2], 2).is_err());
        assert!(
            ClassificationTable::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0, 0], 1).is_err()
        );
        assert!(ClassificationTable::new(vec![vec![f64::NAN]], vec![0], 1).is_err());

        let t = ClassificationTable::new(
            vec![vec![1.0], vec![2.0], vec![3.0]],
            vec![0, 1, 0],
            2,
        )
        .unwrap();
        let sel = t.select_rows(&[2, 0]).unwrap();
        assert_eq!(sel.features(), &[vec![3.0], vec![1.0]]);
        assert_eq!(sel.labels(), &[0, 0]);
        assert_eq!(sel.num_classes(), 2);
    }

    #[test]
    fn csv_loading_remaps_labels_and_names_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        std::fs::write(&path, "0.5,1.5,5\n0.25,2.5,9\n0.125,3.5,5\n").unwrap();
        let t = load_classification_csv(&path, None).unwrap();
        assert_eq!(t.num_rows(), 3);
        assert_eq!(t.num_features(), 2);
        assert_eq!(t.labels(), &[0, 1, 0]);
        assert_eq!(t.num_classes(), 2);
        assert_eq!(t.feature_row(1), &[0.25, 2.5]);

        // Remapping follows sorted label order, not appearance order.
        let reversed = dir.path().join("reversed.csv");
        std::fs::write(&reversed, "0.5,1.5,9\n0.25,2.5,5\n").unwrap();
        let t = load_classification_csv(&reversed, None).unwrap();
        assert_eq!(t.labels(), &[1, 0]);

        // Label column override: first column as label.
        let first = dir.path().join("first.csv");
        std::fs::write(&first, "5,1.5,0.5\n9,2.5,0.25\n5,3.5,0.125\n").unwrap();
        let t = load_classification_csv(&first, Some(0)).unwrap();
        assert_eq!(t.labels(), &[0, 1, 0]);
        assert_eq!(t.feature_row(0), &[1.5, 0.5]);

        let bad = dir.path().join("bad.csv");
        let mut f = std::fs::File::create(&bad).unwrap();
        for _ in 0..6 {
            writeln!(f, "1.0,2.0,1").unwrap();
        }
        writeln!(f, "1.0,oops,1").unwrap();
        drop(f);
        let err = load_classification_csv(&bad, None).unwrap_err().to_string();
        assert!(err.contains("line 7"), "{err}");

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(load_classification_csv(&empty, None).is_err());
        assert!(load_classification_csv(dir.path().join("nope.csv"), None).is_err());
    }

    #[test]
    fn csv_loading_rejects_fractional_labels_and_short_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frac.csv");
        std::fs::write(&path, "1.0,2.5\n").unwrap();
        let err = load_classification_csv(&path, None).unwrap_err().to_string();
        assert!(err.contains("integer"), "{err}");

        let narrow = dir.path().join("narrow.csv");
        std::fs::write(&narrow, "7\n").unwrap();
        assert!(load_classification_csv(&narrow, None).is_err());
    }
}
