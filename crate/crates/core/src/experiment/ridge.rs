//! Multi-output ridge regression and the softmax behavior-policy family
//! built on top of it.
//!
//! The regressor doubles as the experiment's reward model and as the
//! cost-sensitive oracle: fit per-action targets against features, query it
//! on any context, and take an argmax (policy learning) or a softmax
//! (behavior construction) over the per-action predictions.

use nalgebra::DMatrix;

use crate::bandit::TabularPolicy;
use crate::experiment::{ClassificationTable, RewardMatrix};
use crate::{Error, Result};

use super::sweep::PolicyDirection;

/// A fitted linear model with one output per action: prediction for action a
/// at features x is `coefficients[a]·x + intercepts[a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    coefficients: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
    alpha: f64,
}

impl RidgeModel {
    pub fn num_outputs(&self) -> usize {
        self.coefficients.len()
    }

    pub fn num_features(&self) -> usize {
        self.coefficients[0].len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    /// Per-action predictions at a feature row.
    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.num_features() {
            return Err(Error::argument(format!(
                "prediction on {} features for a model fit on {}",
                features.len(),
                self.num_features()
            )));
        }
        Ok(self
            .coefficients
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| w.iter().zip(features).map(|(wi, xi)| wi * xi).sum::<f64>() + b)
            .collect())
    }
}

/// Solve the multi-output ridge problem: coefficients minimize
/// ‖Xw − y‖² + α‖w‖² per output column. With `intercept`, an unpenalized
/// per-output intercept is fit by centering features and targets first.
/// α > 0 keeps the normal equations positive definite, so a solution always
/// exists.
pub fn ridge_regression(
    features: &[Vec<f64>],
    targets: &[Vec<f64>],
    alpha: f64,
    intercept: bool,
) -> Result<RidgeModel> {
    if features.is_empty() {
        return Err(Error::argument("ridge fit needs at least one row"));
    }
    if features.len() != targets.len() {
        return Err(Error::argument(format!(
            "{} feature rows but {} target rows",
            features.len(),
            targets.len()
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::argument(format!(
            "ridge alpha = {alpha}, expected finite alpha > 0"
        )));
    }
    let n = features.len();
    let d = features[0].len();
    let k = targets[0].len();
    if d == 0 || k == 0 {
        return Err(Error::argument("ridge fit needs nonempty rows"));
    }
    for row in features {
        if row.len() != d {
            return Err(Error::argument("ragged feature rows in ridge fit"));
        }
    }
    for row in targets {
        if row.len() != k {
            return Err(Error::argument("ragged target rows in ridge fit"));
        }
    }

    let x_mean: Vec<f64> = if intercept {
        (0..d)
            .map(|j| features.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect()
    } else {
        vec![0.0; d]
    };
    let y_mean: Vec<f64> = if intercept {
        (0..k)
            .map(|a| targets.iter().map(|r| r[a]).sum::<f64>() / n as f64)
            .collect()
    } else {
        vec![0.0; k]
    };

    let x = DMatrix::from_fn(n, d, |i, j| features[i][j] - x_mean[j]);
    let y = DMatrix::from_fn(n, k, |i, a| targets[i][a] - y_mean[a]);

    let mut gram = x.transpose() * &x;
    for j in 0..d {
        gram[(j, j)] += alpha;
    }
    let rhs = x.transpose() * &y;
    let solution = gram
        .cholesky()
        .ok_or_else(|| {
            Error::argument("ridge normal equations are not positive definite (non-finite data?)")
        })?
        .solve(&rhs);

    let coefficients: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..d).map(|j| solution[(j, a)]).collect())
        .collect();
    let intercepts = (0..k)
        .map(|a| {
            y_mean[a]
                - x_mean
                    .iter()
                    .zip(&coefficients[a])
                    .map(|(m, w)| m * w)
                    .sum::<f64>()
        })
        .collect();
    Ok(RidgeModel {
        coefficients,
        intercepts,
        alpha,
    })
}

/// Fit the experiment's reward model: per-action ridge targets are the
/// reward-matrix column of each row's optimal action, M[·, a*(x)], with an
/// unpenalized intercept per action.
pub fn fit_ridge(
    table: &ClassificationTable,
    m: &RewardMatrix,
    alpha: f64,
) -> Result<RidgeModel> {
    if table.num_classes() != m.k() {
        return Err(Error::data(format!(
            "table has {} classes but the reward matrix is {}x{}",
            table.num_classes(),
            m.k(),
            m.k()
        )));
    }
    let targets: Vec<Vec<f64>> = (0..table.num_rows())
        .map(|i| (0..m.k()).map(|a| m.reward(a, table.label(i))).collect())
        .collect();
    ridge_regression(table.features(), &targets, alpha, true)
}

/// Max-shifted softmax of signed scores; exact-zero probabilities (deep
/// underflow) are clamped to the smallest positive normal magnitude so the
/// row remains a valid propensity vector. Returns the row plus how many
/// entries were clamped.
pub(crate) fn softmax_row(scores: &[f64], eta: f64, direction: PolicyDirection) -> (Vec<f64>, usize) {
    let sign = match direction {
        PolicyDirection::Good => 1.0,
        PolicyDirection::Bad => -1.0,
    };
    let exponents: Vec<f64> = scores.iter().map(|s| sign * eta * s).collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut row: Vec<f64> = exponents.iter().map(|z| (z - shift).exp()).collect();
    let total: f64 = row.iter().sum();
    let mut clamped = 0;
    for p in &mut row {
        *p /= total;
        if *p == 0.0 {
            *p = f64::MIN_POSITIVE;
            clamped += 1;
        }
    }
    (row, clamped)
}

/// The behavior-policy family: π_η(a|x) ∝ exp(±η·reg(x,a)) over the rows of
/// a table, positive sign for `Good` and negative for `Bad`. η = 0 gives
/// the uniform policy. Probabilities that underflow to exact zero are
/// clamped to the smallest positive normal value (with one warning per
/// call), so downstream propensities are always positive.
pub fn softmax_behavior(
    model: &RidgeModel,
    table: &ClassificationTable,
    eta: f64,
    direction: PolicyDirection,
) -> Result<TabularPolicy> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::argument(format!(
            "eta = {eta}, expected finite eta >= 0"
        )));
    }
    let mut rows = Vec::with_capacity(table.num_rows());
    let mut clamped = 0;
    for i in 0..table.num_rows() {
        let scores = model.predict(table.feature_row(i))?;
        let (row, c) = softmax_row(&scores, eta, direction);
        clamped += c;
        rows.push(row);
    }
    if clamped > 0 {
        log::warn!(
            "softmax behavior at eta={eta}: {clamped} propensities underflowed and were clamped \
             to {:e}",
            f64::MIN_POSITIVE
        );
    }
    TabularPolicy::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{build_reward_matrix, generate_synthetic_classification};

    #[test]
    fn single_feature_no_intercept_closed_form() {
        let model = ridge_regression(
            &[vec![1.0], vec![2.0]],
            &[vec![1.0], vec![2.0]],
            1.0,
            false,
        )
        .unwrap();
        // (x'x + α)⁻¹ x'y = 5/6.
        assert!((model.coefficients()[0][0] - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(model.intercepts(), &[0.0]);
        assert!((model.predict(&[3.0]).unwrap()[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constant_targets_fit_exactly_with_intercept() {
        let features = vec![vec![1.0, -2.0], vec![4.0, 0.5], vec![-3.0, 2.0]];
        let targets = vec![vec![0.7]; 3];
        let model = ridge_regression(&features, &targets, 1e-10, true).unwrap();
        for row in &features {
            assert!((model.predict(row).unwrap()[0] - 0.7).abs() < 1e-6);
        }
        assert!((model.predict(&[100.0, -40.0]).unwrap()[0] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn shrinkage_is_monotone_in_alpha() {
        let table = generate_synthetic_classification(80, 3, 4, 5).unwrap();
        let m = build_reward_matrix(4, 5).unwrap();
        let norm = |alpha: f64| {
            let model = fit_ridge(&table, &m, alpha).unwrap();
            model
                .coefficients()
                .iter()
                .flat_map(|w| w.iter().map(|c| c * c))
                .sum::<f64>()
                .sqrt()
        };
        let mut prev = norm(1e-4);
        for alpha in [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0] {
            let next = norm(alpha);
            assert!(next <= prev + 1e-12, "alpha {alpha}: {next} > {prev}");
            prev = next;
        }
    }

    #[test]
    fn normal_equation_residual_is_tiny() {
        let table = generate_synthetic_classification(60, 4, 3, 11).unwrap();
        let m = build_reward_matrix(3, 11).unwrap();
        let alpha = 0.5;
        let model = fit_ridge(&table, &m, alpha).unwrap();
        // Recompute (Xc'Xc + αI)w − Xc'Yc per output; centering reduces the
        // intercept away, so the residual should be at solver precision.
        let n = table.num_rows();
        let d = table.num_features();
        let x_mean: Vec<f64> = (0..d)
            .map(|j| table.features().iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let targets: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..3).map(|a| m.reward(a, table.label(i))).collect())
            .collect();
        let y_mean: Vec<f64> =
            (0..3).map(|a| targets.iter().map(|r| r[a]).sum::<f64>() / n as f64).collect();
        let mut target_norm = 0.0f64;
        let mut residual_norm = 0.0f64;
        for a in 0..3 {
            for j in 0..d {
                let mut lhs = alpha * model.coefficients()[a][j];
                for jj in 0..d {
                    let gram_jjj: f64 = (0..n)
                        .map(|i| {
                            (table.feature_row(i)[j] - x_mean[j])
                                * (table.feature_row(i)[jj] - x_mean[jj])
                        })
                        .sum();
                    lhs += gram_jjj * model.coefficients()[a][jj];
                }
                let rhs: f64 = (0..n)
                    .map(|i| (table.feature_row(i)[j] - x_mean[j]) * (targets[i][a] - y_mean[a]))
                    .sum();
                residual_norm += (lhs - rhs) * (lhs - rhs);
                target_norm += rhs * rhs;
            }
        }
        assert!(residual_norm.sqrt() <= 1e-8 * target_norm.sqrt().max(1.0));
    }

    #[test]
    fn ridge_rejects_bad_shapes_and_alpha() {
        assert!(ridge_regression(&[], &[], 1.0, true).is_err());
        assert!(ridge_regression(&[vec![1.0]], &[vec![1.0], vec![2.0]], 1.0, true).is_err());
        assert!(ridge_regression(&[vec![1.0]], &[vec![1.0]], 0.0, true).is_err());
        assert!(ridge_regression(
            &[vec![1.0], vec![1.0, 2.0]],
            &[vec![1.0], vec![1.0]],
            1.0,
            true
        )
        .is_err());
        let model = ridge_regression(&[vec![1.0]], &[vec![1.0]], 1.0, false).unwrap();
        assert!(model.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn softmax_rows_match_closed_forms() {
        let (row, clamped) = softmax_row(&[1.0, 0.0], 3f64.ln(), PolicyDirection::Good);
        assert!((row[0] - 0.75).abs() < 1e-12 && (row[1] - 0.25).abs() < 1e-12);
        assert_eq!(clamped, 0);
        let (row, _) = softmax_row(&[1.0, 0.0], 3f64.ln(), PolicyDirection::Bad);
        assert!((row[0] - 0.25).abs() < 1e-12 && (row[1] - 0.75).abs() < 1e-12);
        let (row, _) = softmax_row(&[0.4, -0.9, 2.0], 0.0, PolicyDirection::Good);
        assert_eq!(row, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn extreme_temperatures_stay_normalized_and_positive() {
        let (row, clamped) = softmax_row(&[0.0, 1.0], 1000.0, PolicyDirection::Good);
        assert_eq!(clamped, 1);
        assert!(row[0] > 0.0 && row[0] <= f64::MIN_POSITIVE);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let table = generate_synthetic_classification(40, 4, 6, 2).unwrap();
        let m = build_reward_matrix(6, 2).unwrap();
        let model = fit_ridge(&table, &m, 1.0).unwrap();
        for eta in [0.0, 0.1, 10.0, 1000.0] {
            for direction in [PolicyDirection::Good, PolicyDirection::Bad] {
                let policy = softmax_behavior(&model, &table, eta, direction).unwrap();
                for row in policy.rows() {
                    let total: f64 = row.iter().sum();
                    assert!((total - 1.0).abs() < 1e-12);
                    assert!(row.iter().all(|&p| p > 0.0));
                }
            }
        }
        assert!(softmax_behavior(&model, &table, -1.0, PolicyDirection::Good).is_err());
        assert!(softmax_behavior(&model, &table, f64::INFINITY, PolicyDirection::Good).is_err());
    }

    #[test]
    fn eta_zero_gives_uniform_rows() {
        let table = generate_synthetic_classification(10, 3, 4, 7).unwrap();
        let m = build_reward_matrix(4, 7).unwrap();
        let model = fit_ridge(&table, &m, 1.0).unwrap();
        let policy = softmax_behavior(&model, &table, 0.0, PolicyDirection::Good).unwrap();
        for row in policy.rows() {
            assert_eq!(row, &vec![0.25; 4]);
        }
    }
}
