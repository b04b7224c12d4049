//! Small numeric utilities shared across modules.

/// Tolerance for probability vectors: rows are accepted and renormalized when
/// their sum is within this distance of 1, rejected otherwise.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// Neumaier-compensated accumulator. Long estimator sums run over up to 10^6
/// terms with magnitudes up to 1/γ, where plain summation visibly loses
/// digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum a slice with compensation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Validate a probability vector: entries finite and nonnegative, total within
/// [`PROB_TOLERANCE`] of 1. In-tolerance input passes through bit-identical
/// (no renormalizing division), which makes acceptance idempotent: a vector
/// that was accepted once — including one produced by dividing arbitrary mass
/// by its sum — is returned unchanged ever after, so values survive
/// write/read cycles exactly.
pub fn normalized_probabilities(values: &[f64], what: &str) -> crate::Result<Vec<f64>> {
    if values.is_empty() {
        return Err(crate::Error::config(format!("{what}: empty probability vector")));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(crate::Error::config(format!(
                "{what}: entry {i} is {v}, expected a finite nonnegative probability"
            )));
        }
    }
    let total = kahan_sum(values.iter().copied());
    if (total - 1.0).abs() > PROB_TOLERANCE {
        return Err(crate::Error::config(format!(
            "{what}: probabilities sum to {total}, outside tolerance {PROB_TOLERANCE} around 1"
        )));
    }
    Ok(values.to_vec())
}
