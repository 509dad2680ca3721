use serde::{Deserialize, Serialize};

use crate::data::{MerchantCategory, Transaction, TransactionSet};

/// One-hot category block followed by three standardized numeric features.
pub const N_FEATURES: usize = MerchantCategory::COUNT + 3;

/// Numeric feature names in vector order (after the one-hot block).
pub const FEATURE_NAMES: [&str; 3] = ["amount", "interval", "card_txn_count"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-feature mean and standard deviation of the numeric features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Default for Standardization {
    fn default() -> Self {
        Standardization {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }
}

pub(crate) fn numeric(t: &Transaction) -> [f64; 3] {
    [t.amount, t.interval_since_prev, t.card_txn_count]
}

impl Standardization {
    /// Population mean/std over the set. A constant feature gets std 1.
    pub fn fit(set: &TransactionSet) -> Self {
        let n = set.len().max(1) as f64;
        let mut mean = [0.0; 3];
        for t in set {
            for (m, x) in mean.iter_mut().zip(numeric(t)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; 3];
        for t in set {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(numeric(t)) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.map(|v| {
            let s = (v / n).sqrt();
            if s.is_finite() && s > 0.0 {
                s
            } else {
                1.0
            }
        });
        Standardization { mean, std }
    }

    pub fn apply(&self, raw: [f64; 3]) -> [f64; 3] {
        [
            (raw[0] - self.mean[0]) / self.std[0],
            (raw[1] - self.mean[1]) / self.std[1],
            (raw[2] - self.mean[2]) / self.std[2],
        ]
    }
}

pub fn extract_features(txn: &Transaction, standardization: &Standardization) -> FeatureVector {
    let mut x = [0.0; N_FEATURES];
    x[txn.category.index()] = 1.0;
    let z = standardization.apply(numeric(txn));
    x[MerchantCategory::COUNT..].copy_from_slice(&z);
    FeatureVector(x)
}
