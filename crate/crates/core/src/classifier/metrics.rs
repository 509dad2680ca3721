use serde::{Deserialize, Serialize};

use super::LogisticModel;
use crate::data::TransactionSet;
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("cannot evaluate on an empty set")]
    Empty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: u64,
    pub true_negative: u64,
    pub false_positive: u64,
    pub false_negative: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.true_positive + self.true_negative + self.false_positive + self.false_negative
    }

    fn record(&mut self, label: bool, predicted: bool) {
        match (label, predicted) {
            (true, true) => self.true_positive += 1,
            (false, false) => self.true_negative += 1,
            (false, true) => self.false_positive += 1,
            (true, false) => self.false_negative += 1,
        }
    }
}

/// Confusion-derived rates. The first three fractions are of all transactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Legitimate transactions declined (false positives).
    pub decline_rate: f64,
    /// Fraud approved (false negatives).
    pub uncaught_fraud_rate: f64,
    /// False negatives over all fraud; `None` when the set has no fraud.
    pub uncaught_fraction_of_fraud: Option<f64>,
    pub confusion: Confusion,
}

impl Metrics {
    fn from_confusion(c: Confusion) -> Self {
        let n = c.total() as f64;
        let fraud = c.true_positive + c.false_negative;
        Metrics {
            accuracy: (c.true_positive + c.true_negative) as f64 / n,
            decline_rate: c.false_positive as f64 / n,
            uncaught_fraud_rate: c.false_negative as f64 / n,
            uncaught_fraction_of_fraud: (fraud > 0).then(|| c.false_negative as f64 / fraud as f64),
            confusion: c,
        }
    }
}

/// Metrics for arbitrary `(label, predicted)` pairs.
pub fn metrics_from_predictions<I>(pairs: I) -> Result<Metrics, EvalError>
where
    I: IntoIterator<Item = (bool, bool)>,
{
    let mut c = Confusion::default();
    for (label, predicted) in pairs {
        c.record(label, predicted);
    }
    if c.total() == 0 {
        return Err(EvalError::Empty);
    }
    Ok(Metrics::from_confusion(c))
}

/// Scores every row at the model threshold.
pub fn evaluate(model: &LogisticModel, set: &TransactionSet, exec: Execution) -> Result<Metrics, EvalError> {
    let predicted = exec.map(&set.transactions, |t| model.is_fraud(t));
    metrics_from_predictions(set.iter().map(|t| t.is_fraud).zip(predicted))
}
