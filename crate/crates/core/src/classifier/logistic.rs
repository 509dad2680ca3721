//! Logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::features::{extract_features, FeatureVector, Standardization, N_FEATURES};
use crate::data::{Transaction, TransactionSet};
use crate::exec::Execution;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training set is empty")]
    Empty,
    #[error("training set contains a single class (fraud rows: {fraud} of {total})")]
    SingleClass { fraud: usize, total: usize },
    #[error("invalid training parameter: {0}")]
    Param(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

/// Affine parameters of the logit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub weights: [f64; N_FEATURES],
    pub bias: f64,
}

impl Params {
    pub fn zeros() -> Self {
        Params {
            weights: [0.0; N_FEATURES],
            bias: 0.0,
        }
    }

    pub fn logit(&self, x: &FeatureVector) -> f64 {
        self.weights
            .iter()
            .zip(x.0.iter())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Encoded training rows.
#[derive(Debug, Clone)]
pub struct Design {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<f64>,
}

impl Design {
    pub fn new(set: &TransactionSet, standardization: &Standardization, exec: Execution) -> Self {
        let rows = exec.map(&set.transactions, |t| extract_features(t, standardization));
        let labels = set.iter().map(|t| f64::from(u8::from(t.is_fraud))).collect();
        Design { rows, labels }
    }
}

/// Mean logistic loss plus `l2 / 2 * |w|^2` (bias unpenalized) and its gradient.
pub fn loss_and_gradient(params: &Params, design: &Design, l2: f64, exec: Execution) -> (f64, Params) {
    let n = design.rows.len() as f64;
    let idx: Vec<usize> = (0..design.rows.len()).collect();
    let partials = exec.map_chunks(&idx, CHUNK, |_, chunk| {
        let mut loss = 0.0;
        let mut g = Params::zeros();
        for &i in chunk {
            let x = &design.rows[i];
            let y = design.labels[i];
            let z = params.logit(x);
            loss += softplus(z) - y * z;
            let r = sigmoid(z) - y;
            for (gw, xv) in g.weights.iter_mut().zip(x.0.iter()) {
                *gw += r * xv;
            }
            g.bias += r;
        }
        (loss, g)
    });

    let mut loss = 0.0;
    let mut grad = Params::zeros();
    for (l, g) in partials {
        loss += l;
        for (a, b) in grad.weights.iter_mut().zip(g.weights) {
            *a += b;
        }
        grad.bias += g.bias;
    }
    loss /= n;
    grad.bias /= n;
    let mut penalty = 0.0;
    for (gw, w) in grad.weights.iter_mut().zip(params.weights) {
        *gw = *gw / n + l2 * w;
        penalty += w * w;
    }
    (loss + 0.5 * l2 * penalty, grad)
}

/// Trained fraud classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: [f64; N_FEATURES],
    pub bias: f64,
    pub standardization: Standardization,
    pub threshold: f64,
}

impl LogisticModel {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;

    pub fn params(&self) -> Params {
        Params {
            weights: self.weights,
            bias: self.bias,
        }
    }

    pub fn predict_proba(&self, features: &FeatureVector) -> f64 {
        sigmoid(self.params().logit(features))
    }

    pub fn score(&self, txn: &Transaction) -> f64 {
        self.predict_proba(&extract_features(txn, &self.standardization))
    }

    pub fn is_fraud(&self, txn: &Transaction) -> bool {
        self.score(txn) >= self.threshold
    }
}

/// Loss after every epoch (index 0 is the initial loss).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub losses: Vec<f64>,
}

/// Fits standardization on `set`, then runs full-batch gradient descent from zero.
pub fn train(
    set: &TransactionSet,
    params: &TrainParams,
    exec: Execution,
) -> Result<(LogisticModel, TrainTrace), TrainError> {
    if set.is_empty() {
        return Err(TrainError::Empty);
    }
    let fraud = set.fraud_count();
    if fraud == 0 || fraud == set.len() {
        return Err(TrainError::SingleClass {
            fraud,
            total: set.len(),
        });
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(TrainError::Param("learning_rate must be positive"));
    }
    if !(params.l2 >= 0.0 && params.l2.is_finite()) {
        return Err(TrainError::Param("l2 must be non-negative"));
    }

    let standardization = Standardization::fit(set);
    let design = Design::new(set, &standardization, exec);
    let mut p = Params::zeros();
    let mut trace = TrainTrace::default();
    for _ in 0..params.epochs {
        let (loss, g) = loss_and_gradient(&p, &design, params.l2, exec);
        trace.losses.push(loss);
        for (w, gw) in p.weights.iter_mut().zip(g.weights) {
            *w -= params.learning_rate * gw;
        }
        p.bias -= params.learning_rate * g.bias;
    }
    trace
        .losses
        .push(loss_and_gradient(&p, &design, params.l2, exec).0);

    Ok((
        LogisticModel {
            weights: p.weights,
            bias: p.bias,
            standardization,
            threshold: LogisticModel::DEFAULT_THRESHOLD,
        },
        trace,
    ))
}
