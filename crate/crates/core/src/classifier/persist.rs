//! Versioned key-value text format for trained models.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::features::{Standardization, FEATURE_NAMES, N_FEATURES};
use super::LogisticModel;
use crate::data::MerchantCategory;

const FORMAT: &str = "fraud-ast-logistic/1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelFormatError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unsupported model format `{0}` (expected {FORMAT})")]
    Version(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("key `{key}`: {reason}")]
    Value { key: String, reason: String },
}

fn weight_keys() -> Vec<String> {
    MerchantCategory::ALL
        .iter()
        .map(|c| format!("weight.{}", c.name()))
        .chain(FEATURE_NAMES.iter().map(|n| format!("weight.{n}")))
        .collect()
}

impl LogisticModel {
    /// Plain-text form; floats use the shortest round-trip representation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# logistic fraud model");
        let _ = writeln!(s, "format = {FORMAT}");
        let _ = writeln!(s, "threshold = {}", self.threshold);
        let _ = writeln!(s, "bias = {}", self.bias);
        for (k, w) in weight_keys().iter().zip(self.weights) {
            let _ = writeln!(s, "{k} = {w}");
        }
        for (i, n) in FEATURE_NAMES.iter().enumerate() {
            let _ = writeln!(s, "mean.{n} = {}", self.standardization.mean[i]);
            let _ = writeln!(s, "std.{n} = {}", self.standardization.std[i]);
        }
        s
    }
}

impl FromStr for LogisticModel {
    type Err = ModelFormatError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ModelFormatError::Syntax { line: i + 1 })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        match kv.remove("format") {
            Some(f) if f == FORMAT => {}
            Some(f) => return Err(ModelFormatError::Version(f)),
            None => return Err(ModelFormatError::Missing("format".into())),
        }
        let mut take = |key: &str| -> Result<f64, ModelFormatError> {
            let raw = kv
                .remove(key)
                .ok_or_else(|| ModelFormatError::Missing(key.to_string()))?;
            raw.parse::<f64>().map_err(|e| ModelFormatError::Value {
                key: key.to_string(),
                reason: e.to_string(),
            })
        };
        let threshold = take("threshold")?;
        let bias = take("bias")?;
        let mut weights = [0.0; N_FEATURES];
        for (w, k) in weights.iter_mut().zip(weight_keys()) {
            *w = take(&k)?;
        }
        let mut st = Standardization::default();
        for (i, n) in FEATURE_NAMES.iter().enumerate() {
            st.mean[i] = take(&format!("mean.{n}"))?;
            st.std[i] = take(&format!("std.{n}"))?;
        }
        if let Some(k) = kv.keys().next() {
            return Err(ModelFormatError::Unknown(k.clone()));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(ModelFormatError::Value {
                key: "threshold".into(),
                reason: "must lie in (0, 1)".into(),
            });
        }
        if st.std.iter().any(|s| !(*s > 0.0)) {
            return Err(ModelFormatError::Value {
                key: "std".into(),
                reason: "standard deviations must be positive".into(),
            });
        }
        Ok(LogisticModel {
            weights,
            bias,
            standardization: st,
            threshold,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            w in proptest::array::uniform17(-1e6f64..1e6),
            bias in -50.0f64..50.0,
            mean in proptest::array::uniform3(-1e4f64..1e4),
            std in proptest::array::uniform3(1e-6f64..1e4),
            threshold in 0.01f64..0.99,
        ) {
            let m = LogisticModel { weights: w, bias, standardization: Standardization { mean, std }, threshold };
            let back: LogisticModel = m.to_text().parse().unwrap();
            prop_assert_eq!(back, m);
        }
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        let m = LogisticModel {
            weights: [0.5; N_FEATURES],
            bias: 0.1,
            standardization: Standardization::default(),
            threshold: 0.5,
        };
        let text = m.to_text();
        let extra = format!("{text}colour = 3\n");
        assert_eq!(
            extra.parse::<LogisticModel>().unwrap_err(),
            ModelFormatError::Unknown("colour".into())
        );
        let missing = text.replace("bias = 0.1\n", "");
        assert_eq!(
            missing.parse::<LogisticModel>().unwrap_err(),
            ModelFormatError::Missing("bias".into())
        );
        let old = text.replace(FORMAT, "fraud-ast-logistic/0");
        assert!(matches!(old.parse::<LogisticModel>(), Err(ModelFormatError::Version(_))));
    }
}
