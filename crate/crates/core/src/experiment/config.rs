use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{SmoteParams, TrainParams};
use crate::data::{ColumnMap, IntervalTable, MerchantCategory, TimestampFormat};
use crate::detection::RuleSet;
use crate::env::{ActionGrid, EnvParams, LikelihoodParams};
use crate::qlearn::{Objective, StateFeatures, StepSize, TrainConfig};

const DEFAULTS: &str = include_str!("../../../../configs/defaults.toml");
const EXPERIMENT1: &str = include_str!("../../../../configs/experiment1.toml");
const EXPERIMENT2: &str = include_str!("../../../../configs/experiment2.toml");

/// Names accepted in place of a config path.
pub const SHIPPED_CONFIGS: [(&str, &str); 3] = [
    ("defaults", DEFAULTS),
    ("experiment1", EXPERIMENT1),
    ("experiment2", EXPERIMENT2),
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    /// Seeded draws from the category statistics.
    Synthetic {
        train_accounts: usize,
        test_accounts: usize,
        txns_per_account: usize,
        fraud_rate: f64,
    },
    /// Delimiter-separated files with separate train and test splits.
    Ingest {
        train_path: PathBuf,
        test_path: PathBuf,
        columns: ColumnMap,
        #[serde(default = "default_delimiter")]
        delimiter: String,
        timestamp: TimestampFormat,
        /// Extra raw-category spellings.
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        aliases: BTreeMap<String, MerchantCategory>,
    },
}

fn default_delimiter() -> String {
    ",".into()
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic {
            train_accounts: 100,
            test_accounts: 50,
            txns_per_account: 1000,
            fraud_rate: 0.004,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub threshold: f64,
    /// Rebalancing of the training split; absent means train on it as is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smote: Option<SmoteParams>,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let t = TrainParams::default();
        ClassifierSection {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            l2: t.l2,
            threshold: 0.5,
            smote: Some(SmoteParams::default()),
        }
    }
}

impl ClassifierSection {
    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AstSection {
    pub episodes: u64,
    pub step_size: StepSize,
    pub epsilon: f64,
    pub objective: Objective,
    pub checkpoint_stride: u64,
    pub max_steps: usize,
    pub init: f64,
    pub state: StateFeatures,
}

impl Default for AstSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        AstSection {
            episodes: t.episodes,
            step_size: t.step_size,
            epsilon: t.epsilon,
            objective: t.objective,
            checkpoint_stride: t.checkpoint_stride,
            max_steps: t.max_steps,
            // Above every achievable return on the default grid (10 x $1000).
            init: 10_000.0,
            state: StateFeatures::default(),
        }
    }
}

impl AstSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            episodes: self.episodes,
            step_size: self.step_size,
            epsilon: self.epsilon,
            objective: self.objective,
            seed,
            checkpoint_stride: self.checkpoint_stride,
            max_steps: self.max_steps,
            init: self.init,
        }
    }
}

/// Everything a run needs; the seed drives every random draw.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub data: DataSource,
    pub classifier: ClassifierSection,
    pub rules: RuleSet,
    pub likelihood: LikelihoodParams,
    pub intervals: IntervalTable,
    pub grid: ActionGrid,
    pub env: EnvParams,
    pub ast: AstSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a config file, or a shipped config when `spec` names one and no
    /// such file exists.
    pub fn load(spec: &str) -> Result<Self, ConfigError> {
        let path = Path::new(spec);
        if !path.exists() {
            let name = spec.strip_suffix(".toml").unwrap_or(spec);
            if let Some((_, text)) = SHIPPED_CONFIGS.iter().find(|(n, _)| *n == name) {
                return Self::from_toml(text);
            }
        }
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.data {
            DataSource::Synthetic {
                train_accounts,
                test_accounts,
                txns_per_account,
                fraud_rate,
            } => {
                if *train_accounts == 0 {
                    return Err(invalid("data.train_accounts", "must be positive"));
                }
                if *test_accounts == 0 {
                    return Err(invalid("data.test_accounts", "must be positive"));
                }
                if *txns_per_account == 0 {
                    return Err(invalid("data.txns_per_account", "must be positive"));
                }
                if !(*fraud_rate > 0.0 && *fraud_rate < 1.0) {
                    return Err(invalid("data.fraud_rate", "must lie in (0, 1)"));
                }
            }
            DataSource::Ingest { delimiter, .. } => {
                if delimiter.len() != 1 {
                    return Err(invalid("data.delimiter", "must be a single ASCII character"));
                }
            }
        }
        let c = &self.classifier;
        if !(c.learning_rate > 0.0 && c.learning_rate.is_finite()) {
            return Err(invalid("classifier.learning_rate", "must be positive"));
        }
        if !(c.l2 >= 0.0 && c.l2.is_finite()) {
            return Err(invalid("classifier.l2", "must be non-negative"));
        }
        if !(c.threshold > 0.0 && c.threshold < 1.0) {
            return Err(invalid("classifier.threshold", "must lie in (0, 1)"));
        }
        if let Some(s) = &c.smote {
            if !(s.duplicate_to > 0.0 && s.duplicate_to <= s.synthesize_to && s.synthesize_to < 1.0) {
                return Err(invalid(
                    "classifier.smote",
                    "need 0 < duplicate_to <= synthesize_to < 1",
                ));
            }
            if s.neighbors == 0 {
                return Err(invalid("classifier.smote.neighbors", "must be positive"));
            }
        }
        self.rules.validate().map_err(|r| invalid("rules", r))?;
        if !(self.likelihood.card_count_scale > 0.0) {
            return Err(invalid("likelihood.card_count_scale", "must be positive"));
        }
        let gaussians = std::iter::once(("intervals.default", &self.intervals.default))
            .chain(self.intervals.per_category.values().map(|g| ("intervals.per_category", g)));
        for (field, g) in gaussians {
            for x in [g.overall, g.fraud] {
                if !(x.std > 0.0 && x.mean.is_finite()) {
                    return Err(invalid(field, "standard deviations must be positive"));
                }
            }
        }
        self.grid.validate().map_err(|r| invalid("grid", r))?;
        let longest = self.grid.intervals.iter().copied().fold(0.0, f64::max);
        if f64::from(self.rules.daily_limit - 1) * longest >= crate::detection::MINUTES_PER_DAY {
            return Err(invalid(
                "grid.intervals",
                "a full day of transactions at the longest interval must fit in 1440 minutes",
            ));
        }
        if !(self.env.daily_gamma > 0.0 && self.env.daily_gamma <= 1.0) {
            return Err(invalid("env.daily_gamma", "must lie in (0, 1]"));
        }
        if !(self.env.caught_penalty >= 0.0 && self.env.caught_penalty.is_finite()) {
            return Err(invalid("env.caught_penalty", "is a non-negative magnitude"));
        }
        let a = &self.ast;
        if let StepSize::Constant(x) = a.step_size {
            if !(x > 0.0 && x <= 1.0) {
                return Err(invalid("ast.step_size", "must lie in (0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&a.epsilon) {
            return Err(invalid("ast.epsilon", "must lie in [0, 1]"));
        }
        if a.checkpoint_stride == 0 {
            return Err(invalid("ast.checkpoint_stride", "must be positive"));
        }
        if a.max_steps == 0 {
            return Err(invalid("ast.max_steps", "must be positive"));
        }
        if !a.init.is_finite() {
            return Err(invalid("ast.init", "must be finite"));
        }
        Ok(())
    }
}
