//! Fraud classifier: features, SMOTE rebalancing, logistic regression, metrics.

mod features;
mod logistic;
mod metrics;
mod persist;
pub mod smote;

pub use features::{extract_features, FeatureVector, Standardization, FEATURE_NAMES, N_FEATURES};
pub use logistic::{
    loss_and_gradient, sigmoid, train, Design, LogisticModel, Params, TrainError, TrainParams,
    TrainTrace,
};
pub use metrics::{evaluate, metrics_from_predictions, Confusion, EvalError, Metrics};
pub use persist::ModelFormatError;
pub use smote::{smote_rebalance, Rebalanced, SmoteError, SmoteParams, SyntheticOrigin};
