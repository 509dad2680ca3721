//! Adaptive stress testing of a payment-card fraud detection system.
//!
//! The pipeline has four stages, each in its own module:
//!
//! - [`data`]: merchant-category statistics, transaction records, a seeded
//!   synthetic generator and delimiter-separated ingestion.
//! - [`classifier`]: feature extraction, two-stage SMOTE rebalancing and a
//!   logistic-regression fraud model with confusion metrics.
//! - [`detection`]: the card issuer, combining the classifier with business
//!   rules (suspension on detection, daily limit, repetition monitoring).
//! - [`env`] and [`qlearn`]: the stress-testing MDP and tabular Q-learning
//!   that searches for the most likely successful fraud path.
//!
//! [`experiment`] wires them together behind a TOML configuration.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the `parallel`
//! feature disabled every call falls back to a sequential loop producing
//! bit-identical results.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::large_enum_variant)]

pub mod classifier;
pub mod data;
pub mod detection;
pub mod env;
pub mod exec;
pub mod experiment;
pub mod qlearn;

pub use classifier::{LogisticModel, Metrics};
pub use data::{MerchantCategory, Transaction, TransactionSet};
pub use exec::Execution;
