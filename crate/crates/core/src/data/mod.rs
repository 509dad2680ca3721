//! Merchant categories, transaction records, synthetic generation and ingestion.

mod category;
pub mod ingest;
mod stats;
pub mod synth;
mod transaction;

pub use category::{MerchantCategory, ParseCategoryError};
pub use ingest::{load_dataset, CategoryAliases, ColumnMap, IngestError, IngestOptions, TimestampFormat};
pub use stats::{
    category_stats, fraud_portions, overall_portions, CategoryStats, Gaussian, IntervalTable,
    Population, PopulationGaussians,
};
pub use synth::{generate_dataset, sample_transaction, SynthError, AMOUNT_FLOOR};
pub use transaction::{Provenance, Transaction, TransactionSet};
