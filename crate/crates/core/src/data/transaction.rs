use std::io::Write;

use serde::{Deserialize, Serialize};

use super::MerchantCategory;

/// One payment event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub account_id: String,
    /// Minutes since epoch.
    pub timestamp: f64,
    pub category: MerchantCategory,
    /// USD.
    pub amount: f64,
    /// Minutes since the previous transaction on the same account.
    pub interval_since_prev: f64,
    /// Prior transactions on the card. Integral except on SMOTE-synthesized rows.
    pub card_txn_count: f64,
    pub is_fraud: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Synthetic,
    Ingested,
}

/// Ordered transactions; transactions of one account appear in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransactionSet {
    pub transactions: Vec<Transaction>,
    pub provenance: Provenance,
}

/// Column names used when exporting a set.
pub(crate) const EXPORT_HEADER: [&str; 7] = [
    "account",
    "timestamp",
    "category",
    "amount",
    "interval",
    "card_txn_count",
    "is_fraud",
];

impl TransactionSet {
    pub fn new(transactions: Vec<Transaction>, provenance: Provenance) -> Self {
        TransactionSet {
            transactions,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn fraud_count(&self) -> usize {
        self.transactions.iter().filter(|t| t.is_fraud).count()
    }

    /// Fraction of rows labelled fraud; 0 for an empty set.
    pub fn prevalence(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.fraud_count() as f64 / self.len() as f64
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transaction> {
        self.transactions.iter()
    }

    /// Writes the set as delimiter-separated text with a header row. The
    /// output re-ingests with [`super::ColumnMap::export`].
    pub fn write_delimited<W: Write>(&self, out: W, delimiter: u8) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        w.write_record(EXPORT_HEADER)?;
        for t in &self.transactions {
            w.write_record([
                t.account_id.clone(),
                t.timestamp.to_string(),
                t.category.name().to_string(),
                t.amount.to_string(),
                t.interval_since_prev.to_string(),
                t.card_txn_count.to_string(),
                u8::from(t.is_fraud).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl<'a> IntoIterator for &'a TransactionSet {
    type Item = &'a Transaction;
    type IntoIter = std::slice::Iter<'a, Transaction>;

    fn into_iter(self) -> Self::IntoIter {
        self.transactions.iter()
    }
}
