//! Delimiter-separated transaction ingestion with a configurable column map.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::transaction::EXPORT_HEADER;
use super::{MerchantCategory, Provenance, Transaction, TransactionSet};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Csv(#[from] csv::Error),
    #[error("mapped column `{column}` not found in header")]
    MissingColumn { column: String },
    #[error("row {row}: unmappable category value `{value}` (add it to the alias table)")]
    UnknownCategory { value: String, row: usize },
    #[error("row {row}: bad {field} value `{value}`: {reason}")]
    BadField {
        row: usize,
        field: &'static str,
        value: String,
        reason: String,
    },
}

/// Header names of the logical fields in the input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMap {
    pub timestamp: String,
    pub account: String,
    pub category: String,
    pub amount: String,
    pub label: String,
}

impl ColumnMap {
    /// Column map matching [`TransactionSet::write_delimited`].
    pub fn export() -> Self {
        ColumnMap {
            account: EXPORT_HEADER[0].into(),
            timestamp: EXPORT_HEADER[1].into(),
            category: EXPORT_HEADER[2].into(),
            amount: EXPORT_HEADER[3].into(),
            label: EXPORT_HEADER[6].into(),
        }
    }
}

/// How the timestamp column is encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TimestampFormat {
    Minutes,
    Seconds,
    /// A `chrono` strftime pattern, e.g. `%Y-%m-%d %H:%M:%S`.
    Pattern(String),
}

impl fmt::Display for TimestampFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimestampFormat::Minutes => f.write_str("minutes"),
            TimestampFormat::Seconds => f.write_str("seconds"),
            TimestampFormat::Pattern(p) => f.write_str(p),
        }
    }
}

impl FromStr for TimestampFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minutes" => Ok(TimestampFormat::Minutes),
            "seconds" => Ok(TimestampFormat::Seconds),
            p if p.contains('%') => Ok(TimestampFormat::Pattern(p.to_string())),
            other => Err(format!(
                "expected `minutes`, `seconds` or a strftime pattern, got `{other}`"
            )),
        }
    }
}

impl TryFrom<String> for TimestampFormat {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TimestampFormat> for String {
    fn from(t: TimestampFormat) -> Self {
        t.to_string()
    }
}

impl TimestampFormat {
    /// Parses a raw field into minutes since epoch.
    fn minutes(&self, raw: &str) -> Result<f64, String> {
        match self {
            TimestampFormat::Minutes => raw.parse::<f64>().map_err(|e| e.to_string()),
            TimestampFormat::Seconds => raw
                .parse::<f64>()
                .map(|s| s / 60.0)
                .map_err(|e| e.to_string()),
            TimestampFormat::Pattern(p) => NaiveDateTime::parse_from_str(raw, p)
                .map(|t| t.and_utc().timestamp() as f64 / 60.0)
                .map_err(|e| e.to_string()),
        }
    }
}

/// Raw category spellings mapped onto the fourteen categories.
///
/// Lookups are case-insensitive and ignore surrounding whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryAliases(BTreeMap<String, MerchantCategory>);

const DATASET_SPELLINGS: [(&str, MerchantCategory); 14] = [
    ("entertainment", MerchantCategory::Entertainment),
    ("food_dining", MerchantCategory::FoodDining),
    ("gas_transport", MerchantCategory::GasTransport),
    ("grocery_net", MerchantCategory::GroceryOnline),
    ("grocery_pos", MerchantCategory::GroceryInPerson),
    ("health_fitness", MerchantCategory::HealthFitness),
    ("home", MerchantCategory::Home),
    ("kids_pets", MerchantCategory::KidsPets),
    ("misc_net", MerchantCategory::MiscOnline),
    ("misc_pos", MerchantCategory::MiscInPerson),
    ("personal_care", MerchantCategory::PersonalCare),
    ("shopping_net", MerchantCategory::ShoppingOnline),
    ("shopping_pos", MerchantCategory::ShoppingInPerson),
    ("travel", MerchantCategory::Travel),
];

impl Default for CategoryAliases {
    fn default() -> Self {
        let mut map = BTreeMap::new();
        for c in MerchantCategory::ALL {
            map.insert(c.name().to_string(), c);
            map.insert(c.label().to_lowercase(), c);
        }
        for (raw, c) in DATASET_SPELLINGS {
            map.insert(raw.to_string(), c);
        }
        CategoryAliases(map)
    }
}

impl CategoryAliases {
    fn key(raw: &str) -> String {
        raw.trim().to_lowercase()
    }

    pub fn insert(&mut self, raw: &str, category: MerchantCategory) {
        self.0.insert(Self::key(raw), category);
    }

    pub fn lookup(&self, raw: &str) -> Option<MerchantCategory> {
        self.0.get(&Self::key(raw)).copied()
    }

    /// Defaults extended (and overridden) by `extra`.
    pub fn with_extra(extra: &BTreeMap<String, MerchantCategory>) -> Self {
        let mut a = Self::default();
        for (k, v) in extra {
            a.insert(k, *v);
        }
        a
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub columns: ColumnMap,
    pub delimiter: u8,
    pub timestamp: TimestampFormat,
    pub aliases: CategoryAliases,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            columns: ColumnMap::export(),
            delimiter: b',',
            timestamp: TimestampFormat::Minutes,
            aliases: CategoryAliases::default(),
        }
    }
}

/// Loads a transaction file.
pub fn load_dataset(path: &Path, opts: &IngestOptions) -> Result<TransactionSet, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(std::io::BufReader::new(file), opts)
}

struct RawRow {
    timestamp: f64,
    account: String,
    category: MerchantCategory,
    amount: f64,
    is_fraud: bool,
}

fn parse_label(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "fraud" => Some(true),
        "0" | "false" | "no" | "legit" => Some(false),
        _ => None,
    }
}

/// Reads transactions from any reader; rows are numbered from 1 after the header.
///
/// The result is sorted by timestamp (stable on ties). Intervals and card
/// counts are computed per account in that order, with the first
/// transaction of each account getting interval 0 and count 0.
pub fn read_dataset<R: Read>(reader: R, opts: &IngestOptions) -> Result<TransactionSet, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn {
                column: name.to_string(),
            })
    };
    let c = &opts.columns;
    let (i_ts, i_acct, i_cat, i_amt, i_lbl) = (
        col(&c.timestamp)?,
        col(&c.account)?,
        col(&c.category)?,
        col(&c.amount)?,
        col(&c.label)?,
    );

    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let row = n + 1;
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |field: &'static str, value: &str, reason: String| IngestError::BadField {
            row,
            field,
            value: value.to_string(),
            reason,
        };

        let ts_raw = field(i_ts);
        let timestamp = opts
            .timestamp
            .minutes(ts_raw)
            .map_err(|e| bad("timestamp", ts_raw, e))?;
        let cat_raw = field(i_cat);
        let category = opts
            .aliases
            .lookup(cat_raw)
            .ok_or_else(|| IngestError::UnknownCategory {
                value: cat_raw.to_string(),
                row,
            })?;
        let amt_raw = field(i_amt);
        let amount: f64 = amt_raw
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad("amount", amt_raw, e.to_string()))?;
        if !(amount.is_finite() && amount > 0.0) {
            return Err(bad("amount", amt_raw, "must be positive".into()));
        }
        let lbl_raw = field(i_lbl);
        let is_fraud =
            parse_label(lbl_raw).ok_or_else(|| bad("label", lbl_raw, "expected 0/1".into()))?;
        rows.push(RawRow {
            timestamp,
            account: field(i_acct).to_string(),
            category,
            amount,
            is_fraud,
        });
    }

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|a, b| rows[*a].timestamp.total_cmp(&rows[*b].timestamp));

    let mut last_seen: HashMap<&str, (f64, u64)> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for i in order {
        let r = &rows[i];
        let (interval, count) = match last_seen.get(r.account.as_str()) {
            Some(&(prev, n)) => (r.timestamp - prev, n),
            None => (0.0, 0),
        };
        last_seen.insert(r.account.as_str(), (r.timestamp, count + 1));
        out.push(Transaction {
            account_id: r.account.clone(),
            timestamp: r.timestamp,
            category: r.category,
            amount: r.amount,
            interval_since_prev: interval,
            card_txn_count: count as f64,
            is_fraud: r.is_fraud,
        });
    }
    Ok(TransactionSet::new(out, Provenance::Ingested))
}
