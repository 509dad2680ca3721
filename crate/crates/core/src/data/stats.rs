use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MerchantCategory;

/// Overall vs fraud amount statistics for one merchant category.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryStats {
    pub overall_portion: f64,
    pub overall_mean: f64,
    pub overall_std: f64,
    pub fraud_portion: f64,
    pub fraud_mean: f64,
    pub fraud_std: f64,
}

impl CategoryStats {
    pub fn amount(&self, population: Population) -> Gaussian {
        match population {
            Population::Overall => Gaussian::new(self.overall_mean, self.overall_std),
            Population::Fraud => Gaussian::new(self.fraud_mean, self.fraud_std),
        }
    }

    pub fn portion(&self, population: Population) -> f64 {
        match population {
            Population::Overall => self.overall_portion,
            Population::Fraud => self.fraud_portion,
        }
    }
}

const fn row(op: f64, om: f64, os: f64, fp: f64, fm: f64, fs: f64) -> CategoryStats {
    CategoryStats {
        overall_portion: op,
        overall_mean: om,
        overall_std: os,
        fraud_portion: fp,
        fraud_mean: fm,
        fraud_std: fs,
    }
}

// Portions are rounded to whole percent, so neither column sums to exactly 1.
const TABLE: [CategoryStats; MerchantCategory::COUNT] = [
    row(0.07, 64.0, 64.0, 0.03, 510.0, 74.0),
    row(0.07, 51.0, 48.0, 0.03, 122.0, 14.0),
    row(0.10, 64.0, 16.0, 0.07, 12.0, 5.0),
    row(0.03, 54.0, 23.0, 0.02, 12.0, 3.0),
    row(0.09, 116.0, 52.0, 0.23, 313.0, 27.0),
    row(0.07, 54.0, 48.0, 0.02, 20.0, 2.0),
    row(0.09, 58.0, 48.0, 0.03, 258.0, 47.0),
    row(0.09, 58.0, 49.0, 0.03, 20.0, 3.0),
    row(0.05, 79.0, 164.0, 0.13, 804.0, 87.0),
    row(0.06, 62.0, 134.0, 0.03, 193.0, 316.0),
    row(0.07, 48.0, 49.0, 0.03, 26.0, 12.0),
    row(0.08, 83.0, 237.0, 0.24, 994.0, 95.0),
    row(0.09, 77.0, 232.0, 0.10, 887.0, 131.0),
    row(0.03, 112.0, 596.0, 0.00, 9.0, 2.0),
];

/// Published per-category amount statistics.
pub fn category_stats(category: MerchantCategory) -> CategoryStats {
    TABLE[category.index()]
}

fn normalized(population: Population) -> [f64; MerchantCategory::COUNT] {
    let total: f64 = TABLE.iter().map(|s| s.portion(population)).sum();
    let mut out = [0.0; MerchantCategory::COUNT];
    for (o, s) in out.iter_mut().zip(TABLE.iter()) {
        *o = s.portion(population) / total;
    }
    out
}

/// Fraud portions renormalized to a probability vector.
pub fn fraud_portions() -> [f64; MerchantCategory::COUNT] {
    normalized(Population::Fraud)
}

/// Overall portions renormalized to a probability vector.
pub fn overall_portions() -> [f64; MerchantCategory::COUNT] {
    normalized(Population::Overall)
}

/// Which half of the statistics table a draw comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Population {
    Overall,
    Fraud,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian {
    pub const fn new(mean: f64, std: f64) -> Self {
        Gaussian { mean, std }
    }

    /// Unnormalized density `exp(-z^2 / 2)`.
    pub fn kernel(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        (-0.5 * z * z).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationGaussians {
    pub overall: Gaussian,
    pub fraud: Gaussian,
}

impl PopulationGaussians {
    pub fn get(&self, population: Population) -> Gaussian {
        match population {
            Population::Overall => self.overall,
            Population::Fraud => self.fraud,
        }
    }
}

/// Interval-since-previous-transaction Gaussians, in minutes.
///
/// The amount statistics come with the table above; interval statistics are
/// configuration. Every category uses `default` unless overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntervalTable {
    pub default: PopulationGaussians,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_category: BTreeMap<MerchantCategory, PopulationGaussians>,
}

impl Default for IntervalTable {
    fn default() -> Self {
        IntervalTable {
            default: PopulationGaussians {
                overall: Gaussian::new(240.0, 120.0),
                fraud: Gaussian::new(30.0, 20.0),
            },
            per_category: BTreeMap::new(),
        }
    }
}

impl IntervalTable {
    pub fn get(&self, category: MerchantCategory, population: Population) -> Gaussian {
        self.per_category
            .get(&category)
            .unwrap_or(&self.default)
            .get(population)
    }
}
