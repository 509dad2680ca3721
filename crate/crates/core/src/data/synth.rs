//! Seeded synthetic transaction generator calibrated to the category table.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    category_stats, fraud_portions, overall_portions, Gaussian, IntervalTable, MerchantCategory,
    Population, Provenance, Transaction, TransactionSet,
};
use crate::exec::Execution;

/// Smallest amount a sampled transaction may carry, in USD.
pub const AMOUNT_FLOOR: f64 = 1.0;

const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("fraud_rate must lie in [0, 1), got {0}")]
    FraudRate(f64),
    #[error("{0} must be positive")]
    EmptyCount(&'static str),
}

/// Draws from `g` until the value is at least `floor`, clamping after
/// [`MAX_RESAMPLES`] rejections.
fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, g: Gaussian, floor: f64) -> f64 {
    let normal = Normal::new(g.mean, g.std).expect("finite positive std");
    for _ in 0..MAX_RESAMPLES {
        let x = normal.sample(rng);
        if x >= floor {
            return x;
        }
    }
    floor
}

fn pick_category<R: Rng + ?Sized>(rng: &mut R, pmf: &[f64; MerchantCategory::COUNT]) -> MerchantCategory {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = MerchantCategory::Entertainment;
    for (c, p) in MerchantCategory::ALL.iter().zip(pmf) {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        last = *c;
        if u < acc {
            return *c;
        }
    }
    last
}

/// Samples a single transaction of `category` from the given population.
///
/// Only `category`, `amount`, `interval_since_prev` and `is_fraud` are
/// meaningful; the generator fills in account, time and card count.
pub fn sample_transaction<R: Rng + ?Sized>(
    rng: &mut R,
    category: MerchantCategory,
    population: Population,
    intervals: &IntervalTable,
) -> Transaction {
    let amount = truncated_normal(rng, category_stats(category).amount(population), AMOUNT_FLOOR);
    let interval = truncated_normal(rng, intervals.get(category, population), 0.0);
    Transaction {
        account_id: String::new(),
        timestamp: 0.0,
        category,
        amount,
        interval_since_prev: interval,
        card_txn_count: 0.0,
        is_fraud: population == Population::Fraud,
    }
}

/// Generates `n_accounts` accounts of `txns_per_account` time-ordered
/// transactions each.
///
/// Each transaction is fraud with probability `fraud_rate`; its category is
/// then drawn from the matching portion column and amount and interval from
/// the matching population. Accounts draw from independent streams seeded
/// from `rng`, so the output does not depend on `exec`.
pub fn generate_dataset<R: RngCore + ?Sized>(
    rng: &mut R,
    n_accounts: usize,
    txns_per_account: usize,
    fraud_rate: f64,
    intervals: &IntervalTable,
    exec: Execution,
) -> Result<TransactionSet, SynthError> {
    if !(0.0..1.0).contains(&fraud_rate) {
        return Err(SynthError::FraudRate(fraud_rate));
    }
    if n_accounts == 0 {
        return Err(SynthError::EmptyCount("n_accounts"));
    }
    if txns_per_account == 0 {
        return Err(SynthError::EmptyCount("txns_per_account"));
    }
    let base_seed = rng.next_u64();
    let fraud_pmf = fraud_portions();
    let overall_pmf = overall_portions();

    let accounts = exec.map_range(n_accounts, |a| {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(a as u64);
        let account_id = format!("acct-{a:06}");
        let mut clock = 0.0;
        let mut out = Vec::with_capacity(txns_per_account);
        for j in 0..txns_per_account {
            let fraud = rng.random::<f64>() < fraud_rate;
            let (population, pmf) = if fraud {
                (Population::Fraud, &fraud_pmf)
            } else {
                (Population::Overall, &overall_pmf)
            };
            let category = pick_category(&mut rng, pmf);
            let mut t = sample_transaction(&mut rng, category, population, intervals);
            clock += t.interval_since_prev;
            t.account_id = account_id.clone();
            t.timestamp = clock;
            t.card_txn_count = j as f64;
            out.push(t);
        }
        out
    });

    Ok(TransactionSet::new(
        accounts.into_iter().flatten().collect(),
        Provenance::Synthetic,
    ))
}
