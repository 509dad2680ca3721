//! Two-stage minority oversampling: random duplication, then SMOTE interpolation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{numeric, Standardization};
use crate::data::{Transaction, TransactionSet};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SmoteError {
    #[error("target fractions must satisfy 0 < duplicate_to < synthesize_to < 1 (got {duplicate_to} and {synthesize_to})")]
    Fractions { duplicate_to: f64, synthesize_to: f64 },
    #[error("need at least {needed} minority rows for k = {k} neighbours, found {found}")]
    TooFewMinority { found: usize, needed: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoteParams {
    /// Minority fraction reached by duplication.
    pub duplicate_to: f64,
    /// Final minority fraction reached by interpolation.
    pub synthesize_to: f64,
    /// Nearest minority neighbours considered per seed.
    pub neighbors: usize,
}

impl Default for SmoteParams {
    fn default() -> Self {
        SmoteParams {
            duplicate_to: 0.10,
            synthesize_to: 1.0 / 3.0,
            neighbors: 5,
        }
    }
}

/// Where a synthesized row came from. Indices refer to the output set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub row: usize,
    pub seed: usize,
    pub neighbor: usize,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct Rebalanced {
    /// Input rows first (unchanged, same order), then duplicates, then synthetic rows.
    pub set: TransactionSet,
    /// `(row, source)` for every duplicated row.
    pub duplicated: Vec<(usize, usize)>,
    pub synthetic: Vec<SyntheticOrigin>,
}

/// Smallest `d >= 0` with `(m + d) / (n + d) >= f`.
fn rows_to_reach(m: usize, n: usize, f: f64) -> usize {
    let reaches = |d: usize| (m + d) as f64 >= f * (n + d) as f64;
    let mut d = ((f * n as f64 - m as f64) / (1.0 - f)).ceil().max(0.0) as usize;
    while d > 0 && reaches(d - 1) {
        d -= 1;
    }
    while !reaches(d) {
        d += 1;
    }
    d
}

/// `k` nearest minority rows (by standardized numeric features) for each minority row.
fn neighbours(points: &[[f64; 3]], k: usize, exec: Execution) -> Vec<Vec<usize>> {
    exec.map_range(points.len(), |i| {
        let mut d: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, p)| {
                let s: f64 = p.iter().zip(&points[i]).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, j)
            })
            .collect();
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.truncate(k);
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.into_iter().map(|(_, j)| j).collect()
    })
}

/// Rebalances `set` so fraud first makes up `duplicate_to`, then `synthesize_to`
/// of the rows. Majority rows are never touched.
///
/// Synthetic rows interpolate amount, interval and card count between a
/// minority seed and one of its `neighbors` nearest minority rows, with a
/// uniform weight in `[0, 1]`; the category is copied from the seed.
pub fn smote_rebalance<R: Rng + ?Sized>(
    rng: &mut R,
    set: &TransactionSet,
    params: &SmoteParams,
    exec: Execution,
) -> Result<Rebalanced, SmoteError> {
    let SmoteParams {
        duplicate_to,
        synthesize_to,
        neighbors: k,
    } = *params;
    if !(duplicate_to > 0.0 && duplicate_to < synthesize_to && synthesize_to < 1.0) || k == 0 {
        return Err(SmoteError::Fractions {
            duplicate_to,
            synthesize_to,
        });
    }

    let minority: Vec<usize> = (0..set.len()).filter(|&i| set.transactions[i].is_fraud).collect();
    let mut rows = set.transactions.clone();
    let mut duplicated = Vec::new();
    let mut synthetic = Vec::new();

    // Stage 1: duplication.
    let d = rows_to_reach(minority.len(), rows.len(), duplicate_to);
    if d > 0 && minority.is_empty() {
        return Err(SmoteError::TooFewMinority {
            found: 0,
            needed: k + 1,
            k,
        });
    }
    // Sources of the stage-1 minority pool, always original indices.
    let mut pool = minority.clone();
    for n in 0..d {
        let src = minority[rng.random_range(0..minority.len())];
        let mut t = rows[src].clone();
        t.account_id = format!("dup-{n:07}");
        duplicated.push((rows.len(), src));
        pool.push(src);
        rows.push(t);
    }

    // Stage 2: interpolation.
    let m = minority.len() + d;
    let n = rows.len();
    let s = rows_to_reach(m, n, synthesize_to);
    let s = {
        // Allow landing one row short when that is closer to the exact target.
        let exact = (synthesize_to * n as f64 - m as f64) / (1.0 - synthesize_to);
        if s > 0 && (exact - (s - 1) as f64).abs() < (s as f64 - exact).abs() {
            s - 1
        } else {
            s
        }
    };
    if s > 0 {
        if minority.len() < k + 1 {
            return Err(SmoteError::TooFewMinority {
                found: minority.len(),
                needed: k + 1,
                k,
            });
        }
        let st = Standardization::fit(set);
        let points: Vec<[f64; 3]> = minority
            .iter()
            .map(|&i| st.apply(numeric(&set.transactions[i])))
            .collect();
        let knn = neighbours(&points, k, exec);
        // Position of each original row in `minority`.
        let pos = |row: usize| minority.binary_search(&row).expect("minority row");

        for c in 0..s {
            let seed = pool[rng.random_range(0..pool.len())];
            let neighbor = minority[knn[pos(seed)][rng.random_range(0..k)]];
            let t: f64 = rng.random();
            let a = &set.transactions[seed];
            let b = &set.transactions[neighbor];
            let lerp = |x: f64, y: f64| x + t * (y - x);
            synthetic.push(SyntheticOrigin {
                row: rows.len(),
                seed,
                neighbor,
                t,
            });
            rows.push(Transaction {
                account_id: format!("smote-{c:07}"),
                timestamp: a.timestamp,
                category: a.category,
                amount: lerp(a.amount, b.amount),
                interval_since_prev: lerp(a.interval_since_prev, b.interval_since_prev),
                card_txn_count: lerp(a.card_txn_count, b.card_txn_count),
                is_fraud: true,
            });
        }
    }

    Ok(Rebalanced {
        set: TransactionSet::new(rows, set.provenance),
        duplicated,
        synthetic,
    })
}
