//! The card issuer: classifier decision plus business rules over per-card state.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::classifier::LogisticModel;
use crate::data::Transaction;

pub const MINUTES_PER_DAY: f64 = 1440.0;

/// Anything that scores a transaction as fraud probability.
pub trait FraudScorer {
    fn score(&self, txn: &Transaction) -> f64;
    fn threshold(&self) -> f64;
}

impl FraudScorer for LogisticModel {
    fn score(&self, txn: &Transaction) -> f64 {
        LogisticModel::score(self, txn)
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Scorer returning the same probability for every transaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantScorer(pub f64);

impl ConstantScorer {
    pub const NEVER: ConstantScorer = ConstantScorer(0.0);
    pub const ALWAYS: ConstantScorer = ConstantScorer(1.0);
}

impl FraudScorer for ConstantScorer {
    fn score(&self, _: &Transaction) -> f64 {
        self.0
    }

    fn threshold(&self) -> f64 {
        0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuleSet {
    pub daily_limit: u32,
    pub repetition_rule_enabled: bool,
    /// Number of consecutive similar amounts that triggers suspension.
    pub repetition_window: usize,
    /// USD; amounts within this distance of each other count as similar.
    pub repetition_tolerance: f64,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            daily_limit: 10,
            repetition_rule_enabled: false,
            repetition_window: 5,
            repetition_tolerance: 0.0,
        }
    }
}

impl RuleSet {
    pub fn validate(&self) -> Result<(), String> {
        if self.daily_limit < 1 {
            return Err("daily_limit must be at least 1".into());
        }
        if self.repetition_window < 2 {
            return Err("repetition_window must be at least 2".into());
        }
        if !(self.repetition_tolerance >= 0.0 && self.repetition_tolerance.is_finite()) {
            return Err("repetition_tolerance must be a non-negative number".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Approved,
    SuspendedFraud,
    SuspendedDailyLimit,
    SuspendedRepetition,
}

impl Outcome {
    pub fn is_suspension(self) -> bool {
        self != Outcome::Approved
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub outcome: Outcome,
    pub classifier_probability: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuthorizeError {
    #[error("card is suspended; the episode is over")]
    Suspended,
}

/// Per-card issuer state within one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub cumulative_approved: u64,
    pub daily_count: u32,
    pub fraud_detected: bool,
    pub suspended: bool,
    /// Minutes since the first transaction of the episode.
    pub clock: f64,
    /// Authorization attempts so far in the episode.
    pub attempts: u32,
    /// Most recent approved amounts, oldest first.
    pub recent_amounts: VecDeque<f64>,
}

impl SystemState {
    /// A fresh episode on a card with `prior_transactions` approved already.
    pub fn new(prior_transactions: u64) -> Self {
        SystemState {
            cumulative_approved: prior_transactions,
            daily_count: 0,
            fraud_detected: false,
            suspended: false,
            clock: 0.0,
            attempts: 0,
            recent_amounts: VecDeque::new(),
        }
    }

    fn day(clock: f64) -> i64 {
        (clock / MINUTES_PER_DAY).floor() as i64
    }
}

fn repeats(recent: &VecDeque<f64>, amount: f64, rules: &RuleSet) -> bool {
    let prior = rules.repetition_window - 1;
    if recent.len() < prior {
        return false;
    }
    let (mut lo, mut hi) = (amount, amount);
    for &a in recent.iter().rev().take(prior) {
        lo = lo.min(a);
        hi = hi.max(a);
    }
    hi - lo <= rules.repetition_tolerance
}

/// Decides one authorization request and returns the successor state.
///
/// The first transaction of an episode happens at clock 0; each later one
/// advances the clock by its `interval_since_prev`, and crossing a 1440-minute
/// boundary resets the daily counter. Checks run in order: classifier,
/// repetition rule, daily limit. Any suspension is terminal.
pub fn authorize<S: FraudScorer + ?Sized>(
    state: &SystemState,
    txn: &Transaction,
    scorer: &S,
    rules: &RuleSet,
) -> Result<(Decision, SystemState), AuthorizeError> {
    if state.suspended {
        return Err(AuthorizeError::Suspended);
    }
    let mut next = state.clone();
    if state.attempts > 0 {
        next.clock = state.clock + txn.interval_since_prev;
        if SystemState::day(next.clock) > SystemState::day(state.clock) {
            next.daily_count = 0;
        }
    }
    next.attempts += 1;

    let p = scorer.score(txn);
    let outcome = if p >= scorer.threshold() {
        next.fraud_detected = true;
        Outcome::SuspendedFraud
    } else if rules.repetition_rule_enabled && repeats(&state.recent_amounts, txn.amount, rules) {
        Outcome::SuspendedRepetition
    } else if next.daily_count + 1 > rules.daily_limit {
        Outcome::SuspendedDailyLimit
    } else {
        Outcome::Approved
    };

    if outcome.is_suspension() {
        next.suspended = true;
    } else {
        next.cumulative_approved += 1;
        next.daily_count += 1;
        next.recent_amounts.push_back(txn.amount);
        while next.recent_amounts.len() > rules.repetition_window {
            next.recent_amounts.pop_front();
        }
    }
    Ok((
        Decision {
            outcome,
            classifier_probability: p,
        },
        next,
    ))
}
