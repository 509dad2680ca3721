//! The stress-testing MDP: action grid, action likelihood, reward and step.

use serde::{Deserialize, Serialize};

use crate::data::{category_stats, fraud_portions, IntervalTable, MerchantCategory, Population, Transaction};
use crate::detection::{authorize, Decision, FraudScorer, Outcome, RuleSet, SystemState, MINUTES_PER_DAY};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("action {0:?} is not on the grid")]
    OffGrid(AstAction),
    #[error("cannot step a terminal state")]
    Terminal,
    #[error("action card age {action} does not match the episode's card {state}")]
    CardMismatch { action: usize, state: usize },
    #[error("invalid environment: {0}")]
    Invalid(String),
}

/// Discretized action axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActionGrid {
    /// Prior transaction counts of the card at episode start.
    pub card_ages: Vec<u64>,
    pub categories: Vec<MerchantCategory>,
    pub amounts: Vec<f64>,
    /// Minutes since the previous transaction.
    pub intervals: Vec<f64>,
}

impl Default for ActionGrid {
    fn default() -> Self {
        ActionGrid {
            card_ages: vec![10, 500],
            categories: vec![
                MerchantCategory::Entertainment,
                MerchantCategory::ShoppingOnline,
                MerchantCategory::ShoppingInPerson,
            ],
            amounts: vec![10.0, 100.0, 1000.0],
            intervals: vec![1.0, 50.0, 150.0],
        }
    }
}

impl ActionGrid {
    /// Actions available within an episode (card age fixed).
    pub fn step_actions(&self) -> usize {
        self.categories.len() * self.amounts.len() * self.intervals.len()
    }

    /// Full grid including the card-age axis.
    pub fn size(&self) -> usize {
        self.card_ages.len() * self.step_actions()
    }

    pub fn action(&self, card_age: usize, step_index: usize) -> AstAction {
        let ni = self.intervals.len();
        let na = self.amounts.len();
        AstAction {
            card_age,
            category: step_index / (na * ni),
            amount: (step_index / ni) % na,
            interval: step_index % ni,
        }
    }

    pub fn step_index(&self, a: &AstAction) -> usize {
        (a.category * self.amounts.len() + a.amount) * self.intervals.len() + a.interval
    }

    pub fn contains(&self, a: &AstAction) -> bool {
        a.card_age < self.card_ages.len()
            && a.category < self.categories.len()
            && a.amount < self.amounts.len()
            && a.interval < self.intervals.len()
    }

    /// Every action of the full grid.
    pub fn all(&self) -> impl Iterator<Item = AstAction> + '_ {
        (0..self.card_ages.len())
            .flat_map(move |c| (0..self.step_actions()).map(move |i| self.action(c, i)))
    }

    pub fn validate(&self) -> Result<(), String> {
        let nonempty = |n: usize, name: &str| {
            if n == 0 {
                Err(format!("grid.{name} must not be empty"))
            } else {
                Ok(())
            }
        };
        nonempty(self.card_ages.len(), "card_ages")?;
        nonempty(self.categories.len(), "categories")?;
        nonempty(self.amounts.len(), "amounts")?;
        nonempty(self.intervals.len(), "intervals")?;
        if self.amounts.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err("grid.amounts must be positive".into());
        }
        if self.intervals.iter().any(|i| !(*i >= 0.0 && i.is_finite())) {
            return Err("grid.intervals must be non-negative".into());
        }
        for (i, a) in self.amounts.iter().enumerate() {
            if self.amounts[..i].contains(a) {
                return Err("grid.amounts must be distinct".into());
            }
        }
        Ok(())
    }
}

/// One grid action, as indices into the [`ActionGrid`] axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AstAction {
    pub card_age: usize,
    pub category: usize,
    pub amount: usize,
    pub interval: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LikelihoodParams {
    /// Mean of the exponential prior on card transaction counts (1 / lambda).
    pub card_count_scale: f64,
    /// Which Gaussians describe amounts and intervals.
    pub population: Population,
}

impl Default for LikelihoodParams {
    fn default() -> Self {
        LikelihoodParams {
            card_count_scale: 390.0,
            population: Population::Overall,
        }
    }
}

/// `ln` of a pmf obtained by normalizing unnormalized log-densities.
fn log_normalize(log_density: &[f64]) -> Vec<f64> {
    let max = log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + log_density.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    log_density.iter().map(|l| l - lse).collect()
}

fn gaussian_log_kernel(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * z * z
}

/// Product of independent per-axis pmfs over the action grid.
///
/// Each continuous density is evaluated at its axis' grid points and
/// renormalized over that axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodModel {
    pub card_age: Vec<f64>,
    pub category: Vec<f64>,
    /// `amount[category][amount]`.
    pub amount: Vec<Vec<f64>>,
    /// `interval[category][interval]`.
    pub interval: Vec<Vec<f64>>,
}

impl LikelihoodModel {
    /// All factors are stored as log-probabilities.
    pub fn new(grid: &ActionGrid, params: &LikelihoodParams, intervals: &IntervalTable) -> Result<Self, EnvError> {
        grid.validate().map_err(EnvError::Invalid)?;
        if !(params.card_count_scale > 0.0) {
            return Err(EnvError::Invalid("card_count_scale must be positive".into()));
        }
        let card_age = log_normalize(
            &grid
                .card_ages
                .iter()
                .map(|n| -(*n as f64) / params.card_count_scale)
                .collect::<Vec<_>>(),
        );
        let portions = fraud_portions();
        let cat_mass: Vec<f64> = grid.categories.iter().map(|c| portions[c.index()]).collect();
        if cat_mass.iter().sum::<f64>() <= 0.0 {
            return Err(EnvError::Invalid("grid categories carry no fraud mass".into()));
        }
        let category = log_normalize(&cat_mass.iter().map(|p| p.ln()).collect::<Vec<_>>());
        let amount = grid
            .categories
            .iter()
            .map(|c| {
                let g = category_stats(*c).amount(params.population);
                log_normalize(&grid.amounts.iter().map(|x| gaussian_log_kernel(*x, g.mean, g.std)).collect::<Vec<_>>())
            })
            .collect();
        let interval = grid
            .categories
            .iter()
            .map(|c| {
                let g = intervals.get(*c, params.population);
                log_normalize(&grid.intervals.iter().map(|x| gaussian_log_kernel(*x, g.mean, g.std)).collect::<Vec<_>>())
            })
            .collect();
        Ok(LikelihoodModel {
            card_age,
            category,
            amount,
            interval,
        })
    }

    pub fn action_log_prob(&self, a: &AstAction) -> Result<f64, EnvError> {
        let get = |v: &[f64], i: usize| v.get(i).copied();
        let lp = (|| {
            let amount = self.amount.get(a.category)?;
            let interval = self.interval.get(a.category)?;
            Some(
                get(&self.card_age, a.card_age)?
                    + get(&self.category, a.category)?
                    + get(amount, a.amount)?
                    + get(interval, a.interval)?,
            )
        })();
        lp.ok_or(EnvError::OffGrid(*a))
    }
}

/// `daily_gamma ^ (interval / 1440)`.
pub fn discount_factor(interval_minutes: f64, daily_gamma: f64) -> f64 {
    daily_gamma.powf(interval_minutes / MINUTES_PER_DAY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvParams {
    /// Discount per day of elapsed time.
    pub daily_gamma: f64,
    /// Magnitude of the (negative) reward for being caught.
    pub caught_penalty: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams {
            daily_gamma: 0.2,
            caught_penalty: 10_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Event {
    /// The episode ended without the fraud being stopped.
    InE,
    Caught,
    Continue,
}

/// Fraudster-side view of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct AstState {
    pub card_age: usize,
    pub system: SystemState,
    /// Sum of approved amounts this episode.
    pub accumulated_fraud_value: f64,
    /// Approved actions in order.
    pub approved: Vec<AstAction>,
    pub terminal: bool,
}

impl AstState {
    pub fn daily_count(&self) -> u32 {
        self.system.daily_count
    }

    pub fn fraud_detected(&self) -> bool {
        self.system.fraud_detected
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub next_state: AstState,
    pub reward: f64,
    pub done: bool,
    pub event: Event,
    pub decision: Decision,
}

/// Issuer plus likelihood model, seen from the fraudster.
pub struct AstEnv<'a, S: ?Sized> {
    pub grid: ActionGrid,
    pub likelihood: LikelihoodModel,
    pub rules: RuleSet,
    pub params: EnvParams,
    pub scorer: &'a S,
}

impl<'a, S: FraudScorer + ?Sized> AstEnv<'a, S> {
    pub fn new(
        grid: ActionGrid,
        likelihood: LikelihoodModel,
        rules: RuleSet,
        params: EnvParams,
        scorer: &'a S,
    ) -> Result<Self, EnvError> {
        grid.validate().map_err(EnvError::Invalid)?;
        rules.validate().map_err(EnvError::Invalid)?;
        if !(params.daily_gamma > 0.0 && params.daily_gamma <= 1.0) {
            return Err(EnvError::Invalid("daily_gamma must lie in (0, 1]".into()));
        }
        if !(params.caught_penalty >= 0.0 && params.caught_penalty.is_finite()) {
            return Err(EnvError::Invalid("caught_penalty is a non-negative magnitude".into()));
        }
        let longest = grid.intervals.iter().copied().fold(0.0, f64::max);
        if f64::from(rules.daily_limit - 1) * longest >= MINUTES_PER_DAY {
            return Err(EnvError::Invalid(format!(
                "{} transactions {longest} minutes apart span more than a day",
                rules.daily_limit
            )));
        }
        Ok(AstEnv {
            grid,
            likelihood,
            rules,
            params,
            scorer,
        })
    }

    pub fn initial_state(&self, card_age: usize) -> AstState {
        AstState {
            card_age,
            system: SystemState::new(self.grid.card_ages[card_age]),
            accumulated_fraud_value: 0.0,
            approved: Vec::new(),
            terminal: false,
        }
    }

    /// The transaction an action produces in `state`.
    pub fn transaction(&self, state: &AstState, a: &AstAction) -> Transaction {
        let interval = self.grid.intervals[a.interval];
        Transaction {
            account_id: "ast-card".into(),
            timestamp: state.system.clock + interval,
            category: self.grid.categories[a.category],
            amount: self.grid.amounts[a.amount],
            interval_since_prev: interval,
            card_txn_count: state.system.cumulative_approved as f64,
            is_fraud: true,
        }
    }

    pub fn discount(&self, a: &AstAction) -> f64 {
        discount_factor(self.grid.intervals[a.interval], self.params.daily_gamma)
    }

    /// Piecewise reward: accumulated value on success, minus the penalty
    /// when caught, otherwise the action's log-likelihood.
    pub fn reward(&self, action: &AstAction, event: Event, next: &AstState) -> Result<f64, EnvError> {
        Ok(match event {
            Event::InE => next.accumulated_fraud_value,
            Event::Caught => -self.params.caught_penalty,
            Event::Continue => self.likelihood.action_log_prob(action)?,
        })
    }

    pub fn step(&self, state: &AstState, action: &AstAction) -> Result<Transition, EnvError> {
        if state.terminal {
            return Err(EnvError::Terminal);
        }
        if !self.grid.contains(action) {
            return Err(EnvError::OffGrid(*action));
        }
        if action.card_age != state.card_age {
            return Err(EnvError::CardMismatch {
                action: action.card_age,
                state: state.card_age,
            });
        }
        let txn = self.transaction(state, action);
        let (decision, system) =
            authorize(&state.system, &txn, self.scorer, &self.rules).map_err(|_| EnvError::Terminal)?;
        let mut next = AstState {
            card_age: state.card_age,
            system,
            accumulated_fraud_value: state.accumulated_fraud_value,
            approved: state.approved.clone(),
            terminal: false,
        };
        let event = if decision.outcome == Outcome::Approved {
            next.accumulated_fraud_value += txn.amount;
            next.approved.push(*action);
            if next.system.daily_count >= self.rules.daily_limit {
                Event::InE
            } else {
                Event::Continue
            }
        } else {
            Event::Caught
        };
        next.terminal = event != Event::Continue;
        let reward = self.reward(action, event, &next)?;
        Ok(Transition {
            next_state: next,
            reward,
            done: event != Event::Continue,
            event,
            decision,
        })
    }
}
