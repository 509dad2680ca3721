use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Mdp, Objective, QTable, Step};
use crate::data::MerchantCategory;
use crate::detection::{FraudScorer, Outcome};
use crate::env::{AstEnv, AstState, EnvError, Event};

/// Optional state components beyond card age, daily count and fraud flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateFeatures {
    /// Include the value accumulated so far (in cents).
    pub accumulated_value: bool,
    /// When the repetition rule is on, include the last approved amount and
    /// how many trailing approvals repeat it.
    pub repetition: bool,
}

impl Default for StateFeatures {
    fn default() -> Self {
        StateFeatures {
            accumulated_value: true,
            repetition: true,
        }
    }
}

/// Q-table row key for the stress-testing MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QState {
    pub card_age: usize,
    pub daily_count: u32,
    pub fraud_detected: bool,
    pub value_cents: Option<u64>,
    /// `(last approved amount index, trailing run length)`.
    pub repetition: Option<(Option<usize>, usize)>,
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl fmt::Display for QState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "card={} daily={} fraud={} value={}",
            self.card_age,
            self.daily_count,
            u8::from(self.fraud_detected),
            opt(self.value_cents)
        )?;
        match self.repetition {
            None => write!(f, " last=- run=-"),
            Some((last, run)) => write!(f, " last={} run={run}", opt(last)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed state label {0:?}")]
pub struct ParseQStateError(String);

impl FromStr for QState {
    type Err = ParseQStateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseQStateError(s.to_string());
        let fields: Vec<&str> = s.split_whitespace().collect();
        let names = ["card", "daily", "fraud", "value", "last", "run"];
        if fields.len() != names.len() {
            return Err(err());
        }
        let mut vals = Vec::with_capacity(names.len());
        for (field, name) in fields.iter().zip(names) {
            let (k, v) = field.split_once('=').ok_or_else(err)?;
            if k != name {
                return Err(err());
            }
            vals.push(v);
        }
        fn num<T: FromStr>(v: &str) -> Option<Option<T>> {
            if v == "-" {
                Some(None)
            } else {
                v.parse().ok().map(Some)
            }
        }
        let card_age = vals[0].parse().map_err(|_| err())?;
        let daily_count = vals[1].parse().map_err(|_| err())?;
        let fraud_detected = match vals[2] {
            "0" => false,
            "1" => true,
            _ => return Err(err()),
        };
        let value_cents = num(vals[3]).ok_or_else(err)?;
        let last: Option<usize> = num(vals[4]).ok_or_else(err)?;
        let run: Option<usize> = num(vals[5]).ok_or_else(err)?;
        let repetition = match (vals[4], run) {
            ("-", None) => None,
            (_, Some(r)) => Some((last, r)),
            _ => return Err(err()),
        };
        Ok(QState {
            card_age,
            daily_count,
            fraud_detected,
            value_cents,
            repetition,
        })
    }
}

/// Learner-facing wrapper: per-step actions exclude the card-age axis,
/// which is drawn uniformly at reset.
pub struct AstMdp<'e, 'a, S: ?Sized> {
    pub env: &'e AstEnv<'a, S>,
    pub features: StateFeatures,
}

impl<'e, 'a, S: FraudScorer + ?Sized> AstMdp<'e, 'a, S> {
    pub fn new(env: &'e AstEnv<'a, S>, features: StateFeatures) -> Self {
        AstMdp { env, features }
    }

    pub fn state_key(&self, s: &AstState) -> QState {
        let rules = &self.env.rules;
        let repetition = (self.features.repetition && rules.repetition_rule_enabled).then(|| {
            let amounts = &self.env.grid.amounts;
            match s.approved.last() {
                None => (None, 0),
                Some(last) => {
                    let v = amounts[last.amount];
                    let run = s
                        .approved
                        .iter()
                        .rev()
                        .take_while(|a| (amounts[a.amount] - v).abs() <= rules.repetition_tolerance)
                        .count();
                    (Some(last.amount), run.min(rules.repetition_window - 1))
                }
            }
        });
        QState {
            card_age: s.card_age,
            daily_count: s.daily_count(),
            fraud_detected: s.fraud_detected(),
            value_cents: self
                .features
                .accumulated_value
                .then(|| (s.accumulated_fraud_value * 100.0).round() as u64),
            repetition,
        }
    }
}

impl<S: FraudScorer + ?Sized> Mdp for AstMdp<'_, '_, S> {
    type State = AstState;
    type Key = QState;
    type Error = EnvError;

    fn n_actions(&self) -> usize {
        self.env.grid.step_actions()
    }

    fn key(&self, state: &AstState) -> QState {
        self.state_key(state)
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> AstState {
        self.env.initial_state(rng.random_range(0..self.env.grid.card_ages.len()))
    }

    fn step<R: Rng + ?Sized>(&self, state: &AstState, action: usize, _: &mut R) -> Result<Step<AstState>, EnvError> {
        let a = self.env.grid.action(state.card_age, action);
        let tr = self.env.step(state, &a)?;
        Ok(Step {
            next: tr.next_state,
            reward: tr.reward,
            terminal: tr.done,
            discount: self.env.discount(&a),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    /// 1-based.
    pub step: usize,
    pub category: MerchantCategory,
    pub amount: f64,
    pub interval: f64,
    pub outcome: Outcome,
    pub classifier_probability: f64,
    pub reward: f64,
}

/// Greedy rollout from a fresh episode on one card.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FraudPath {
    /// Prior transactions on the card.
    pub card_age: u64,
    pub steps: Vec<PathStep>,
    pub event: Event,
    /// Undiscounted sum of step rewards.
    pub total_reward: f64,
    /// Sum of approved amounts.
    pub fraud_value: f64,
}

impl FraudPath {
    pub fn amounts(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.amount).collect()
    }
}

/// Follows the greedy policy of `q` until the episode terminates.
pub fn extract_path<S: FraudScorer + ?Sized>(
    q: &QTable<QState>,
    mdp: &AstMdp<'_, '_, S>,
    card_age: usize,
    objective: Objective,
) -> Result<FraudPath, EnvError> {
    let env = mdp.env;
    let mut state = env.initial_state(card_age);
    let mut steps = Vec::new();
    let mut total_reward = 0.0;
    loop {
        let (idx, _) = q.best(&mdp.state_key(&state), objective);
        let a = env.grid.action(card_age, idx);
        let tr = env.step(&state, &a)?;
        total_reward += tr.reward;
        steps.push(PathStep {
            step: steps.len() + 1,
            category: env.grid.categories[a.category],
            amount: env.grid.amounts[a.amount],
            interval: env.grid.intervals[a.interval],
            outcome: tr.decision.outcome,
            classifier_probability: tr.decision.classifier_probability,
            reward: tr.reward,
        });
        if tr.done {
            return Ok(FraudPath {
                card_age: env.grid.card_ages[card_age],
                steps,
                event: tr.event,
                total_reward,
                fraud_value: tr.next_state.accumulated_fraud_value,
            });
        }
        state = tr.next_state;
    }
}
