//! Tabular Q-learning, convergence tracking and greedy path extraction.

mod ast;
mod table;

use std::collections::BTreeMap;
use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ast::{extract_path, AstMdp, FraudPath, PathStep, QState, StateFeatures};
pub use table::{QTable, QTableError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QLearnError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("environment error: {0}")]
    Env(String),
}

/// Whether bootstrapping and greedy selection maximize or minimize Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSize {
    Constant(f64),
    /// `1 / n(s, a)` where `n` counts updates of the pair.
    InverseVisit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub episodes: u64,
    pub step_size: StepSize,
    /// Probability of a uniform random action.
    pub epsilon: f64,
    pub objective: Objective,
    pub seed: u64,
    /// Episodes between convergence checkpoints.
    pub checkpoint_stride: u64,
    /// Episodes are cut off after this many steps.
    pub max_steps: usize,
    /// Initial value of every entry.
    pub init: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 200_000,
            step_size: StepSize::Constant(1.0),
            epsilon: 0.3,
            objective: Objective::Max,
            seed: 0,
            checkpoint_stride: 1_000,
            max_steps: 1_000,
            init: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), QLearnError> {
        let bad = |m: &str| Err(QLearnError::Config(m.to_string()));
        if let StepSize::Constant(a) = self.step_size {
            if !(a > 0.0 && a <= 1.0) {
                return bad("step_size must lie in (0, 1]");
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if self.checkpoint_stride == 0 {
            return bad("checkpoint_stride must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        if !self.init.is_finite() {
            return bad("init must be finite");
        }
        Ok(())
    }
}

/// Result of one environment step, as seen by the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<S> {
    pub next: S,
    pub reward: f64,
    pub terminal: bool,
    /// Discount applied to the bootstrap from `next`.
    pub discount: f64,
}

/// An episodic decision process with a finite action set.
pub trait Mdp {
    type State: Clone;
    /// Row key of the Q-table; several states may share one.
    type Key: Ord + Clone;
    type Error: Display;

    fn n_actions(&self) -> usize;
    fn key(&self, state: &Self::State) -> Self::Key;
    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;
    fn step<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: usize,
        rng: &mut R,
    ) -> Result<Step<Self::State>, Self::Error>;
}

/// Epsilon-greedy choice; greedy ties go to the lowest action index.
pub fn select_action<K: Ord + Clone, R: Rng + ?Sized>(
    q: &QTable<K>,
    key: &K,
    epsilon: f64,
    objective: Objective,
    rng: &mut R,
) -> usize {
    if epsilon > 0.0 && (epsilon >= 1.0 || rng.random::<f64>() < epsilon) {
        rng.random_range(0..q.n_actions())
    } else {
        q.best(key, objective).0
    }
}

/// One temporal-difference update. `next = None` marks a terminal successor.
#[allow(clippy::too_many_arguments)]
pub fn q_update<K: Ord + Clone>(
    q: &mut QTable<K>,
    key: &K,
    action: usize,
    reward: f64,
    next: Option<&K>,
    alpha: f64,
    gamma: f64,
    objective: Objective,
) {
    let bootstrap = next.map_or(0.0, |n| q.best(n, objective).1);
    let target = reward + gamma * bootstrap;
    let entry = &mut q.row_mut(key)[action];
    *entry += alpha * (target - *entry);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub episode: u64,
    pub delta: f64,
}

/// Frobenius norm of the Q change between consecutive checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub stride: u64,
    pub points: Vec<ConvergencePoint>,
}

impl ConvergenceSeries {
    pub fn peak(&self) -> f64 {
        self.points.iter().map(|p| p.delta).fold(0.0, f64::max)
    }

    /// Mean over the last `fraction` of checkpoints (at least one).
    pub fn tail_mean(&self, fraction: f64) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        let n = ((self.points.len() as f64 * fraction).ceil() as usize).clamp(1, self.points.len());
        let tail = &self.points[self.points.len() - n..];
        Some(tail.iter().map(|p| p.delta).sum::<f64>() / n as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,frobenius_delta\n");
        for p in &self.points {
            out.push_str(&format!("{},{:?}\n", p.episode, p.delta));
        }
        out
    }
}

/// Runs `cfg.episodes` epsilon-greedy episodes from a fresh table.
pub fn train<M: Mdp>(mdp: &M, cfg: &TrainConfig) -> Result<(QTable<M::Key>, ConvergenceSeries), QLearnError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut q = QTable::new(mdp.n_actions(), cfg.init);
    let mut visits: BTreeMap<M::Key, Vec<u64>> = BTreeMap::new();
    let mut series = ConvergenceSeries {
        stride: cfg.checkpoint_stride,
        points: Vec::new(),
    };
    let mut snapshot = q.clone();
    for episode in 1..=cfg.episodes {
        let mut state = mdp.reset(&mut rng);
        for _ in 0..cfg.max_steps {
            let key = mdp.key(&state);
            let action = select_action(&q, &key, cfg.epsilon, cfg.objective, &mut rng);
            let step = mdp
                .step(&state, action, &mut rng)
                .map_err(|e| QLearnError::Env(e.to_string()))?;
            let alpha = match cfg.step_size {
                StepSize::Constant(a) => a,
                StepSize::InverseVisit => {
                    let n = visits.entry(key.clone()).or_insert_with(|| vec![0; mdp.n_actions()]);
                    n[action] += 1;
                    1.0 / n[action] as f64
                }
            };
            let next_key = (!step.terminal).then(|| mdp.key(&step.next));
            q_update(&mut q, &key, action, step.reward, next_key.as_ref(), alpha, step.discount, cfg.objective);
            if step.terminal {
                break;
            }
            state = step.next;
        }
        if episode % cfg.checkpoint_stride == 0 {
            let delta = q.frobenius_delta(&snapshot).expect("same action count");
            series.points.push(ConvergencePoint { episode, delta });
            snapshot = q.clone();
        }
    }
    Ok((q, series))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two states; action 0 stays (reward 1), action 1 ends (reward 5).
    struct Chain;

    impl Mdp for Chain {
        type State = u8;
        type Key = u8;
        type Error = std::convert::Infallible;

        fn n_actions(&self) -> usize {
            2
        }
        fn key(&self, s: &u8) -> u8 {
            *s
        }
        fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
            rng.random_range(0..2)
        }
        fn step<R: Rng + ?Sized>(&self, s: &u8, a: usize, _: &mut R) -> Result<Step<u8>, Self::Error> {
            Ok(match a {
                0 => Step {
                    next: 1 - *s,
                    reward: 1.0,
                    terminal: false,
                    discount: 0.5,
                },
                _ => Step {
                    next: *s,
                    reward: if *s == 0 { 5.0 } else { 0.0 },
                    terminal: true,
                    discount: 0.5,
                },
            })
        }
    }

    #[test]
    fn terminal_update_with_unit_step_is_exact() {
        let mut q = QTable::<u8>::new(2, 3.0);
        q_update(&mut q, &0, 1, -7.5, None, 1.0, 0.9, Objective::Max);
        assert_eq!(q.get(&0, 1), -7.5);
    }

    #[test]
    fn update_arithmetic() {
        let mut q = QTable::<u8>::new(2, 0.0);
        q.row_mut(&0)[0] = 4.0;
        q_update(&mut q, &0, 0, 0.0, Some(&1), 0.5, 0.0, Objective::Max);
        assert_eq!(q.get(&0, 0), 2.0);
    }

    #[test]
    fn zero_episodes_leave_table_untouched() {
        let cfg = TrainConfig {
            episodes: 0,
            ..TrainConfig::default()
        };
        let (q, s) = train(&Chain, &cfg).unwrap();
        assert!(q.is_empty());
        assert!(s.points.is_empty());
    }

    #[test]
    fn chain_converges_to_fixed_point() {
        // V(0) = max(1 + V(1)/2, 5), V(1) = max(1 + V(0)/2, 0): V(0) = 5, V(1) = 3.5.
        let cfg = TrainConfig {
            episodes: 10_000,
            epsilon: 1.0,
            ..TrainConfig::default()
        };
        let (q, _) = train(&Chain, &cfg).unwrap();
        assert!((q.get(&0, 1) - 5.0).abs() < 1e-6);
        assert!((q.get(&0, 0) - 2.75).abs() < 1e-6);
        assert!((q.get(&1, 0) - 3.5).abs() < 1e-6);
        assert!((q.get(&1, 1) - 0.0).abs() < 1e-6);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig {
            episodes: 3_000,
            step_size: StepSize::InverseVisit,
            ..TrainConfig::default()
        };
        let (a, sa) = train(&Chain, &cfg).unwrap();
        let (b, sb) = train(&Chain, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(sa.points.len(), 3);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = TrainConfig {
            step_size: StepSize::Constant(1.5),
            ..TrainConfig::default()
        };
        assert!(matches!(train(&Chain, &cfg), Err(QLearnError::Config(_))));
        let cfg = TrainConfig {
            epsilon: -0.1,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn greedy_choice_with_zero_epsilon() {
        let mut q = QTable::<u8>::new(4, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(select_action(&q, &0, 0.0, Objective::Max, &mut rng), 0);
        q.row_mut(&0)[2] = 1.0;
        for _ in 0..100 {
            assert_eq!(select_action(&q, &0, 0.0, Objective::Max, &mut rng), 2);
        }
        assert_eq!(select_action(&q, &0, 0.0, Objective::Min, &mut rng), 0);
    }

    #[test]
    fn series_summaries() {
        let s = ConvergenceSeries {
            stride: 10,
            points: (1..=10)
                .map(|i| ConvergencePoint {
                    episode: i * 10,
                    delta: 11.0 - i as f64,
                })
                .collect(),
        };
        assert_eq!(s.peak(), 10.0);
        assert_eq!(s.tail_mean(0.1), Some(1.0));
        assert!(s.to_csv().starts_with("episode,frobenius_delta\n10,10.0\n"));
    }
}
