//! Per-epoch model selection: one policy network per device trained with
//! epsilon-greedy exploration and Bellman regression, plus random and
//! static baselines and an exhaustive oracle. Every selector emits only
//! feasible plans (one model per device, master quota respected).

mod action;
mod brute;
mod encode;
mod reward;
mod update;

pub use action::{random_selector, select_action, static_selector};
pub use brute::brute_force_selector;
pub use encode::encode_state;
pub use reward::reward;
pub use update::update;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{init_model, ModelSpec, ModelWeights};
use crate::rng::SimRng;

/// Objective weights, exploration schedule, and policy hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorConfig {
    /// Loss scale in the objective.
    pub alpha: f64,
    /// Recognition-time scale in the objective.
    pub beta: f64,
    pub t_max: f64,
    /// Exploration probability at the first episode.
    pub eps_start: f64,
    /// Exploration probability at the final episode.
    pub eps_end: f64,
    /// Discount factor of the Bellman target.
    pub discount: f64,
    pub policy_lr: f64,
    pub policy_hidden: usize,
    /// Normalizer mapping rates into [0, 1] for the state encoding.
    pub max_rate_bps: f64,
}

impl SelectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || self.beta < 0.0 || (self.alpha == 0.0 && self.beta == 0.0) {
            return Err(Error::Config("objective weights must be nonnegative and not both zero".into()));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::Config("discount must lie in [0, 1)".into()));
        }
        for (name, v) in [("eps_start", self.eps_start), ("eps_end", self.eps_end)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.t_max) {
            return Err(Error::Config("t_max must lie in [0, 1]".into()));
        }
        if self.max_rate_bps <= 0.0 {
            return Err(Error::Config("max_rate_bps must be positive".into()));
        }
        Ok(())
    }

    /// Linear exploration schedule across episodes.
    pub fn epsilon(&self, episode: usize, episodes: usize) -> f64 {
        if episodes <= 1 {
            return self.eps_end;
        }
        let t = episode as f64 / (episodes - 1) as f64;
        self.eps_start + (self.eps_end - self.eps_start) * t
    }
}

/// Flattened MDP state: normalized rate matrix then per-device one-hot
/// assignment blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFeatures(pub Vec<f64>);

impl StateFeatures {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Size of the state vector for N devices, M stations, l models.
pub fn state_dim(n: usize, m: usize, l: usize) -> usize {
    n * m + l * n
}

/// One dense policy network per device; head j scores slave model j.
#[derive(Debug, Clone)]
pub struct PolicyEnsemble {
    pub nets: Vec<ModelWeights>,
}

impl PolicyEnsemble {
    pub fn new(n: usize, input_dim: usize, hidden: usize, l: usize, rng: &mut SimRng) -> Result<Self> {
        let nets = (0..n)
            .map(|u| init_model(&ModelSpec::dense(format!("policy-{u}"), input_dim, hidden, l), rng))
            .collect::<Result<_>>()?;
        Ok(Self { nets })
    }

    pub fn num_devices(&self) -> usize {
        self.nets.len()
    }

    pub fn num_models(&self) -> usize {
        self.nets.first().map_or(0, |n| n.spec.output_dim)
    }
}

/// One experienced step of the selection MDP.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: StateFeatures,
    pub plan: crate::protocol::AssignmentPlan,
    pub reward: f64,
    pub next_state: StateFeatures,
}
