//! Experiment configuration and the canonical non-stationary setups.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agents::{MctsConfig, PamctsConfig, QLearningConfig, RatsConfig};
use crate::envs::grid::GridParams;
use crate::envs::{EnvKind, EnvModel, EnvParams};
use crate::error::{Error, Result};
use crate::notify::NotificationLevel;
use crate::nswrap::{NsEnv, TunableBinding};
use crate::schedule::Scheduler;
use crate::update::UpdateFn;

/// Intended-direction probability before a single change.
pub const SINGLE_CHANGE_START: f64 = 0.7;
pub const CANONICAL_GRID_TARGETS: [f64; 3] = [0.4, 0.6, 0.8];
pub const CANONICAL_MASSPOLE_TARGETS: [f64; 2] = [1.0, 1.5];
pub const MASSPOLE_INCREMENT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Mcts,
    Pamcts { alpha: f64 },
    Rats,
    Random,
}

impl AgentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AgentSpec::Mcts => "mcts",
            AgentSpec::Pamcts { .. } => "pamcts",
            AgentSpec::Rats => "rats",
            AgentSpec::Random => "random",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            AgentSpec::Pamcts { alpha } => Some(*alpha),
            _ => None,
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Pamcts { alpha } => write!(f, "pamcts(alpha={alpha})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChangeMode {
    /// One change at the first epoch, to `target`.
    Single { target: f64 },
    /// A change every epoch.
    Continuous,
}

impl ChangeMode {
    pub fn name(&self) -> &'static str {
        match self {
            ChangeMode::Single { .. } => "single",
            ChangeMode::Continuous => "continuous",
        }
    }

    pub fn target(&self) -> Option<f64> {
        match self {
            ChangeMode::Single { target } => Some(*target),
            ChangeMode::Continuous => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub agent: AgentSpec,
    pub change_mode: ChangeMode,
    #[serde(default = "default_notify")]
    pub notify: NotificationLevel,
    /// Defaults to 1000 for gridworlds and 100 for CartPole.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episodes: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u64>,
    #[serde(default)]
    pub master_seed: u64,
    /// Search settings for `mcts` and `pamcts`; defaults come from
    /// [`default_mcts`] and [`default_pamcts_search`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcts: Option<MctsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rats: Option<RatsConfig>,
    /// Training budget for the CartPole stale policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stale_policy: Option<QLearningConfig>,
}

fn default_notify() -> NotificationLevel {
    NotificationLevel::None
}

/// MCTS hyperparameters per environment.
pub fn default_mcts(env: EnvKind) -> MctsConfig {
    let (m, d, gamma) = match env {
        EnvKind::Bridge => (500, 100, 0.99),
        EnvKind::FrozenLake => (300, 100, 0.99),
        EnvKind::CliffWalking => (1000, 200, 0.999),
        EnvKind::CartPole => (300, 500, 0.5),
    };
    MctsConfig { m, d, c: SQRT_2, gamma }
}

/// Search settings used inside PA-MCTS per environment.
pub fn default_pamcts_search(env: EnvKind) -> MctsConfig {
    let (m, d, gamma) = match env {
        EnvKind::Bridge => (500, 200, 0.99),
        EnvKind::FrozenLake => (1000, 500, 0.99),
        EnvKind::CliffWalking => (1000, 200, 0.999),
        EnvKind::CartPole => (300, 500, 1.0),
    };
    MctsConfig { m, d, c: SQRT_2, gamma }
}

pub fn default_rats() -> RatsConfig {
    RatsConfig { d: 3, gamma: 0.99, ..Default::default() }
}

pub fn default_truncation(env: EnvKind) -> u64 {
    match env {
        EnvKind::CartPole => 2500,
        EnvKind::FrozenLake => 100,
        EnvKind::CliffWalking | EnvKind::Bridge => 200,
    }
}

pub fn default_episodes(env: EnvKind) -> u32 {
    match env {
        EnvKind::CartPole => 100,
        _ => 1000,
    }
}

/// Per-epoch shift and floor of the continuous gridworld setups.
fn continuous_shift(env: EnvKind) -> (f64, f64) {
    match env {
        EnvKind::FrozenLake => (-0.2, 0.4),
        EnvKind::CliffWalking => (-0.02, 0.8),
        _ => (-0.1, 0.4),
    }
}

impl ExperimentConfig {
    pub fn new(env: EnvKind, agent: AgentSpec, change_mode: ChangeMode) -> Self {
        ExperimentConfig {
            env,
            agent,
            change_mode,
            notify: NotificationLevel::None,
            episodes: None,
            truncation: None,
            master_seed: 0,
            mcts: None,
            rats: None,
            stale_policy: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn episodes(&self) -> u32 {
        self.episodes.unwrap_or_else(|| default_episodes(self.env))
    }

    pub fn truncation(&self) -> u64 {
        self.truncation.unwrap_or_else(|| default_truncation(self.env))
    }

    pub fn mcts_config(&self) -> MctsConfig {
        self.mcts.unwrap_or_else(|| match self.agent {
            AgentSpec::Pamcts { .. } => default_pamcts_search(self.env),
            _ => default_mcts(self.env),
        })
    }

    pub fn pamcts_config(&self) -> Option<PamctsConfig> {
        self.agent.alpha().map(|alpha| PamctsConfig { alpha, mcts: self.mcts_config() })
    }

    pub fn rats_config(&self) -> RatsConfig {
        self.rats.unwrap_or_else(default_rats)
    }

    pub fn stale_policy_config(&self) -> QLearningConfig {
        self.stale_policy.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes() < 2 {
            return Err(Error::config("an experiment needs at least 2 episodes"));
        }
        if self.truncation() < 1 {
            return Err(Error::config("truncation must be at least 1 step"));
        }
        match (self.env, self.change_mode) {
            (EnvKind::CartPole, ChangeMode::Single { target }) if !(target > 0.0) => {
                return Err(Error::config(format!("masspole target {target} must be positive")));
            }
            (env, ChangeMode::Single { target }) if env != EnvKind::CartPole && !(0.0..=1.0).contains(&target) => {
                return Err(Error::config(format!("probability target {target} outside [0, 1]")));
            }
            _ => {}
        }
        match self.agent {
            AgentSpec::Rats => {
                if self.env == EnvKind::CartPole {
                    return Err(Error::config("rats needs a gridworld with a scalar transition parameter"));
                }
                self.rats_config().validate()?;
            }
            AgentSpec::Pamcts { .. } => {
                self.pamcts_config().expect("pamcts agent").validate()?;
            }
            AgentSpec::Mcts => self.mcts_config().validate()?,
            AgentSpec::Random => {}
        }
        Ok(())
    }

    /// False for single-change targets outside the published grid.
    pub fn is_canonical(&self) -> bool {
        match self.change_mode {
            ChangeMode::Continuous => true,
            ChangeMode::Single { target } => {
                let set: &[f64] = if self.env == EnvKind::CartPole {
                    &CANONICAL_MASSPOLE_TARGETS
                } else {
                    &CANONICAL_GRID_TARGETS
                };
                set.iter().any(|t| (t - target).abs() < 1e-12)
            }
        }
    }

    /// Base model before any change.
    pub fn base_model(&self) -> Result<EnvModel> {
        let mut model = EnvModel::canonical(self.env);
        if let (Some(kind), ChangeMode::Single { .. }) = (self.env.grid(), self.change_mode) {
            if self.env != EnvKind::CliffWalking {
                let params = GridParams::with_intended(kind, SINGLE_CHANGE_START);
                model = EnvModel::new(self.env, EnvParams::Grid(params), model.map().cloned().map(Arc::new))?;
            }
        }
        Ok(model)
    }

    pub fn bindings(&self) -> Result<Vec<TunableBinding>> {
        let scheduler = match self.change_mode {
            ChangeMode::Single { .. } => Scheduler::discrete([1])?,
            ChangeMode::Continuous => Scheduler::Continuous,
        };
        let Some(kind) = self.env.grid() else {
            let update = match self.change_mode {
                ChangeMode::Single { target } => UpdateFn::SetTo { target },
                ChangeMode::Continuous => UpdateFn::Increment { k: MASSPOLE_INCREMENT },
            };
            return Ok(vec![TunableBinding::new("masspole", scheduler, update)]);
        };
        let split = kind.split_rule();
        let update = match self.change_mode {
            ChangeMode::Single { target } => UpdateFn::DistributionSet { intended_index: 0, target, split },
            ChangeMode::Continuous => {
                let (k, floor) = continuous_shift(self.env);
                UpdateFn::DistributionShift { intended_index: 0, k, floor, split }
            }
        };
        Ok(kind
            .param_names()
            .iter()
            .map(|name| TunableBinding::new(*name, scheduler.clone(), update.clone()))
            .collect())
    }
}

/// Wraps the base model of `cfg` with its canonical bindings.
pub fn build_ns_env(cfg: &ExperimentConfig) -> Result<NsEnv> {
    cfg.validate()?;
    Ok(NsEnv::new(cfg.base_model()?, cfg.bindings()?, cfg.notify)?.with_truncation(cfg.truncation()))
}
