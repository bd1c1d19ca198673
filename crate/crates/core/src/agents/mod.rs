//! Decision agents that plan on stationary environment snapshots.

pub mod pamcts;
pub mod rats;
pub mod stale;
pub mod uct;

use std::sync::Arc;

use rand::Rng;

use crate::envs::{EnvModel, EnvState};
use crate::error::{Error, Result};
use crate::nswrap::EnvSnapshot;
use crate::seed::Stream;

pub use pamcts::{pamcts_decide, PamctsConfig};
pub use rats::{rats_decide, rats_search, RatsConfig, RatsLeaf, RobustModel};
pub use stale::{fit_stale_policy_discretized, solve_stale_policy_tabular, QLearningConfig, StalePolicy};
pub use uct::{ucb_score, uct_search, MctsConfig, SearchResult};

/// A simulator that can be stepped from any state.
pub trait GenerativeModel {
    type State: Clone + PartialEq;

    fn num_actions(&self) -> usize;
    fn is_terminal(&self, s: &Self::State) -> bool;
    fn step<R: Rng + ?Sized>(&self, s: &Self::State, a: usize, rng: &mut R) -> Result<(Self::State, f64, bool)>;
}

impl GenerativeModel for EnvModel {
    type State = EnvState;

    fn num_actions(&self) -> usize {
        EnvModel::num_actions(self)
    }

    fn is_terminal(&self, s: &EnvState) -> bool {
        EnvModel::is_terminal(self, s)
    }

    fn step<R: Rng + ?Sized>(&self, s: &EnvState, a: usize, rng: &mut R) -> Result<(EnvState, f64, bool)> {
        EnvModel::step(self, s, a, rng)
    }
}

impl GenerativeModel for EnvSnapshot {
    type State = EnvState;

    fn num_actions(&self) -> usize {
        EnvModel::num_actions(self)
    }

    fn is_terminal(&self, s: &EnvState) -> bool {
        EnvModel::is_terminal(self, s)
    }

    fn step<R: Rng + ?Sized>(&self, s: &EnvState, a: usize, rng: &mut R) -> Result<(EnvState, f64, bool)> {
        EnvModel::step(self, s, a, rng)
    }
}

/// Uniform random action.
pub fn random_action<R: Rng + ?Sized>(num_actions: usize, rng: &mut R) -> usize {
    rng.gen_range(0..num_actions.max(1))
}

/// Something that picks an action given the planning snapshot it was handed.
pub trait Agent: Send {
    fn act(&mut self, model: &EnvSnapshot, state: &EnvState, rng: &mut Stream) -> Result<usize>;
}

pub struct RandomAgent;

impl Agent for RandomAgent {
    fn act(&mut self, model: &EnvSnapshot, _state: &EnvState, rng: &mut Stream) -> Result<usize> {
        Ok(random_action(model.num_actions(), rng))
    }
}

pub struct MctsAgent {
    pub cfg: MctsConfig,
}

impl Agent for MctsAgent {
    fn act(&mut self, model: &EnvSnapshot, state: &EnvState, rng: &mut Stream) -> Result<usize> {
        Ok(uct_search(model, state, &self.cfg, rng)?.action)
    }
}

pub struct PamctsAgent {
    pub cfg: PamctsConfig,
    pub policy: Arc<StalePolicy>,
}

impl Agent for PamctsAgent {
    fn act(&mut self, model: &EnvSnapshot, state: &EnvState, rng: &mut Stream) -> Result<usize> {
        let search = uct_search(model, state, &self.cfg.mcts, rng)?;
        pamcts_decide(&search.q, self.policy.q_values(state)?, self.cfg.alpha)
    }
}

/// RATS agent; caches snapshot values between decisions while the snapshot
/// parameters stay the same.
pub struct RatsAgent {
    pub cfg: RatsConfig,
    cache: Option<(EnvModel, Vec<f64>)>,
}

impl RatsAgent {
    pub fn new(cfg: RatsConfig) -> Self {
        RatsAgent { cfg, cache: None }
    }

    fn leaf_values(&mut self, model: &EnvModel) -> Result<&[f64]> {
        let stale = !matches!(&self.cache, Some((m, _)) if m == model);
        if stale {
            let v = stale::value_iteration(model, self.cfg.gamma, 1e-6)?;
            self.cache = Some((model.clone(), v));
        }
        Ok(&self.cache.as_ref().expect("filled above").1)
    }
}

impl Agent for RatsAgent {
    fn act(&mut self, model: &EnvSnapshot, state: &EnvState, _rng: &mut Stream) -> Result<usize> {
        let s = state
            .cell()
            .ok_or_else(|| Error::Unsupported("risk-averse search needs a gridworld".into()))?;
        let cfg = self.cfg;
        let decision = match cfg.leaf {
            RatsLeaf::Zero => rats_search(&**model, s, &cfg, |_| 0.0)?,
            RatsLeaf::SnapshotValue => {
                let values = self.leaf_values(model)?;
                rats_search(&**model, s, &cfg, |c| values[c])?
            }
        };
        Ok(decision.action)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvKind;
    use crate::seed;

    #[test]
    fn random_agent_single_action_and_determinism() {
        let mut rng = seed::stream(1);
        assert!((0..100).all(|_| random_action(1, &mut rng) == 0));
        let a: Vec<usize> = (0..50).map(|_| random_action(4, &mut seed::stream(9))).collect();
        let b: Vec<usize> = (0..50).map(|_| random_action(4, &mut seed::stream(9))).collect();
        assert_eq!(a, b);
        let mut r1 = seed::stream(4);
        let mut r2 = seed::stream(4);
        let s1: Vec<usize> = (0..50).map(|_| random_action(4, &mut r1)).collect();
        let s2: Vec<usize> = (0..50).map(|_| random_action(4, &mut r2)).collect();
        assert_eq!(s1, s2);
    }

    #[test]
    fn random_agent_is_uniform() {
        // chi-square with 3 degrees of freedom; 16.27 is the 0.999 quantile
        let mut rng = seed::stream(17);
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[random_action(4, &mut rng)] += 1;
        }
        let e = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|c| (*c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 16.27, "{counts:?}");
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        assert!(counts.iter().all(|c| (*c as f64 - e).abs() < 3.0 * sd));
    }

    #[test]
    fn rats_agent_rejects_cartpole() {
        let snap = EnvSnapshot::new(EnvModel::canonical(EnvKind::CartPole));
        let mut agent = RatsAgent::new(RatsConfig::default());
        let s = EnvState::CartPole(Default::default());
        assert!(matches!(agent.act(&snap, &s, &mut seed::stream(0)), Err(Error::Unsupported(_))));
    }
}
