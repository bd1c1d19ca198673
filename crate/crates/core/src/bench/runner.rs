//! Seeded episode execution and aggregation.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{build_ns_env, AgentSpec, ExperimentConfig};
use crate::agents::stale::{fit_stale_policy_discretized, solve_stale_policy_tabular};
use crate::agents::{Agent, MctsAgent, PamctsAgent, RandomAgent, RatsAgent, StalePolicy};
use crate::envs::EnvKind;
use crate::error::{Error, Result};
use crate::seed;

/// Tolerance for the value iteration behind gridworld stale policies.
pub const STALE_VI_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode: u64,
    pub seed: u64,
    /// Cumulative undiscounted reward.
    pub reward: f64,
    pub steps: u64,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub n: usize,
    pub wall: Duration,
}

impl RunStats {
    pub fn from_rewards(rewards: &[f64], wall: Duration) -> Result<Self> {
        let n = rewards.len();
        if n < 2 {
            return Err(Error::contract("standard error needs at least 2 samples"));
        }
        let mean = rewards.iter().sum::<f64>() / n as f64;
        let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok(RunStats {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
            wall,
        })
    }
}

/// Seed of episode `index` under `master_seed`.
pub fn episode_seed(master_seed: u64, index: u64) -> u64 {
    seed::derive(master_seed, index)
}

/// A validated experiment with its stale policy (if any) already fitted.
pub struct Experiment {
    cfg: ExperimentConfig,
    policy: Option<Arc<StalePolicy>>,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let policy = match cfg.agent {
            AgentSpec::Pamcts { .. } => Some(Arc::new(fit_policy(&cfg)?)),
            _ => None,
        };
        Ok(Experiment { cfg, policy })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn stale_policy(&self) -> Option<&StalePolicy> {
        self.policy.as_deref()
    }

    fn agent(&self) -> Box<dyn Agent> {
        match self.cfg.agent {
            AgentSpec::Mcts => Box::new(MctsAgent { cfg: self.cfg.mcts_config() }),
            AgentSpec::Pamcts { .. } => Box::new(PamctsAgent {
                cfg: self.cfg.pamcts_config().expect("pamcts agent"),
                policy: self.policy.clone().expect("fitted in new"),
            }),
            AgentSpec::Rats => Box::new(RatsAgent::new(self.cfg.rats_config())),
            AgentSpec::Random => Box::new(RandomAgent),
        }
    }

    /// Runs episode `index`; the result depends only on the config and `index`.
    pub fn run_episode(&self, index: u64) -> Result<EpisodeResult> {
        let seed = episode_seed(self.cfg.master_seed, index);
        let mut env = build_ns_env(&self.cfg)?;
        env.reset(seed);
        let mut rng = seed::stream(seed::derive_str(seed, "agent"));
        let mut agent = self.agent();
        let mut reward = 0.0;
        let mut steps = 0;
        let mut truncated = false;
        while !env.is_finished() {
            let snapshot = env.get_planning_env();
            let action = agent.act(&snapshot, env.state(), &mut rng)?;
            let out = env.step(action)?;
            reward += out.reward.reward;
            steps += 1;
            truncated = out.truncated;
        }
        Ok(EpisodeResult {
            episode: index,
            seed,
            reward,
            steps,
            truncated,
        })
    }

    /// Runs every episode on `workers` threads. Results come back in episode
    /// order whatever the worker count.
    pub fn run(&self, workers: usize) -> Result<(RunStats, Vec<EpisodeResult>)> {
        let start = Instant::now();
        let n = self.cfg.episodes() as u64;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
        let results = pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| self.run_episode(i))
                .collect::<Result<Vec<_>>>()
        })?;
        let rewards: Vec<f64> = results.iter().map(|r| r.reward).collect();
        Ok((RunStats::from_rewards(&rewards, start.elapsed())?, results))
    }
}

/// Stale policy fitted on the experiment's base model.
fn fit_policy(cfg: &ExperimentConfig) -> Result<StalePolicy> {
    let base = cfg.base_model()?;
    if cfg.env == EnvKind::CartPole {
        let mut rng = seed::stream(seed::derive_str(cfg.master_seed, "stale_policy"));
        fit_stale_policy_discretized(&base, &cfg.stale_policy_config(), &mut rng)
    } else {
        solve_stale_policy_tabular(&base, cfg.mcts_config().gamma.min(0.999), STALE_VI_TOL)
    }
}

/// Runs episode `index` of `cfg`.
pub fn run_episode(cfg: &ExperimentConfig, index: u64) -> Result<EpisodeResult> {
    Experiment::new(cfg.clone())?.run_episode(index)
}

pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<(RunStats, Vec<EpisodeResult>)> {
    Experiment::new(cfg.clone())?.run(workers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::ChangeMode;

    #[test]
    fn stats_oracle() {
        let s = RunStats::from_rewards(&[1.0, 0.0, 1.0, 0.0], Duration::ZERO).unwrap();
        assert_eq!(s.mean, 0.5);
        let want = (1.0f64 / 3.0).sqrt() / 2.0;
        assert!((s.stderr - want).abs() < 1e-15);
        assert!((s.stderr - 0.2887).abs() < 1e-4);
        let s = RunStats::from_rewards(&[3.0; 5], Duration::ZERO).unwrap();
        assert_eq!(s.stderr, 0.0);
        assert!(RunStats::from_rewards(&[1.0], Duration::ZERO).is_err());
    }

    #[test]
    fn random_agent_episode_is_reproducible() {
        let mut cfg = ExperimentConfig::new(EnvKind::FrozenLake, AgentSpec::Random, ChangeMode::Continuous);
        cfg.episodes = Some(20);
        let exp = Experiment::new(cfg).unwrap();
        for i in 0..20 {
            let a = exp.run_episode(i).unwrap();
            assert_eq!(a, exp.run_episode(i).unwrap());
            assert!(a.reward == 0.0 || a.reward == 1.0);
            assert!(a.steps <= 100);
            if a.truncated {
                assert!(a.steps == 100 && a.reward == 0.0);
            } else {
                assert!(a.steps < 100 || a.reward == 1.0);
            }
        }
        let (_, serial) = exp.run(1).unwrap();
        let (_, parallel) = exp.run(4).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn distinct_episode_streams() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| episode_seed(3, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
