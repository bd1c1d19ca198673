//! Experiment harness: canonical setups, seeded parallel execution, CSV and
//! markdown output.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{build_ns_env, AgentSpec, ChangeMode, ExperimentConfig};
pub use output::{markdown_table, read_csv, rows_for, write_csv, ResultRow};
pub use runner::{episode_seed, run_episode, run_experiment, EpisodeResult, Experiment, RunStats};

use crate::envs::EnvKind;
use crate::notify::{InnerLevel, NotificationLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Every gridworld and CartPole at the canonical single-change targets,
    /// without notification.
    Single,
    /// Every environment under continuous change, with and without full
    /// notification.
    Continuous,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "paper-single" | "single" => Ok(Suite::Single),
            "paper-continuous" | "continuous" => Ok(Suite::Continuous),
            other => Err(crate::Error::Parse(format!("unknown suite `{other}`"))),
        }
    }
}

fn suite_agents(env: EnvKind) -> Vec<AgentSpec> {
    let mut agents = vec![AgentSpec::Mcts];
    agents.extend([0.25, 0.5, 0.75].map(|alpha| AgentSpec::Pamcts { alpha }));
    if env != EnvKind::CartPole {
        agents.push(AgentSpec::Rats);
    }
    agents.push(AgentSpec::Random);
    agents
}

/// The canonical grid of configurations for `suite`.
pub fn suite_configs(suite: Suite, master_seed: u64) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for env in EnvKind::ALL {
        let settings: Vec<(ChangeMode, NotificationLevel)> = match suite {
            Suite::Single => {
                let targets: &[f64] = if env == EnvKind::CartPole {
                    &config::CANONICAL_MASSPOLE_TARGETS
                } else {
                    &config::CANONICAL_GRID_TARGETS
                };
                targets
                    .iter()
                    .map(|t| (ChangeMode::Single { target: *t }, NotificationLevel::None))
                    .collect()
            }
            Suite::Continuous => [NotificationLevel::None, NotificationLevel::FullModel(InnerLevel::Detailed)]
                .into_iter()
                .map(|n| (ChangeMode::Continuous, n))
                .collect(),
        };
        for (mode, notify) in settings {
            for agent in suite_agents(env) {
                let mut cfg = ExperimentConfig::new(env, agent, mode);
                cfg.notify = notify;
                cfg.master_seed = master_seed;
                out.push(cfg);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_valid_and_canonical() {
        for suite in [Suite::Single, Suite::Continuous] {
            let cfgs = suite_configs(suite, 0);
            assert!(!cfgs.is_empty());
            for c in cfgs {
                c.validate().unwrap();
                assert!(c.is_canonical());
            }
        }
        assert_eq!(suite_configs(Suite::Single, 0).len(), 3 * 3 * 6 + 2 * 5);
    }
}
