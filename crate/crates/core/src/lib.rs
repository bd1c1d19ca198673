//! Simulation toolkit and benchmark harness for non-stationary Markov
//! decision processes.
//!
//! Environments expose tunable parameters. Each parameter is bound to a
//! [`Scheduler`](schedule::Scheduler) deciding *when* it changes and an
//! [`UpdateFn`](update::UpdateFn) deciding *how*. [`NsEnv`](nswrap::NsEnv)
//! composes a base environment, its bindings and a
//! [`NotificationLevel`](notify::NotificationLevel) into an episode loop that
//! reports changes to the agent at the configured granularity, and hands out
//! stationary [`EnvSnapshot`](nswrap::EnvSnapshot)s for model-based planners.
//!
//! The [`agents`] module holds UCT, policy-augmented MCTS and risk-averse
//! minimax search; [`bench`] runs seeded experiments and writes CSV/markdown.

pub mod agents;
pub mod bench;
pub mod envs;
pub mod error;
pub mod notify;
pub mod nswrap;
pub mod param;
pub mod schedule;
pub mod seed;
pub mod update;

pub use error::{Error, Result};
pub use notify::{NotificationLevel, NsObservation, NsReward};
pub use nswrap::{EnvSnapshot, NsEnv, TunableBinding};
pub use param::ParamValue;
pub use schedule::Scheduler;
pub use update::UpdateFn;
