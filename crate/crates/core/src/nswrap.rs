//! The non-stationary wrapper: a base environment whose parameters evolve
//! under scheduler/update bindings, with notification filtering and
//! stationary planning snapshots.

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::envs::{EnvKind, EnvModel, EnvState};
use crate::error::{Error, Result};
use crate::notify::{apply_notification_filter, ChangeSet, InnerLevel, NotificationLevel, NsObservation, NsReward};
use crate::param::ParamValue;
use crate::schedule::Scheduler;
use crate::seed::{self, Stream};
use crate::update::{UpdateFn, Updater};

/// Binds one environment parameter to a scheduler and an update function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunableBinding {
    pub param_name: String,
    pub scheduler: Scheduler,
    pub update: UpdateFn,
}

impl TunableBinding {
    pub fn new(param_name: impl Into<String>, scheduler: Scheduler, update: UpdateFn) -> Self {
        TunableBinding {
            param_name: param_name.into(),
            scheduler,
            update,
        }
    }
}

/// A frozen copy of an environment for planning. Only shared access to the
/// underlying model is exposed, so nothing done through a snapshot can
/// change its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSnapshot(EnvModel);

impl EnvSnapshot {
    pub fn new(model: EnvModel) -> Self {
        EnvSnapshot(model)
    }

    pub fn into_model(self) -> EnvModel {
        self.0
    }
}

impl Deref for EnvSnapshot {
    type Target = EnvModel;

    fn deref(&self) -> &EnvModel {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub obs: NsObservation<EnvState>,
    pub reward: NsReward,
    pub done: bool,
    pub truncated: bool,
}

struct Bound {
    binding: TunableBinding,
    updater: Updater,
    rng: Stream,
}

pub struct NsEnv {
    initial: EnvModel,
    model: EnvModel,
    bound: Vec<Bound>,
    level: NotificationLevel,
    max_steps: Option<u64>,
    relative_time: u64,
    state: EnvState,
    finished: bool,
    dynamics: Stream,
    scheduler_seed: u64,
}

impl NsEnv {
    pub fn new(base: EnvModel, bindings: Vec<TunableBinding>, level: NotificationLevel) -> Result<Self> {
        let mut bound = Vec::with_capacity(bindings.len());
        for b in bindings {
            base.get_param(&b.param_name)?;
            if bound.iter().any(|x: &Bound| x.binding.param_name == b.param_name) {
                return Err(Error::config(format!("parameter `{}` bound twice", b.param_name)));
            }
            b.scheduler.validate()?;
            let updater = Updater::new(b.update.clone())?;
            bound.push(Bound {
                binding: b,
                updater,
                rng: seed::stream(0),
            });
        }
        let mut env = NsEnv {
            state: base.reset(&mut seed::stream(0)),
            model: base.clone(),
            initial: base,
            bound,
            level,
            max_steps: None,
            relative_time: 0,
            finished: true,
            dynamics: seed::stream(0),
            scheduler_seed: 0,
        };
        env.reset(0);
        Ok(env)
    }

    /// Caps episodes at `cap` steps; the step reaching the cap without a
    /// terminal state reports `truncated`.
    pub fn with_truncation(mut self, cap: u64) -> Self {
        self.max_steps = Some(cap);
        self
    }

    pub fn kind(&self) -> EnvKind {
        self.model.kind()
    }

    pub fn level(&self) -> NotificationLevel {
        self.level
    }

    pub fn relative_time(&self) -> u64 {
        self.relative_time
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// The live model, including any changes applied this episode.
    pub fn current(&self) -> &EnvModel {
        &self.model
    }

    pub fn initial(&self) -> &EnvModel {
        &self.initial
    }

    pub fn remaining_budget(&self, param: &str) -> Option<f64> {
        self.bound
            .iter()
            .find(|b| b.binding.param_name == param)
            .and_then(|b| b.updater.remaining_budget())
    }

    fn quiet_changes(&self) -> ChangeSet {
        self.model
            .kind()
            .param_names()
            .iter()
            .map(|n| (n.to_string(), (false, 0.0)))
            .collect()
    }

    fn observe(&self, raw: &ChangeSet, reward: f64) -> (NsObservation<EnvState>, NsReward) {
        let (env_change, delta_change) = apply_notification_filter(raw, self.level);
        let obs = NsObservation {
            state: self.state,
            env_change: env_change.clone(),
            delta_change: delta_change.clone(),
            relative_time: self.relative_time,
        };
        let rew = NsReward {
            reward,
            env_change,
            delta_change,
            relative_time: self.relative_time,
        };
        (obs, rew)
    }

    /// Starts a new episode. Everything random in the episode derives from `seed`.
    pub fn reset(&mut self, seed: u64) -> (NsObservation<EnvState>, BTreeMap<String, ParamValue>) {
        self.model = self.initial.clone();
        self.relative_time = 0;
        self.finished = false;
        self.scheduler_seed = seed::derive_str(seed, "scheduler");
        self.dynamics = seed::stream(seed::derive_str(seed, "dynamics"));
        for b in &mut self.bound {
            b.updater.reset();
            b.rng = seed::stream(seed::derive_str(seed, &format!("param:{}", b.binding.param_name)));
        }
        self.state = self.model.reset(&mut self.dynamics);
        let info = self
            .bound
            .iter()
            .filter_map(|b| {
                let v = self.model.get_param(&b.binding.param_name).ok()?;
                Some((b.binding.param_name.clone(), v))
            })
            .collect();
        let (obs, _) = self.observe(&self.quiet_changes(), 0.0);
        (obs, info)
    }

    /// Advances one decision epoch: due parameters update first, then the
    /// base dynamics run under the updated parameters.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.finished {
            return Err(Error::contract("episode already finished; call reset"));
        }
        if action >= self.model.num_actions() {
            return Err(Error::contract(format!("action {action} out of range")));
        }
        let t = self.relative_time + 1;
        let mut raw = self.quiet_changes();
        for b in &mut self.bound {
            if !b.binding.scheduler.is_due(t, seed::derive(self.scheduler_seed, hash_name(&b.binding.param_name))) {
                continue;
            }
            let current = self.model.get_param(&b.binding.param_name)?;
            let (new, delta) = b.updater.apply(&current, &mut b.rng)?;
            let changed = new != current;
            self.model.set_param(&b.binding.param_name, &new)?;
            raw.insert(b.binding.param_name.clone(), (changed, delta));
        }
        let (next, reward, done) = self.model.step(&self.state, action, &mut self.dynamics)?;
        self.state = next;
        self.relative_time = t;
        let truncated = !done && self.max_steps.is_some_and(|cap| t >= cap);
        self.finished = done || truncated;
        let (obs, rew) = self.observe(&raw, reward);
        Ok(StepOutcome {
            obs,
            reward: rew,
            done,
            truncated,
        })
    }

    /// Planning model for the agent. Only `FullModel(Detailed)` sees the
    /// current parameters; every other level plans on the base parameters.
    pub fn get_planning_env(&self) -> EnvSnapshot {
        match self.level {
            NotificationLevel::FullModel(InnerLevel::Detailed) => EnvSnapshot(self.model.clone()),
            _ => EnvSnapshot(self.initial.clone()),
        }
    }
}

fn hash_name(name: &str) -> u64 {
    seed::derive_str(0, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::grid;
    use crate::notify::gating_holds;

    fn cartpole_single(level: NotificationLevel) -> NsEnv {
        NsEnv::new(
            EnvModel::canonical(EnvKind::CartPole),
            vec![TunableBinding::new(
                "masspole",
                Scheduler::discrete([1]).unwrap(),
                UpdateFn::SetTo { target: 1.0 },
            )],
            level,
        )
        .unwrap()
    }

    #[test]
    fn single_change_detailed_reports_delta() {
        let mut env = cartpole_single(NotificationLevel::Detailed);
        env.reset(3);
        let out = env.step(1).unwrap();
        assert_eq!(out.obs.relative_time, 1);
        assert_eq!(out.obs.env_change.as_ref().unwrap()["masspole"], true);
        assert!((out.obs.delta_change.as_ref().unwrap()["masspole"] - 0.9).abs() < 1e-12);
        assert_eq!(out.obs.env_change.as_ref().unwrap()["gravity"], false);
        let out = env.step(1).unwrap();
        assert_eq!(out.obs.env_change.as_ref().unwrap()["masspole"], false);
    }

    #[test]
    fn no_notification_hides_everything() {
        let mut env = cartpole_single(NotificationLevel::None);
        let (obs, _) = env.reset(3);
        assert!(obs.env_change.is_none() && obs.delta_change.is_none());
        for _ in 0..5 {
            let out = env.step(0).unwrap();
            assert!(out.obs.env_change.is_none() && out.obs.delta_change.is_none());
            assert!(out.reward.env_change.is_none());
            if out.done {
                break;
            }
        }
    }

    #[test]
    fn snapshot_freshness() {
        let mut full_d = cartpole_single(NotificationLevel::FullModel(InnerLevel::Detailed));
        let mut full_b = cartpole_single(NotificationLevel::FullModel(InnerLevel::Basic));
        full_d.reset(1);
        full_b.reset(1);
        let before = full_d.get_planning_env();
        assert_eq!(before.cartpole_params().unwrap().masspole, 0.1);
        assert_eq!(full_b.get_planning_env(), before);
        full_d.step(0).unwrap();
        full_b.step(0).unwrap();
        assert_eq!(full_d.get_planning_env().cartpole_params().unwrap().masspole, 1.0);
        assert_eq!(full_b.get_planning_env().cartpole_params().unwrap().masspole, 0.1);
    }

    #[test]
    fn reset_restores_initial_params() {
        let mut env = cartpole_single(NotificationLevel::FullModel(InnerLevel::Detailed));
        env.reset(9);
        env.step(0).unwrap();
        assert_eq!(env.current().cartpole_params().unwrap().masspole, 1.0);
        let (obs, info) = env.reset(9);
        assert_eq!(obs.relative_time, 0);
        assert_eq!(env.relative_time(), 0);
        assert_eq!(info["masspole"].as_scalar(), Some(0.1));
        assert_eq!(env.get_planning_env().into_model(), *env.initial());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let run = |seed| {
            let mut env = cartpole_single(NotificationLevel::Basic);
            let (obs, _) = env.reset(seed);
            let mut states = vec![obs.state];
            for i in 0..30 {
                let out = env.step(i % 2).unwrap();
                states.push(out.obs.state);
                if out.done {
                    break;
                }
            }
            states
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn stepping_finished_episode_fails() {
        let mut env = NsEnv::new(EnvModel::canonical(EnvKind::FrozenLake), vec![], NotificationLevel::Basic)
            .unwrap()
            .with_truncation(2);
        env.reset(0);
        assert!(!env.step(grid::LEFT).unwrap().truncated);
        assert!(env.step(grid::LEFT).unwrap().truncated);
        assert!(matches!(env.step(grid::LEFT), Err(Error::Contract(_))));
    }

    #[test]
    fn no_bindings_all_false() {
        let mut env = NsEnv::new(EnvModel::canonical(EnvKind::FrozenLake), vec![], NotificationLevel::Basic).unwrap();
        env.reset(0);
        let out = env.step(grid::RIGHT).unwrap();
        assert!(out.obs.env_change.unwrap().values().all(|f| !f));
        assert_eq!(out.obs.state, EnvState::Cell(1));
    }

    #[test]
    fn gating_for_every_level() {
        for level in NotificationLevel::ALL {
            let mut env = cartpole_single(level);
            let (obs, _) = env.reset(2);
            assert!(gating_holds(&obs.env_change, &obs.delta_change, level));
            for k in 1..=3 {
                let out = env.step(k as usize % 2).unwrap();
                assert_eq!(out.obs.relative_time, k);
                assert!(gating_holds(&out.obs.env_change, &out.obs.delta_change, level));
                assert!(gating_holds(&out.reward.env_change, &out.reward.delta_change, level));
            }
        }
    }

    #[test]
    fn bad_bindings_rejected() {
        let b = TunableBinding::new("wind", Scheduler::Continuous, UpdateFn::Increment { k: 0.1 });
        assert!(NsEnv::new(EnvModel::canonical(EnvKind::CartPole), vec![b], NotificationLevel::None).is_err());
        let b = TunableBinding::new("gravity", Scheduler::Continuous, UpdateFn::Increment { k: 0.1 });
        assert!(NsEnv::new(
            EnvModel::canonical(EnvKind::CartPole),
            vec![b.clone(), b],
            NotificationLevel::None
        )
        .is_err());
    }

    #[test]
    fn random_walk_budget_tracked_per_episode() {
        let b = TunableBinding::new(
            "gravity",
            Scheduler::periodic(3).unwrap(),
            UpdateFn::RandomWalk { step: 0.5, budget: 1.0 },
        );
        let mut env = NsEnv::new(EnvModel::canonical(EnvKind::CartPole), vec![b], NotificationLevel::Detailed).unwrap();
        env.reset(0);
        for _ in 0..9 {
            if env.step(0).unwrap().done {
                break;
            }
        }
        let g = env.current().cartpole_params().unwrap().gravity;
        assert!((g - 9.8).abs() <= 1.0 + 1e-12);
        env.reset(0);
        assert_eq!(env.remaining_budget("gravity"), Some(1.0));
    }
}
