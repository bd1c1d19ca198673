//! Risk-averse tree search: depth-limited maximin planning against an
//! adversary that may move the intended-direction probability by at most
//! `lipschitz` per decision epoch.
//!
//! The transition below a decision node at depth `k` (root = 0) is evaluated
//! at every point of a uniform grid of `grid_points` values over
//! `[p - k L, p + k L] ∩ [floor, 1]`, endpoints included, and the adversary
//! keeps the worst.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::uct::argmax;
use crate::envs::{EnvModel, EnvState, Outcome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatsLeaf {
    /// Leaves beyond the horizon are worth nothing.
    Zero,
    /// Leaves are valued with the optimal values of the planning snapshot.
    SnapshotValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatsConfig {
    /// Number of agent decisions searched.
    pub d: u32,
    pub gamma: f64,
    /// Per-epoch bound on the drift of the intended-direction probability.
    #[serde(rename = "L")]
    pub lipschitz: f64,
    /// Adversary grid resolution.
    #[serde(rename = "K")]
    pub grid_points: usize,
    #[serde(default)]
    pub floor: f64,
    #[serde(default = "default_leaf")]
    pub leaf: RatsLeaf,
}

fn default_leaf() -> RatsLeaf {
    RatsLeaf::SnapshotValue
}

impl Default for RatsConfig {
    fn default() -> Self {
        RatsConfig {
            d: 3,
            gamma: 0.99,
            lipschitz: 0.1,
            grid_points: 5,
            floor: 0.0,
            leaf: RatsLeaf::SnapshotValue,
        }
    }
}

impl RatsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 || !(self.lipschitz >= 0.0) || self.grid_points < 2 || !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::config(format!(
                "rats needs d >= 1, L >= 0, K >= 2, floor in [0, 1]; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Adversary choices for a transition leaving depth `k`.
    pub fn adversary_grid(&self, nominal: f64, k: u32) -> Vec<f64> {
        let radius = self.lipschitz * k as f64;
        let hi = (nominal + radius).min(1.0);
        let lo = (nominal - radius).max(self.floor).min(hi);
        let n = self.grid_points;
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// A model whose transitions are parameterized by one scalar probability.
pub trait RobustModel {
    fn num_actions(&self) -> usize;
    fn is_terminal(&self, s: usize) -> bool;
    /// Current value of the drifting parameter.
    fn nominal(&self) -> Result<f64>;
    fn outcomes_at(&self, s: usize, a: usize, p: f64) -> Result<Vec<Outcome>>;
}

impl RobustModel for EnvModel {
    fn num_actions(&self) -> usize {
        EnvModel::num_actions(self)
    }

    fn is_terminal(&self, s: usize) -> bool {
        EnvModel::is_terminal(self, &EnvState::Cell(s))
    }

    fn nominal(&self) -> Result<f64> {
        self.grid_params()
            .map(|p| p.intended_prob())
            .ok_or_else(|| Error::Unsupported(format!("{} has no scalar transition parameter", self.kind())))
    }

    fn outcomes_at(&self, s: usize, a: usize, p: f64) -> Result<Vec<Outcome>> {
        EnvModel::outcomes_at(self, s, a, p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatsDecision {
    pub action: usize,
    /// Worst-case value of each root action.
    pub values: Vec<f64>,
}

struct Search<'a, M: RobustModel + ?Sized, L: Fn(usize) -> f64> {
    model: &'a M,
    cfg: &'a RatsConfig,
    leaf: L,
    memo: HashMap<(usize, u32), f64>,
    grids: Vec<Vec<f64>>,
}

impl<M: RobustModel + ?Sized, L: Fn(usize) -> f64> Search<'_, M, L> {
    /// Worst case over the adversary grid of taking `a` in `s` at depth `k`.
    fn q(&mut self, s: usize, a: usize, k: u32) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for i in 0..self.grids[k as usize].len() {
            let p = self.grids[k as usize][i];
            let mut value = 0.0;
            for o in self.model.outcomes_at(s, a, p)? {
                let cont = if o.done { 0.0 } else { self.v(o.next, k + 1)? };
                value += o.prob * (o.reward + self.cfg.gamma * cont);
            }
            worst = worst.min(value);
        }
        Ok(worst)
    }

    fn v(&mut self, s: usize, k: u32) -> Result<f64> {
        if self.model.is_terminal(s) {
            return Ok(0.0);
        }
        if k >= self.cfg.d {
            return Ok((self.leaf)(s));
        }
        if let Some(v) = self.memo.get(&(s, k)) {
            return Ok(*v);
        }
        let mut best = f64::NEG_INFINITY;
        for a in 0..self.model.num_actions() {
            best = best.max(self.q(s, a, k)?);
        }
        self.memo.insert((s, k), best);
        Ok(best)
    }
}

/// Maximin search with leaves valued by `leaf`.
pub fn rats_search<M, L>(model: &M, s: usize, cfg: &RatsConfig, leaf: L) -> Result<RatsDecision>
where
    M: RobustModel + ?Sized,
    L: Fn(usize) -> f64,
{
    cfg.validate()?;
    let nominal = model.nominal()?;
    if model.is_terminal(s) {
        return Err(Error::contract("search started from a terminal state"));
    }
    // grids[k] serves the transition at depth k; the root transition is k = 0
    let grids = (0..cfg.d).map(|k| cfg.adversary_grid(nominal, k)).collect();
    let mut search = Search {
        model,
        cfg,
        leaf,
        memo: HashMap::new(),
        grids,
    };
    let values = (0..model.num_actions())
        .map(|a| search.q(s, a, 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatsDecision {
        action: argmax(&values),
        values,
    })
}

/// Maximin decision with zero-valued leaves.
pub fn rats_decide<M: RobustModel + ?Sized>(model: &M, s: usize, cfg: &RatsConfig) -> Result<usize> {
    Ok(rats_search(model, s, cfg, |_| 0.0)?.action)
}
