//! Base environments: stationary dynamics under a fixed parameter set.

pub mod cartpole;
pub mod grid;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::ParamValue;

pub use cartpole::{CartPoleParams, CartPoleState};
pub use grid::{GridKind, GridMap, GridParams, Outcome};

/// Bounds attached to cartpole scalars when they are exposed as parameters.
pub const CARTPOLE_BOUNDS: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    CartPole,
    FrozenLake,
    CliffWalking,
    Bridge,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [
        EnvKind::CartPole,
        EnvKind::FrozenLake,
        EnvKind::CliffWalking,
        EnvKind::Bridge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::CartPole => "cartpole",
            EnvKind::FrozenLake => "frozenlake",
            EnvKind::CliffWalking => "cliffwalking",
            EnvKind::Bridge => "bridge",
        }
    }

    pub fn grid(self) -> Option<GridKind> {
        match self {
            EnvKind::CartPole => None,
            EnvKind::FrozenLake => Some(GridKind::FrozenLake),
            EnvKind::CliffWalking => Some(GridKind::CliffWalking),
            EnvKind::Bridge => Some(GridKind::Bridge),
        }
    }

    pub fn num_actions(self) -> usize {
        match self {
            EnvKind::CartPole => 2,
            _ => grid::NUM_ACTIONS,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self.grid() {
            None => &CartPoleParams::NAMES,
            Some(g) => g.param_names(),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown environment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvState {
    CartPole(CartPoleState),
    Cell(usize),
}

impl EnvState {
    pub fn cell(&self) -> Option<usize> {
        match self {
            EnvState::Cell(c) => Some(*c),
            EnvState::CartPole(_) => None,
        }
    }

    pub fn cartpole(&self) -> Option<&CartPoleState> {
        match self {
            EnvState::CartPole(s) => Some(s),
            EnvState::Cell(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnvParams {
    CartPole(CartPoleParams),
    Grid(GridParams),
}

/// An environment kind together with one fixed parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvModel {
    kind: EnvKind,
    params: EnvParams,
    map: Option<Arc<GridMap>>,
}

impl EnvModel {
    pub fn new(kind: EnvKind, params: EnvParams, map: Option<Arc<GridMap>>) -> Result<Self> {
        match (&params, kind.grid()) {
            (EnvParams::CartPole(p), None) => p.validate()?,
            (EnvParams::Grid(p), Some(g)) => {
                p.validate()?;
                let want = if g == GridKind::Bridge { 2 } else { 1 };
                if p.dists.len() != want {
                    return Err(Error::config(format!(
                        "{kind} needs {want} action distribution(s), got {}",
                        p.dists.len()
                    )));
                }
                if map.is_none() {
                    return Err(Error::config(format!("{kind} needs a map")));
                }
            }
            _ => return Err(Error::config(format!("parameter set does not match {kind}"))),
        }
        Ok(EnvModel { kind, params, map })
    }

    /// The shipped environment with default parameters (deterministic grids).
    pub fn canonical(kind: EnvKind) -> Self {
        match kind.grid() {
            None => EnvModel::new(kind, EnvParams::CartPole(CartPoleParams::default()), None),
            Some(g) => EnvModel::new(
                kind,
                EnvParams::Grid(GridParams::uniform_for(g, grid::DETERMINISTIC)),
                Some(Arc::new(g.canonical_map())),
            ),
        }
        .expect("canonical parameters are valid")
    }

    pub fn kind(&self) -> EnvKind {
        self.kind
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn map(&self) -> Option<&GridMap> {
        self.map.as_deref()
    }

    pub fn num_actions(&self) -> usize {
        self.kind.num_actions()
    }

    pub fn grid_params(&self) -> Option<&GridParams> {
        match &self.params {
            EnvParams::Grid(p) => Some(p),
            EnvParams::CartPole(_) => None,
        }
    }

    pub fn cartpole_params(&self) -> Option<&CartPoleParams> {
        match &self.params {
            EnvParams::CartPole(p) => Some(p),
            EnvParams::Grid(_) => None,
        }
    }

    pub fn get_param(&self, name: &str) -> Result<ParamValue> {
        let unknown = || Error::config(format!("{} has no parameter `{name}`", self.kind));
        match &self.params {
            EnvParams::CartPole(p) => {
                let v = p.get(name).ok_or_else(unknown)?;
                let (lo, hi) = CARTPOLE_BOUNDS;
                Ok(ParamValue::Scalar { value: v, lower: lo, upper: hi })
            }
            EnvParams::Grid(p) => {
                let idx = self.grid_param_index(name).ok_or_else(unknown)?;
                Ok(grid::dist_param(&p.dists[idx]))
            }
        }
    }

    pub fn set_param(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        value.validate()?;
        let idx = self.grid_param_index(name);
        let kind = self.kind;
        match (&mut self.params, value) {
            (EnvParams::CartPole(p), ParamValue::Scalar { value, .. }) => p
                .set(name, *value)
                .ok_or_else(|| Error::config(format!("{kind} has no parameter `{name}`"))),
            (EnvParams::Grid(p), ParamValue::Categorical { probs, .. }) if probs.len() == 4 => {
                let idx = idx.ok_or_else(|| Error::config(format!("{kind} has no parameter `{name}`")))?;
                p.dists[idx] = [probs[0], probs[1], probs[2], probs[3]];
                Ok(())
            }
            _ => Err(Error::contract(format!("value kind does not fit {kind} parameter `{name}`"))),
        }
    }

    fn grid_param_index(&self, name: &str) -> Option<usize> {
        self.kind.grid()?.param_names().iter().position(|n| *n == name)
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvState {
        match &self.map {
            Some(m) => EnvState::Cell(m.start()),
            None => EnvState::CartPole(cartpole::reset(rng)),
        }
    }

    pub fn is_terminal(&self, s: &EnvState) -> bool {
        match (s, self.kind.grid(), &self.map) {
            (EnvState::CartPole(c), None, _) => c.is_terminal(),
            (EnvState::Cell(c), Some(g), Some(m)) => grid::is_terminal(g, m, *c),
            _ => false,
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, s: &EnvState, a: usize, rng: &mut R) -> Result<(EnvState, f64, bool)> {
        match (s, &self.params, &self.map) {
            (EnvState::CartPole(c), EnvParams::CartPole(p), _) => {
                let (n, r, d) = cartpole::step(c, a, p)?;
                Ok((EnvState::CartPole(n), r, d))
            }
            (EnvState::Cell(c), EnvParams::Grid(p), Some(m)) => {
                let g = self.kind.grid().expect("grid kind");
                let (n, r, d) = grid::step(g, m, *c, a, p, rng)?;
                Ok((EnvState::Cell(n), r, d))
            }
            _ => Err(Error::contract(format!("state does not belong to {}", self.kind))),
        }
    }

    fn grid_parts(&self) -> Result<(GridKind, &GridMap, &GridParams)> {
        match (self.kind.grid(), &self.map, &self.params) {
            (Some(g), Some(m), EnvParams::Grid(p)) => Ok((g, m, p)),
            _ => Err(Error::Unsupported(format!(
                "{} has no enumerable transition model",
                self.kind
            ))),
        }
    }

    pub fn outcomes(&self, s: usize, a: usize) -> Result<Vec<Outcome>> {
        let (g, m, p) = self.grid_parts()?;
        grid::outcomes(g, m, s, a, p)
    }

    /// Outcomes of `(s, a)` if every half's intended probability were `p`.
    pub fn outcomes_at(&self, s: usize, a: usize, p: f64) -> Result<Vec<Outcome>> {
        let (g, m, _) = self.grid_parts()?;
        grid::outcomes(g, m, s, a, &GridParams::with_intended(g, p))
    }

    pub fn transition_model(&self, s: usize, a: usize) -> Result<Vec<(usize, f64)>> {
        let (g, m, p) = self.grid_parts()?;
        grid::transition_model(g, m, s, a, p)
    }
}
