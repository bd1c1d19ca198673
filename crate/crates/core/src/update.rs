//! Update functions: how a parameter changes once its scheduler fires.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{delta_change, ParamValue};

/// Support label of the "move backwards" entry in a relative-move distribution.
pub const REVERSE_LABEL: &str = "reverse";

const BUDGET_EPS: f64 = 1e-12;

/// Where the probability mass released by the intended direction goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitRule {
    /// Equally among the perpendicular moves; the reverse move gets nothing.
    #[serde(rename = "perp")]
    PerpendicularOnly,
    /// Equally among the perpendicular moves and the reverse move.
    #[serde(rename = "perp_reverse")]
    PerpendicularAndReverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpdateFn {
    Increment {
        k: f64,
    },
    SetTo {
        target: f64,
    },
    /// `±step` with a fair sign, refused once the movement budget is spent.
    RandomWalk {
        step: f64,
        budget: f64,
    },
    /// Projects the inner proposal onto `[value - l, value + l]`.
    #[serde(rename = "lipschitz")]
    LipschitzBounded {
        inner: Box<UpdateFn>,
        l: f64,
    },
    /// Adds `k` to the intended-direction probability, never going below `floor`.
    #[serde(rename = "dist_shift")]
    DistributionShift {
        #[serde(default)]
        intended_index: usize,
        k: f64,
        #[serde(default)]
        floor: f64,
        split: SplitRule,
    },
    /// Sets the intended-direction probability to `target`.
    #[serde(rename = "dist_set")]
    DistributionSet {
        #[serde(default)]
        intended_index: usize,
        target: f64,
        split: SplitRule,
    },
}

impl UpdateFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            UpdateFn::RandomWalk { step, budget } if !(*step >= 0.0 && *budget >= 0.0) => {
                Err(Error::config("random walk needs step >= 0 and budget >= 0"))
            }
            UpdateFn::LipschitzBounded { inner, l } => {
                if !(*l >= 0.0) {
                    return Err(Error::config("lipschitz bound must be >= 0"));
                }
                inner.validate()
            }
            UpdateFn::DistributionShift { floor, .. } if !(0.0..=1.0).contains(floor) => {
                Err(Error::config(format!("floor {floor} outside [0, 1]")))
            }
            UpdateFn::DistributionSet { target, .. } if !(0.0..=1.0).contains(target) => {
                Err(Error::config(format!("target probability {target} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    fn budget(&self) -> Option<f64> {
        match self {
            UpdateFn::RandomWalk { budget, .. } => Some(*budget),
            UpdateFn::LipschitzBounded { inner, .. } => inner.budget(),
            _ => None,
        }
    }
}

/// An update function plus the per-episode state it owns (the random-walk
/// budget already spent).
#[derive(Debug, Clone, PartialEq)]
pub struct Updater {
    func: UpdateFn,
    spent: f64,
}

impl Updater {
    pub fn new(func: UpdateFn) -> Result<Self> {
        func.validate()?;
        Ok(Updater { func, spent: 0.0 })
    }

    pub fn func(&self) -> &UpdateFn {
        &self.func
    }

    pub fn reset(&mut self) {
        self.spent = 0.0;
    }

    /// Budget left for a random walk, `None` for other update kinds.
    pub fn remaining_budget(&self) -> Option<f64> {
        self.func.budget().map(|b| (b - self.spent).max(0.0))
    }

    /// Applies the update, returning the new value and its [`delta_change`].
    pub fn apply<R: Rng + ?Sized>(
        &mut self,
        current: &ParamValue,
        rng: &mut R,
    ) -> Result<(ParamValue, f64)> {
        let new = propose(&self.func, current, &mut self.spent, rng)?;
        let delta = delta_change(current, &new)?;
        Ok((new, delta))
    }
}

/// Stateless application; random walks start from a fresh budget.
pub fn apply_update<R: Rng + ?Sized>(
    func: &UpdateFn,
    current: &ParamValue,
    rng: &mut R,
) -> Result<(ParamValue, f64)> {
    Updater::new(func.clone())?.apply(current, rng)
}

fn scalar_parts(v: &ParamValue, what: &str) -> Result<(f64, f64, f64)> {
    match v {
        ParamValue::Scalar { value, lower, upper } => Ok((*value, *lower, *upper)),
        ParamValue::Categorical { .. } => Err(Error::contract(format!(
            "{what} update applied to a categorical parameter"
        ))),
    }
}

fn with_value(value: f64, lower: f64, upper: f64) -> ParamValue {
    ParamValue::Scalar {
        value: value.clamp(lower, upper),
        lower,
        upper,
    }
}

fn propose<R: Rng + ?Sized>(
    func: &UpdateFn,
    current: &ParamValue,
    spent: &mut f64,
    rng: &mut R,
) -> Result<ParamValue> {
    match func {
        UpdateFn::Increment { k } => {
            let (v, lo, hi) = scalar_parts(current, "increment")?;
            Ok(with_value(v + k, lo, hi))
        }
        UpdateFn::SetTo { target } => {
            let (_, lo, hi) = scalar_parts(current, "set")?;
            Ok(with_value(*target, lo, hi))
        }
        UpdateFn::RandomWalk { step, budget } => {
            let (v, lo, hi) = scalar_parts(current, "random walk")?;
            if budget - *spent + BUDGET_EPS < *step {
                return Ok(current.clone());
            }
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let new = with_value(v + sign * step, lo, hi);
            *spent += (new.as_scalar().unwrap_or(v) - v).abs();
            Ok(new)
        }
        UpdateFn::LipschitzBounded { inner, l } => {
            let (v, lo, hi) = scalar_parts(current, "lipschitz")?;
            let proposal = propose(inner, current, spent, rng)?;
            let p = proposal.as_scalar().unwrap_or(v);
            Ok(with_value(p.clamp(v - l, v + l), lo, hi))
        }
        UpdateFn::DistributionShift {
            intended_index,
            k,
            floor,
            split,
        } => {
            let (probs, support) = categorical_parts(current)?;
            let p = *probs
                .get(*intended_index)
                .ok_or_else(|| Error::contract("intended index out of range"))?;
            let target = (p + k).max(*floor);
            Ok(redistribute(support, *intended_index, target, *split))
        }
        UpdateFn::DistributionSet {
            intended_index,
            target,
            split,
        } => {
            let (probs, support) = categorical_parts(current)?;
            if *intended_index >= probs.len() {
                return Err(Error::contract("intended index out of range"));
            }
            Ok(redistribute(support, *intended_index, *target, *split))
        }
    }
}

fn categorical_parts(v: &ParamValue) -> Result<(&[f64], &[String])> {
    match v {
        ParamValue::Categorical { probs, support } => Ok((probs, support)),
        ParamValue::Scalar { .. } => Err(Error::contract(
            "distribution update applied to a scalar parameter",
        )),
    }
}

/// Builds a distribution with `intended` probability on `index` and the rest
/// spread evenly over the recipients chosen by `split`.
pub fn redistribute(support: &[String], index: usize, intended: f64, split: SplitRule) -> ParamValue {
    let recipients: Vec<usize> = (0..support.len())
        .filter(|&j| j != index)
        .filter(|&j| split == SplitRule::PerpendicularAndReverse || support[j] != REVERSE_LABEL)
        .collect();
    let mut intended = intended.clamp(0.0, 1.0);
    if recipients.is_empty() {
        intended = 1.0;
    }
    let share = (1.0 - intended) / recipients.len().max(1) as f64;
    let mut probs = vec![0.0; support.len()];
    probs[index] = intended;
    for j in recipients {
        probs[j] = share;
    }
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    ParamValue::Categorical {
        probs,
        support: support.to_vec(),
    }
}
