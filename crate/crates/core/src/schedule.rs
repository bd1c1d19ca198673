//! Schedulers decide at which decision epochs a parameter is due for an update.
//!
//! Epoch `t` counts completed agent steps; a scheduler is consulted at the
//! start of step `t >= 1`, before the dynamics run. Epoch 0 is the base model
//! and no scheduler ever fires there.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheduler {
    /// Fires at every epoch.
    Continuous,
    /// Fires at every multiple of `period`.
    Periodic { period: u64 },
    /// Fires at the listed epochs.
    Discrete { epochs: BTreeSet<u64> },
    /// Fires with probability `rate`, independently per epoch.
    Random {
        rate: f64,
        #[serde(default)]
        stream_id: u64,
    },
}

impl Scheduler {
    pub fn periodic(period: u64) -> Result<Self> {
        let s = Scheduler::Periodic { period };
        s.validate()?;
        Ok(s)
    }

    pub fn discrete(epochs: impl IntoIterator<Item = u64>) -> Result<Self> {
        let s = Scheduler::Discrete {
            epochs: epochs.into_iter().collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn random(rate: f64, stream_id: u64) -> Result<Self> {
        let s = Scheduler::Random { rate, stream_id };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scheduler::Periodic { period: 0 } => {
                Err(Error::config("periodic scheduler needs period >= 1"))
            }
            Scheduler::Discrete { epochs } if epochs.contains(&0) => {
                Err(Error::config("discrete scheduler epochs must be positive"))
            }
            Scheduler::Random { rate, .. } if !(0.0..=1.0).contains(rate) => {
                Err(Error::config(format!("random scheduler rate {rate} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Whether the parameter should change at epoch `t`.
    ///
    /// `seed` only matters for [`Scheduler::Random`], whose draw is a pure
    /// function of `(seed, stream_id, t)`.
    pub fn is_due(&self, t: u64, seed: u64) -> bool {
        if t == 0 {
            return false;
        }
        match self {
            Scheduler::Continuous => true,
            Scheduler::Periodic { period } => *period > 0 && t % period == 0,
            Scheduler::Discrete { epochs } => epochs.contains(&t),
            Scheduler::Random { rate, stream_id } => {
                let s = seed::derive(seed::derive(seed, *stream_id), t);
                seed::unit_from(s) < *rate
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic() {
        let s = Scheduler::periodic(3).unwrap();
        assert!(s.is_due(3, 0));
        assert!(!s.is_due(4, 0));
        assert!(s.is_due(6, 0));
        assert!(Scheduler::periodic(0).is_err());
    }

    #[test]
    fn continuous_fires_from_one() {
        assert!(Scheduler::Continuous.is_due(1, 0));
        assert!(Scheduler::Continuous.is_due(1000, 0));
    }

    #[test]
    fn discrete() {
        let s = Scheduler::discrete([1, 5]).unwrap();
        assert!(s.is_due(1, 9) && s.is_due(5, 9));
        assert!(!s.is_due(2, 9));
        assert!(Scheduler::discrete([0]).is_err());
    }

    #[test]
    fn never_at_zero() {
        let all = [
            Scheduler::Continuous,
            Scheduler::periodic(1).unwrap(),
            Scheduler::Discrete { epochs: [0, 1].into_iter().collect() },
            Scheduler::random(1.0, 0).unwrap(),
        ];
        for s in &all {
            for seed in 0..50 {
                assert!(!s.is_due(0, seed));
            }
        }
    }

    #[test]
    fn random_rate_and_streams() {
        let s = Scheduler::random(0.3, 4).unwrap();
        let n = 20_000u64;
        let hits = (1..=n).filter(|t| s.is_due(*t, 11)).count() as f64;
        let sd = (n as f64 * 0.3 * 0.7).sqrt();
        assert!((hits - 0.3 * n as f64).abs() < 4.0 * sd, "{hits}");
        let other = Scheduler::random(0.3, 5).unwrap();
        let same = (1..=200).all(|t| s.is_due(t, 11) == other.is_due(t, 11));
        assert!(!same);
        assert!(Scheduler::random(1.5, 0).is_err());
    }

    #[test]
    fn json_encoding() {
        let s: Scheduler = serde_json::from_str(r#"{"kind":"periodic","period":3}"#).unwrap();
        assert_eq!(s, Scheduler::Periodic { period: 3 });
        let s: Scheduler = serde_json::from_str(r#"{"kind":"discrete","epochs":[1]}"#).unwrap();
        assert!(s.is_due(1, 0));
        assert_eq!(
            serde_json::to_string(&Scheduler::Continuous).unwrap(),
            r#"{"kind":"continuous"}"#
        );
    }
}
