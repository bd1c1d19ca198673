//! Notification levels and the agent-facing observation and reward records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Granularity of a full-model notification's planning snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerLevel {
    Basic,
    Detailed,
}

/// How much an agent is told about parameter changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NotificationLevel {
    None,
    Basic,
    Detailed,
    /// Notification plus a planning model. `Detailed` snapshots carry the
    /// current parameters; `Basic` snapshots stay on the base parameters.
    FullModel(InnerLevel),
}

impl NotificationLevel {
    pub const ALL: [NotificationLevel; 5] = [
        NotificationLevel::None,
        NotificationLevel::Basic,
        NotificationLevel::Detailed,
        NotificationLevel::FullModel(InnerLevel::Basic),
        NotificationLevel::FullModel(InnerLevel::Detailed),
    ];

    /// The level that governs which change fields are emitted.
    pub fn effective(self) -> NotificationLevel {
        match self {
            NotificationLevel::FullModel(InnerLevel::Basic) => NotificationLevel::Basic,
            NotificationLevel::FullModel(InnerLevel::Detailed) => NotificationLevel::Detailed,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NotificationLevel::None => "none",
            NotificationLevel::Basic => "basic",
            NotificationLevel::Detailed => "detailed",
            NotificationLevel::FullModel(InnerLevel::Basic) => "full_basic",
            NotificationLevel::FullModel(InnerLevel::Detailed) => "full_detailed",
        }
    }
}

impl fmt::Display for NotificationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NotificationLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NotificationLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown notification level `{s}`")))
    }
}

impl Serialize for NotificationLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for NotificationLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-parameter `(changed, magnitude)` record for one decision epoch.
pub type ChangeSet = BTreeMap<String, (bool, f64)>;
pub type ChangeFlags = BTreeMap<String, bool>;
pub type ChangeDeltas = BTreeMap<String, f64>;

/// Strips change information the agent is not entitled to at `level`.
pub fn apply_notification_filter(
    raw: &ChangeSet,
    level: NotificationLevel,
) -> (Option<ChangeFlags>, Option<ChangeDeltas>) {
    let flags = || raw.iter().map(|(k, (f, _))| (k.clone(), *f)).collect();
    match level.effective() {
        NotificationLevel::None => (None, None),
        NotificationLevel::Basic => (Some(flags()), None),
        _ => (
            Some(flags()),
            Some(raw.iter().map(|(k, (_, d))| (k.clone(), *d)).collect()),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsObservation<S> {
    pub state: S,
    pub env_change: Option<ChangeFlags>,
    pub delta_change: Option<ChangeDeltas>,
    pub relative_time: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsReward {
    pub reward: f64,
    pub env_change: Option<ChangeFlags>,
    pub delta_change: Option<ChangeDeltas>,
    pub relative_time: u64,
}

/// Checks the field-presence rules an observation must satisfy at `level`.
pub fn gating_holds(
    env_change: &Option<ChangeFlags>,
    delta_change: &Option<ChangeDeltas>,
    level: NotificationLevel,
) -> bool {
    match level.effective() {
        NotificationLevel::None => env_change.is_none() && delta_change.is_none(),
        NotificationLevel::Basic => env_change.is_some() && delta_change.is_none(),
        _ => match (env_change, delta_change) {
            (Some(f), Some(d)) => d.keys().all(|k| f.contains_key(k)),
            _ => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn masspole() -> ChangeSet {
        [("masspole".to_string(), (true, 0.1))].into_iter().collect()
    }

    #[test]
    fn basic_hides_magnitude() {
        let (f, d) = apply_notification_filter(&masspole(), NotificationLevel::Basic);
        assert_eq!(f.unwrap()["masspole"], true);
        assert!(d.is_none());
    }

    #[test]
    fn detailed_reports_magnitude() {
        let (f, d) = apply_notification_filter(&masspole(), NotificationLevel::Detailed);
        assert_eq!(f.unwrap()["masspole"], true);
        assert_eq!(d.unwrap()["masspole"], 0.1);
    }

    #[test]
    fn none_reports_nothing() {
        let (f, d) = apply_notification_filter(&ChangeSet::new(), NotificationLevel::None);
        assert!(f.is_none() && d.is_none());
    }

    #[test]
    fn full_model_defers_to_inner() {
        use InnerLevel::*;
        let raw = masspole();
        assert_eq!(
            apply_notification_filter(&raw, NotificationLevel::FullModel(Basic)),
            apply_notification_filter(&raw, NotificationLevel::Basic)
        );
        assert_eq!(
            apply_notification_filter(&raw, NotificationLevel::FullModel(Detailed)),
            apply_notification_filter(&raw, NotificationLevel::Detailed)
        );
    }

    #[test]
    fn gating_exhaustive() {
        let cases = [ChangeSet::new(), masspole(), {
            let mut c = masspole();
            c.insert("gravity".into(), (false, 0.0));
            c
        }];
        for level in NotificationLevel::ALL {
            for raw in &cases {
                let (f, d) = apply_notification_filter(raw, level);
                assert!(gating_holds(&f, &d, level), "{level} {raw:?}");
            }
        }
    }

    #[test]
    fn level_names_round_trip() {
        for level in NotificationLevel::ALL {
            assert_eq!(level.as_str().parse::<NotificationLevel>().unwrap(), level);
            let json = serde_json::to_string(&level).unwrap();
            assert_eq!(serde_json::from_str::<NotificationLevel>(&json).unwrap(), level);
        }
        assert!("loud".parse::<NotificationLevel>().is_err());
    }
}
