//! Policy-augmented MCTS: a root-level convex blend of search returns and
//! stale-policy action values.

use serde::{Deserialize, Serialize};

use super::uct::{argmax, MctsConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PamctsConfig {
    /// Weight on the stale policy; 0 is pure search, 1 is pure policy.
    pub alpha: f64,
    pub mcts: MctsConfig,
}

impl PamctsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        self.mcts.validate()
    }
}

/// Min-max normalization to [0, 1]; constant inputs map to zeros.
fn normalize(q: &[f64]) -> Vec<f64> {
    let lo = q.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0.0; q.len()];
    }
    q.iter().map(|v| (v - lo) / range).collect()
}

/// Picks `argmax_a alpha * q̂_policy(a) + (1 - alpha) * q̂_search(a)`, where
/// each input is min-max normalized over actions first.
pub fn pamcts_decide(q_search: &[f64], q_policy: &[f64], alpha: f64) -> Result<usize> {
    if q_search.len() != q_policy.len() {
        return Err(Error::contract(format!(
            "search covers {} actions, policy {}",
            q_search.len(),
            q_policy.len()
        )));
    }
    if q_search.is_empty() {
        return Err(Error::contract("no actions to choose from"));
    }
    let s = normalize(q_search);
    let p = normalize(q_policy);
    let blended: Vec<f64> = s
        .iter()
        .zip(&p)
        .map(|(s, p)| alpha * p + (1.0 - alpha) * s)
        .collect();
    Ok(argmax(&blended))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints() {
        let search = [0.2, 0.9, 0.5];
        let policy = [3.0, -1.0, 7.0];
        assert_eq!(pamcts_decide(&search, &policy, 0.0).unwrap(), 1);
        assert_eq!(pamcts_decide(&search, &policy, 1.0).unwrap(), 2);
    }

    #[test]
    fn balanced_tie_goes_low() {
        assert_eq!(pamcts_decide(&[1.0, 0.0], &[0.0, 10.0], 0.5).unwrap(), 0);
    }

    #[test]
    fn key_mismatch() {
        assert!(pamcts_decide(&[1.0, 0.0], &[0.0], 0.5).is_err());
        assert!(pamcts_decide(&[], &[], 0.5).is_err());
    }

    #[test]
    fn constant_maps() {
        assert_eq!(pamcts_decide(&[2.0, 2.0], &[5.0, 5.0], 0.3).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn affine_rescaling_is_absorbed(
            search in prop::collection::vec(-100.0f64..100.0, 4),
            policy in prop::collection::vec(-100.0f64..100.0, 4),
            alpha in 0.0f64..=1.0,
            scale in 0.5f64..20.0,
            shift in -50.0f64..50.0,
        ) {
            let base = pamcts_decide(&search, &policy, alpha).unwrap();
            let rescaled: Vec<f64> = policy.iter().map(|v| v * scale + shift).collect();
            let s2: Vec<f64> = search.iter().map(|v| v * scale - shift).collect();
            // normalization may perturb the last ulp; only compare clear winners
            let score = |s: &[f64], p: &[f64]| {
                let ns = normalize(s);
                let np = normalize(p);
                (0..4).map(|a| alpha * np[a] + (1.0 - alpha) * ns[a]).collect::<Vec<_>>()
            };
            let sc = score(&search, &policy);
            let mut sorted = sc.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            prop_assume!(sorted[0] - sorted[1] > 1e-9);
            prop_assert_eq!(pamcts_decide(&search, &rescaled, alpha).unwrap(), base);
            prop_assert_eq!(pamcts_decide(&s2, &policy, alpha).unwrap(), base);
        }
    }
}
