//! Tunable environment parameters and the distance between two settings of one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum-to-one tolerance accepted for categorical parameters.
pub const PROB_TOL: f64 = 1e-9;

/// A parameter an environment exposes for non-stationary updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamValue {
    Scalar { value: f64, lower: f64, upper: f64 },
    Categorical { probs: Vec<f64>, support: Vec<String> },
}

impl ParamValue {
    pub fn scalar(value: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= value && value <= upper) {
            return Err(Error::contract(format!(
                "scalar {value} outside [{lower}, {upper}]"
            )));
        }
        Ok(ParamValue::Scalar { value, lower, upper })
    }

    pub fn categorical<S: Into<String>>(probs: Vec<f64>, support: Vec<S>) -> Result<Self> {
        let support: Vec<String> = support.into_iter().map(Into::into).collect();
        let v = ParamValue::Categorical { probs, support };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ParamValue::Scalar { value, lower, upper } => {
                if !(lower <= value && value <= upper) {
                    return Err(Error::contract(format!(
                        "scalar {value} outside [{lower}, {upper}]"
                    )));
                }
            }
            ParamValue::Categorical { probs, support } => {
                if probs.len() != support.len() {
                    return Err(Error::contract(format!(
                        "{} probabilities for {} support labels",
                        probs.len(),
                        support.len()
                    )));
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    return Err(Error::contract("negative or NaN probability"));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(Error::contract(format!("probabilities sum to {sum}")));
                }
            }
        }
        Ok(())
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            ParamValue::Scalar { value, .. } => Some(*value),
            ParamValue::Categorical { .. } => None,
        }
    }

    pub fn as_probs(&self) -> Option<&[f64]> {
        match self {
            ParamValue::Categorical { probs, .. } => Some(probs),
            ParamValue::Scalar { .. } => None,
        }
    }
}

/// Magnitude of a parameter change.
///
/// Scalars report the absolute difference. Categoricals report the
/// 1-Wasserstein distance with unit spacing between consecutive support
/// labels, i.e. the L1 distance between the two CDFs.
pub fn delta_change(old: &ParamValue, new: &ParamValue) -> Result<f64> {
    match (old, new) {
        (ParamValue::Scalar { value: a, .. }, ParamValue::Scalar { value: b, .. }) => {
            Ok((b - a).abs())
        }
        (
            ParamValue::Categorical { probs: p, support: sp },
            ParamValue::Categorical { probs: q, support: sq },
        ) => {
            if sp != sq || p.len() != q.len() {
                return Err(Error::contract("categorical supports differ"));
            }
            Ok(cdf_l1(p, q))
        }
        _ => Err(Error::contract("cannot compare scalar with categorical")),
    }
}

pub(crate) fn cdf_l1(p: &[f64], q: &[f64]) -> f64 {
    let mut cp = 0.0;
    let mut cq = 0.0;
    let mut dist = 0.0;
    // the final CDF entry is 1 on both sides and contributes nothing
    for (a, b) in p.iter().zip(q).take(p.len().saturating_sub(1)) {
        cp += a;
        cq += b;
        dist += (cp - cq).abs();
    }
    dist
}
