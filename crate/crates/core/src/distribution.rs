//! Finite probability vectors and utility vectors over labeled outcomes.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a distribution.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector over an ordered set of distinct labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    support: Vec<String>,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and wraps a probability vector.
    pub fn new(support: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        check_support(&support, probs.len())?;
        for (label, &p) in support.iter().zip(&probs) {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry `{label}` has probability {p}"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("mass sums to {sum}")));
        }
        Ok(Self { support, probs })
    }

    /// Builds from unnormalized nonnegative weights.
    pub fn from_weights(support: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        Self::new(support, probs)
    }

    /// Uniform distribution over `support`.
    pub fn uniform(support: Vec<String>) -> Result<Self> {
        let n = support.len();
        Self::new(support, vec![1.0 / n as f64; n])
    }

    pub(crate) fn from_parts_unchecked(support: Vec<String>, probs: Vec<f64>) -> Self {
        Self { support, probs }
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of `label`, if present.
    pub fn prob(&self, label: &str) -> Option<f64> {
        self.support
            .iter()
            .position(|l| l == label)
            .map(|i| self.probs[i])
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Half the L1 distance; supports must match.
    pub fn total_variation(&self, other: &Distribution) -> Result<f64> {
        require_same_support(&self.support, &other.support)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Largest absolute per-entry difference; supports must match.
    pub fn sup_distance(&self, other: &Distribution) -> Result<f64> {
        require_same_support(&self.support, &other.support)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Real-valued utilities over an ordered set of labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityVector {
    support: Vec<String>,
    values: Vec<f64>,
}

impl UtilityVector {
    pub fn new(support: Vec<String>, values: Vec<f64>) -> Result<Self> {
        check_support(&support, values.len())?;
        if let Some((label, v)) = support.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "utility of `{label}` is not finite ({v})"
            )));
        }
        Ok(Self { support, values })
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Adds `c` to every utility.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            support: self.support.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Numbered labels `x0, x1, …` for quick construction.
pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

pub(crate) fn require_same_support(a: &[String], b: &[String]) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SupportMismatch(format!("{a:?} vs {b:?}")))
    }
}

fn check_support(support: &[String], n: usize) -> Result<()> {
    if support.len() != n {
        return Err(Error::SupportMismatch(format!(
            "{} labels for {n} entries",
            support.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    let mut seen = HashSet::with_capacity(n);
    for label in support {
        if !seen.insert(label.as_str()) {
            return Err(Error::SupportMismatch(format!("duplicate label `{label}`")));
        }
    }
    Ok(())
}
