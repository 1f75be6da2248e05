//! The inverse temperature read as a sample budget: the Boltzmann
//! distribution `Q e^{αU}/Z` against the distribution `M_α` of the best of
//! `α` i.i.d. draws from `M`.
//!
//! With outcomes sorted by ascending utility and `F` the cumulative of `M`,
//! `M_α(x_n) = F(x_n)^α − F(x_{n−1})^α`. For every outcome below the
//! maximizer `x_N` the per-outcome constants are
//!
//! ```text
//! δ_n = U(x_N) − U(x_n)     c_n = log Q(x_n) − log Q(x_N)
//! γ_n = −log F(x_n)         ξ_n = c_n / δ_n
//! ```
//!
//! and the gap between the two distributions is bounded by `e^{−(α−ξ)δ}`.
//! Two aggregates of `δ` are reported: `δ_max = max(δ_n, γ_n)` and
//! `δ_min = min(δ_n, γ_n)`. Only `δ_min` yields a bound that dominates every
//! per-outcome term once `α > ξ`, so it is the operative constant.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{require_same_support, Distribution, UtilityVector};
use crate::error::{Error, Result};
use crate::free_energy::equilibrium_distribution;
use crate::output::format_real;
use crate::random::mix_seed;
use crate::temperature::InverseTemperature;

/// Slack added to the stated bound before declaring it violated.
pub const BOUND_SLACK: f64 = 1e-12;

/// Source `M`, reference `Q` and strictly ordered utilities `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleModel {
    pub m: Distribution,
    pub q: Distribution,
    pub u: UtilityVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub support: Vec<String>,
    pub m: Vec<f64>,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
}

impl SampleModel {
    pub fn new(m: Distribution, q: Distribution, u: UtilityVector) -> Result<Self> {
        require_same_support(m.support(), q.support())?;
        require_same_support(m.support(), u.support())?;
        if m.len() < 2 {
            return Err(Error::InvalidArgument(
                "model needs at least two outcomes".into(),
            ));
        }
        for d in [&m, &q] {
            if let Some(i) = d.probs().iter().position(|&p| p <= 0.0) {
                return Err(Error::ZeroProbability(d.support()[i].clone()));
            }
        }
        ascending_order(&u)?;
        Ok(Self { m, q, u })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        Self::new(
            Distribution::new(spec.support.clone(), spec.m.clone())?,
            Distribution::new(spec.support.clone(), spec.q.clone())?,
            UtilityVector::new(spec.support.clone(), spec.u.clone())?,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn support(&self) -> &[String] {
        self.m.support()
    }
}

/// Indices sorted by ascending utility; rejects ties.
fn ascending_order(u: &UtilityVector) -> Result<Vec<usize>> {
    let v = u.values();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    for w in order.windows(2) {
        if v[w[0]] == v[w[1]] {
            return Err(Error::TiedUtilities(u.support()[w[1]].clone()));
        }
    }
    Ok(order)
}

/// Distribution of the highest-utility outcome among `alpha` i.i.d. draws
/// from `m`, in the original support order.
pub fn max_of_alpha_distribution(
    m: &Distribution,
    u: &UtilityVector,
    alpha: u32,
) -> Result<Distribution> {
    require_same_support(m.support(), u.support())?;
    if alpha < 1 || alpha > i32::MAX as u32 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in 1..=2^31-1, got {alpha}"
        )));
    }
    let order = ascending_order(u)?;
    if alpha == 1 {
        return Ok(m.clone());
    }
    let mut probs = vec![0.0; m.len()];
    let mut below = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let upto = if rank + 1 == order.len() {
            1.0
        } else {
            below + m.probs()[i]
        };
        probs[i] = upto.powi(alpha as i32) - below.powi(alpha as i32);
        below = upto;
    }
    Ok(Distribution::from_parts_unchecked(
        m.support().to_vec(),
        probs,
    ))
}

/// Per-outcome constants for an outcome below the maximizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeConstants {
    pub label: String,
    pub delta: f64,
    pub c: f64,
    pub gamma: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `max(0, max_n ξ_n)`.
    pub xi: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    /// Outcomes in ascending utility order, maximizer excluded.
    pub per_outcome: Vec<OutcomeConstants>,
}

impl BoundConstants {
    /// Operative `δ` (the minimum aggregate).
    pub fn delta(&self) -> f64 {
        self.delta_min
    }
}

pub fn bound_constants(model: &SampleModel) -> Result<BoundConstants> {
    let order = ascending_order(&model.u)?;
    let top = *order.last().unwrap();
    let u = model.u.values();
    let (m, q) = (model.m.probs(), model.q.probs());
    let mut per_outcome = Vec::with_capacity(order.len() - 1);
    let mut cumulative = 0.0;
    for &i in &order[..order.len() - 1] {
        cumulative += m[i];
        let delta = u[top] - u[i];
        let c = q[i].ln() - q[top].ln();
        per_outcome.push(OutcomeConstants {
            label: model.support()[i].clone(),
            delta,
            c,
            gamma: -cumulative.ln(),
            xi: c / delta,
        });
    }
    let xi = per_outcome.iter().map(|o| o.xi).fold(0.0, f64::max);
    let exponents = per_outcome.iter().flat_map(|o| [o.delta, o.gamma]);
    let delta_min = exponents.clone().fold(f64::INFINITY, f64::min);
    let delta_max = exponents.fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundConstants {
        xi,
        delta_min,
        delta_max,
        per_outcome,
    })
}

/// Comparison of the Boltzmann distribution with `M_α` at one `α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub alpha: u32,
    pub m_alpha: Distribution,
    pub boltzmann: Distribution,
    pub sup_gap: f64,
    /// Operative constant `δ_min`.
    pub delta: f64,
    pub xi: f64,
    /// `e^{−(α−ξ)δ_min}`.
    pub stated_bound: f64,
    pub bound_satisfied: bool,
    pub delta_max: f64,
    /// `e^{−(α−ξ)δ_max}`.
    pub stated_bound_max: f64,
    pub bound_satisfied_max: bool,
    /// `α ≤ ξ`: the bound is at least 1 and says nothing.
    pub vacuous: bool,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str =
        "alpha,sup_gap,delta,xi,stated_bound,bound_satisfied,delta_max,stated_bound_max,bound_satisfied_max";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.alpha,
            format_real(self.sup_gap),
            format_real(self.delta),
            format_real(self.xi),
            format_real(self.stated_bound),
            self.bound_satisfied,
            format_real(self.delta_max),
            format_real(self.stated_bound_max),
            self.bound_satisfied_max,
        )
    }
}

pub fn check_bound(model: &SampleModel, alphas: &[u32]) -> Result<Vec<BoundReport>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("no alpha values given".into()));
    }
    let constants = bound_constants(model)?;
    alphas
        .iter()
        .map(|&alpha| {
            let m_alpha = max_of_alpha_distribution(&model.m, &model.u, alpha)?;
            let boltzmann = equilibrium_distribution(
                &model.q,
                &model.u,
                InverseTemperature::Finite(alpha as f64),
            )?;
            let sup_gap = boltzmann.sup_distance(&m_alpha)?;
            let excess = alpha as f64 - constants.xi;
            let stated_bound = (-excess * constants.delta_min).exp();
            let stated_bound_max = (-excess * constants.delta_max).exp();
            Ok(BoundReport {
                alpha,
                m_alpha,
                boltzmann,
                sup_gap,
                delta: constants.delta_min,
                xi: constants.xi,
                stated_bound,
                bound_satisfied: sup_gap <= stated_bound + BOUND_SLACK,
                delta_max: constants.delta_max,
                stated_bound_max,
                bound_satisfied_max: sup_gap <= stated_bound_max + BOUND_SLACK,
                vacuous: excess <= 0.0,
            })
        })
        .collect()
}

/// Empirical distribution of the best of `alpha` draws from `m` over
/// `trials` independent trials. Trial `t` uses its own generator seeded from
/// `(seed, t)`, so the result does not depend on how trials are scheduled.
pub fn monte_carlo_max(
    model: &SampleModel,
    alpha: u32,
    trials: u64,
    seed: u64,
) -> Result<Distribution> {
    if alpha < 1 || trials < 1 {
        return Err(Error::InvalidArgument(
            "alpha and trials must be at least 1".into(),
        ));
    }
    let order = ascending_order(&model.u)?;
    let n = order.len();
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &p in model.m.probs() {
        acc += p;
        cumulative.push(acc);
    }

    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut counts, t| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, t));
                let mut best = 0;
                for _ in 0..alpha {
                    let x: f64 = rng.gen();
                    let i = cumulative.iter().position(|&c| x < c).unwrap_or(n - 1);
                    best = best.max(rank[i]);
                }
                counts[order[best]] += 1;
                counts
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let probs = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    Ok(Distribution::from_parts_unchecked(
        model.support().to_vec(),
        probs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::labels;

    fn uniform3() -> SampleModel {
        SampleModel::new(
            Distribution::uniform(labels(3)).unwrap(),
            Distribution::uniform(labels(3)).unwrap(),
            UtilityVector::new(labels(3), vec![1.0, 2.0, 3.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn one_sample_is_m() {
        let m = Distribution::new(labels(3), vec![0.2, 0.5, 0.3]).unwrap();
        let u = UtilityVector::new(labels(3), vec![3.0, -1.0, 0.0]).unwrap();
        assert_eq!(max_of_alpha_distribution(&m, &u, 1).unwrap(), m);
    }

    #[test]
    fn two_samples_uniform3() {
        let model = uniform3();
        let d = max_of_alpha_distribution(&model.m, &model.u, 2).unwrap();
        let expected = [1.0 / 9.0, 3.0 / 9.0, 5.0 / 9.0];
        for (a, b) in d.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn original_order_is_kept() {
        let m = Distribution::uniform(labels(3)).unwrap();
        let u = UtilityVector::new(labels(3), vec![3.0, 1.0, 2.0]).unwrap();
        let d = max_of_alpha_distribution(&m, &u, 2).unwrap();
        assert!((d.probs()[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((d.probs()[1] - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn concentrates_on_argmax() {
        let model = uniform3();
        let d = max_of_alpha_distribution(&model.m, &model.u, 64).unwrap();
        let expected_top = 1.0 - (2.0f64 / 3.0).powi(64);
        assert!((d.probs()[2] - expected_top).abs() < 1e-15);
        assert!(1.0 - d.probs()[2] < 1e-6);
    }

    #[test]
    fn rejects_ties_and_zero_alpha() {
        let m = Distribution::uniform(labels(2)).unwrap();
        let tied = UtilityVector::new(labels(2), vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            max_of_alpha_distribution(&m, &tied, 2),
            Err(Error::TiedUtilities(_))
        ));
        let u = UtilityVector::new(labels(2), vec![1.0, 2.0]).unwrap();
        assert!(max_of_alpha_distribution(&m, &u, 0).is_err());
        assert!(SampleModel::new(m.clone(), m.clone(), tied).is_err());
    }

    #[test]
    fn constants_uniform3() {
        let c = bound_constants(&uniform3()).unwrap();
        assert_eq!(c.xi, 0.0);
        let deltas: Vec<f64> = c.per_outcome.iter().map(|o| o.delta).collect();
        assert_eq!(deltas, vec![2.0, 1.0]);
        assert!((c.per_outcome[0].gamma - 3f64.ln()).abs() < 1e-15);
        assert!((c.per_outcome[1].gamma - 1.5f64.ln()).abs() < 1e-15);
        assert!((c.delta() - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(c.delta_max, 2.0);
        assert!(c.per_outcome.iter().all(|o| o.c == 0.0));
    }

    #[test]
    fn constants_nonuniform_q() {
        let model = SampleModel::new(
            Distribution::uniform(labels(3)).unwrap(),
            Distribution::new(labels(3), vec![0.8, 0.1, 0.1]).unwrap(),
            UtilityVector::new(labels(3), vec![1.0, 2.0, 3.0]).unwrap(),
        )
        .unwrap();
        let c = bound_constants(&model).unwrap();
        assert!((c.xi - 8f64.ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn bound_rows() {
        let reports = check_bound(&uniform3(), &[1, 2, 64]).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports[2].sup_gap < 1e-6);
        assert!(reports.iter().all(|r| r.bound_satisfied));
        assert!(check_bound(&uniform3(), &[]).is_err());
        let row = reports[0].csv_row();
        assert_eq!(
            row.split(',').count(),
            BoundReport::CSV_HEADER.split(',').count()
        );
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo_max(&uniform3(), 3, 2000, 11).unwrap();
        let b = monte_carlo_max(&uniform3(), 3, 2000, 11).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_max(&uniform3(), 3, 2000, 12).unwrap();
        assert_ne!(a, c);
        assert!(monte_carlo_max(&uniform3(), 3, 0, 11).is_err());
    }
}
