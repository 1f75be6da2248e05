//! Shared per-node kernel: the soft extremum `(1/β) log Σ q e^{βx}` with its
//! exact limits, plus the matching Boltzmann weights.

use crate::temperature::InverseTemperature;

/// Default absolute tolerance for detecting ties under an infinite temperature.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct NodeOutput {
    pub value: f64,
    /// `log Σ q e^{βx}`; only for finite β.
    pub log_partition: Option<f64>,
    pub weights: Vec<f64>,
}

pub(crate) fn node_operator(
    q: &[f64],
    x: &[f64],
    beta: InverseTemperature,
    tie_tol: f64,
) -> NodeOutput {
    debug_assert_eq!(q.len(), x.len());
    debug_assert!(!q.is_empty());
    match beta {
        InverseTemperature::Finite(b) => {
            let exponents: Vec<f64> = q.iter().zip(x).map(|(&qi, &xi)| qi.ln() + b * xi).collect();
            let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut weights: Vec<f64> = exponents.iter().map(|a| (a - shift).exp()).collect();
            let total: f64 = weights.iter().sum();
            let log_z = shift + total.ln();
            for w in &mut weights {
                *w /= total;
            }
            let (lo, hi) = min_max(x);
            NodeOutput {
                value: (log_z / b).clamp(lo, hi),
                log_partition: Some(log_z),
                weights,
            }
        }
        InverseTemperature::Zero => {
            let mut value = 0.0;
            for (&qi, &xi) in q.iter().zip(x) {
                value += qi * xi;
            }
            NodeOutput {
                value,
                log_partition: None,
                weights: q.to_vec(),
            }
        }
        InverseTemperature::PosInf => {
            let (_, hi) = min_max(x);
            extremal(q, x, hi, |xi| xi >= hi - tie_tol)
        }
        InverseTemperature::NegInf => {
            let (lo, _) = min_max(x);
            extremal(q, x, lo, |xi| xi <= lo + tie_tol)
        }
    }
}

fn extremal(q: &[f64], x: &[f64], value: f64, selected: impl Fn(f64) -> bool) -> NodeOutput {
    let mut weights: Vec<f64> = q
        .iter()
        .zip(x)
        .map(|(&qi, &xi)| if selected(xi) { qi } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    NodeOutput {
        value,
        log_partition: None,
        weights,
    }
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}
