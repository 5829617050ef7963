//! Best responses when the agent knows the classifier `h0` and the graph exactly.
//!
//! The agent minimises `Cost(e)` subject to `(C h0)ᵀ e ≥ α`. Only the
//! contribution vector `Ch = C h0` matters, and by flipping signs it can be
//! taken nonnegative: effort on a feature is always pushed in the direction
//! that raises the score.
//!
//! * ℓ1 cost: the optimum is a corner. All effort goes on the feature with the
//!   best bang-per-buck ratio `(Ch)_f / c_f`.
//! * ℓp cost, `p > 1`: effort spreads as `e_f ∝ ((Ch)_f / c_f)^{1/(p-1)}`.
//!
//! Both solvers return the zero profile when `α ≤ 0`, since the agent already
//! passes.

use serde::Serialize;

use crate::agent_model::{CostModel, EffortProfile, Partition};
use crate::error::{check_dim, Error, Result};

/// `|Ch|` together with the sign pattern needed to map solutions back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignNormalizedContribution {
    pub y: Vec<f64>,
    pub signs: Vec<i8>,
}

impl SignNormalizedContribution {
    /// Maps a nonnegative solution `ẽ` back to `e_f = sign_f · ẽ_f`.
    pub fn restore(&self, magnitudes: &[f64]) -> Vec<f64> {
        magnitudes
            .iter()
            .zip(&self.signs)
            .map(|(m, &s)| f64::from(s) * m)
            .collect()
    }
}

pub fn sign_normalize(ch: &[f64]) -> SignNormalizedContribution {
    let signs = ch
        .iter()
        .map(|&v| {
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    SignNormalizedContribution {
        y: ch.iter().map(|v| v.abs()).collect(),
        signs,
    }
}

fn ratios(y: &[f64], c: &[f64]) -> Vec<f64> {
    y.iter().zip(c).map(|(y, c)| y / c).collect()
}

/// Minimum weighted-ℓ1 effort reaching score gain `alpha`.
///
/// Ties in the bang-per-buck argmax go to the lowest feature index.
pub fn best_response_l1(ch: &[f64], c: &[f64], alpha: f64) -> Result<EffortProfile> {
    check_dim(ch.len(), c.len())?;
    if let Some(w) = c.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::Domain(format!(
            "cost weights must be positive, got {w}"
        )));
    }
    if alpha <= 0.0 {
        return Ok(EffortProfile::zeros(ch.len()));
    }
    let norm = sign_normalize(ch);
    let r = ratios(&norm.y, c);
    let mut best = 0;
    for f in 1..r.len() {
        if r[f] > r[best] {
            best = f;
        }
    }
    if r.get(best).is_none_or(|&v| v == 0.0) {
        return Err(Error::Infeasible {
            threshold_delta: None,
        });
    }
    let mut e = vec![0.0; ch.len()];
    e[best] = f64::from(norm.signs[best]) * alpha / norm.y[best];
    Ok(EffortProfile::from_vec_unchecked(e))
}

/// Minimum weighted-ℓp effort (`p > 1`) reaching score gain `alpha`.
pub fn best_response_lp(ch: &[f64], model: &CostModel, alpha: f64) -> Result<EffortProfile> {
    check_dim(model.dim(), ch.len())?;
    let p = model.p();
    if p <= 1.0 {
        return Err(Error::Domain(format!("the ℓp solver needs p > 1, got {p}")));
    }
    if alpha <= 0.0 {
        return Ok(EffortProfile::zeros(ch.len()));
    }
    let norm = sign_normalize(ch);
    // log of (y_f / c_f)^{1/(p-1)}; shifting by the maximum keeps every
    // exponentiated weight in (0, 1] even when p is close to 1.
    let logs: Vec<f64> = norm
        .y
        .iter()
        .zip(model.weights())
        .map(|(&y, &c)| {
            if y > 0.0 {
                (y.ln() - c.ln()) / (p - 1.0)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::Infeasible {
            threshold_delta: None,
        });
    }
    let shape: Vec<f64> = logs.iter().map(|&l| (l - top).exp()).collect();
    let gain: f64 = shape.iter().zip(&norm.y).map(|(s, y)| s * y).sum();
    let kappa = alpha / gain;
    let magnitudes: Vec<f64> = shape.iter().map(|s| kappa * s).collect();
    Ok(EffortProfile::from_vec_unchecked(norm.restore(&magnitudes)))
}

/// Dispatches on the cost exponent.
pub fn best_response(ch: &[f64], model: &CostModel, alpha: f64) -> Result<EffortProfile> {
    if model.p() == 1.0 {
        best_response_l1(ch, model.weights(), alpha)
    } else {
        best_response_lp(ch, model, alpha)
    }
}

/// Under ℓ1 cost, true iff some desirable feature's bang-per-buck strictly
/// beats every undesirable one (an empty maximum counts as 0). The best
/// response is then supported on a desirable feature, so it is β-desirable
/// for every β.
pub fn check_l1_desirability(ch: &[f64], c: &[f64], partition: &Partition) -> bool {
    let r = ratios(&sign_normalize(ch).y, c);
    let best_d = partition.desirable().map(|f| r[f]).fold(0.0, f64::max);
    let best_u = partition.undesirable().map(|f| r[f]).fold(0.0, f64::max);
    best_d > best_u
}

/// Relative slack on boundary comparisons. Profiles sitting exactly on the
/// desirability boundary (e.g. `β = 1/√2` with equal norms) count as
/// desirable even though `β/√(1-β²)` is not exactly representable.
pub const TIE_SLACK: f64 = 1e-12;

/// `ln(β/√(1-β²))`, with `1-β²` formed as `(1-β)(1+β)` to keep precision near 1.
pub(crate) fn log_odds_factor(beta: f64) -> f64 {
    beta.ln() - 0.5 * ((1.0 - beta) * (1.0 + beta)).ln()
}

/// `ln Σ_{f∈S} r_f^q`, `-∞` for an empty or all-zero set.
fn log_power_sum(r: &[f64], set: impl Iterator<Item = usize>, q: f64) -> f64 {
    let logs: Vec<f64> = set.filter(|&f| r[f] > 0.0).map(|f| q * r[f].ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

/// Under ℓp cost (`p > 1`), whether the best response is β-desirable:
/// `[Σ_D r_f^{2/(p-1)}]^{1/2} ≥ β/√(1-β²) · [Σ_U r_f^{2/(p-1)}]^{1/2}` with
/// `r_f = |Ch|_f / c_f`. At `β = 1` this requires zero undesirable ratios.
pub fn check_lp_desirability(
    ch: &[f64],
    c: &[f64],
    p: f64,
    partition: &Partition,
    beta: f64,
) -> Result<bool> {
    check_dim(ch.len(), c.len())?;
    check_dim(ch.len(), partition.dim())?;
    if p <= 1.0 {
        return Err(Error::Domain(format!(
            "the ℓp condition needs p > 1, got {p}"
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    let r = ratios(&sign_normalize(ch).y, c);
    let q = 2.0 / (p - 1.0);
    let log_u = log_power_sum(&r, partition.undesirable(), q);
    if log_u == f64::NEG_INFINITY {
        return Ok(true);
    }
    if beta == 1.0 {
        return Ok(false);
    }
    let log_d = log_power_sum(&r, partition.desirable(), q);
    Ok(0.5 * log_d >= log_odds_factor(beta) + 0.5 * log_u - TIE_SLACK)
}
