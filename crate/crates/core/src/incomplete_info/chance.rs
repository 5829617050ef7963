//! The deterministic form of the chance constraint, and when it can be met.
//!
//! `P[(Ch)ᵀe ≥ α] ≥ 1 − δ` under `Ch ~ N(μ, Σ)` is equivalent to
//! `g(e) = α − μᵀe − p_δ·‖Σ^{1/2}e‖₂ ≤ 0`, where `p_δ = Φ⁻¹(δ)`. For
//! `δ ≤ 1/2` we have `p_δ ≤ 0`, so `g` is convex (a second-order cone
//! constraint).
//!
//! Some effort satisfies the constraint iff `μᵀe + p_δ‖Σ^{1/2}e‖` can be
//! made positive. When `Σ` is positive definite this happens exactly when
//! `−p_δ < ‖Σ^{−1/2}μ‖₂`, i.e. when `δ` exceeds `δ* = Φ(−‖Σ^{−1/2}μ‖₂)`.

use serde::Serialize;

use super::belief::ContributionBelief;
use crate::agent_model::check_delta;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, jacobi_eigen, norm2, std_normal_cdf, std_normal_quantile, Eigen};

/// `‖Σ^{1/2}e‖₂ = √(eᵀΣe)`, clamped at zero against rounding.
pub fn sigma_norm(belief: &ContributionBelief, e: &[f64]) -> Result<f64> {
    Ok(belief.sigma.quad_form(e)?.max(0.0).sqrt())
}

/// `g(e) = α − μᵀe − Φ⁻¹(δ)·‖Σ^{1/2}e‖₂`; `e` is chance-feasible iff `g(e) ≤ 0`.
pub fn chance_margin(
    belief: &ContributionBelief,
    e: &[f64],
    alpha: f64,
    delta: f64,
) -> Result<f64> {
    check_delta(delta)?;
    check_dim(belief.dim(), e.len())?;
    let p_delta = std_normal_quantile(delta)?;
    Ok(alpha - dot(&belief.mu, e) - p_delta * sigma_norm(belief, e)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// `δ*`: the constraint is satisfiable iff `δ > δ*`.
    pub threshold_delta: f64,
    /// `‖Σ^{−1/2}μ‖₂` (pseudo-inverse on the range of `Σ`; infinite when `μ`
    /// has a component in the null space).
    pub norm_value: f64,
}

/// Smallest eigenvalue that `feasibility` accepts as positive definite.
pub const PD_TOLERANCE: f64 = 1e-10;

/// Eigenvalues at or below this fraction of `max(λ_max, 1)` count as zero.
const RANK_REL_TOLERANCE: f64 = 1e-12;

/// A component of `μ` in the null space of `Σ` smaller than this fraction of
/// `‖μ‖` is treated as rounding noise.
const NULL_REL_TOLERANCE: f64 = 1e-9;

/// Split of `μ` against the eigenbasis of `Σ`.
pub(crate) struct Spectral {
    pub eig: Eigen,
    /// `Vᵀμ`.
    pub mu_tilde: Vec<f64>,
    /// Eigenvalues with rank-deficient directions set to exactly zero.
    pub lambdas: Vec<f64>,
    /// `‖Σ^{+1/2}μ‖`, the range-space norm.
    pub range_norm: f64,
    /// Norm of the null-space component of `μ`.
    pub null_norm: f64,
}

impl Spectral {
    pub fn new(belief: &ContributionBelief) -> Result<Self> {
        let eig = jacobi_eigen(&belief.sigma);
        let mu_tilde = eig.to_basis(&belief.mu)?;
        let cutoff = RANK_REL_TOLERANCE * eig.max_value().max(1.0);
        let lambdas: Vec<f64> = eig
            .values
            .iter()
            .map(|&l| if l <= cutoff { 0.0 } else { l })
            .collect();
        let mut range = 0.0;
        let mut null = 0.0;
        for (&m, &l) in mu_tilde.iter().zip(&lambdas) {
            if l > 0.0 {
                range += m * m / l;
            } else {
                null += m * m;
            }
        }
        let null_norm = if null.sqrt() > NULL_REL_TOLERANCE * norm2(&belief.mu) {
            null.sqrt()
        } else {
            0.0
        };
        Ok(Self {
            eig,
            mu_tilde,
            lambdas,
            range_norm: range.sqrt(),
            null_norm,
        })
    }

    pub fn verdict(&self, alpha: f64, delta: f64) -> FeasibilityVerdict {
        let (threshold_delta, norm_value) = if self.null_norm > 0.0 {
            (0.0, f64::INFINITY)
        } else {
            (std_normal_cdf(-self.range_norm), self.range_norm)
        };
        let feasible = alpha <= 0.0 || delta > threshold_delta;
        FeasibilityVerdict {
            feasible,
            threshold_delta,
            norm_value,
        }
    }
}

/// Feasibility for a positive-definite covariance: `δ* = Φ(−‖Σ^{−1/2}μ‖₂)`,
/// feasible iff `δ > δ*` (the threshold itself is infeasible). With `α ≤ 0`
/// zero effort already qualifies.
pub fn feasibility(
    belief: &ContributionBelief,
    alpha: f64,
    delta: f64,
) -> Result<FeasibilityVerdict> {
    check_delta(delta)?;
    let spectral = Spectral::new(belief)?;
    let min = spectral.eig.values.first().copied().unwrap_or(0.0);
    if min <= PD_TOLERANCE {
        return Err(Error::SingularCovariance {
            min_eigenvalue: min,
        });
    }
    Ok(spectral.verdict(alpha, delta))
}

/// Feasibility for any PSD covariance.
///
/// On the range of `Σ` the threshold uses the pseudo-inverse norm. If `μ`
/// has a component in the null space of `Σ`, effort along that component
/// raises the mean score without adding variance, so every `δ` is feasible.
/// Only a zero `μ` leaves the threshold at `Φ(0) = 1/2`.
pub fn feasibility_general(
    belief: &ContributionBelief,
    alpha: f64,
    delta: f64,
) -> Result<FeasibilityVerdict> {
    check_delta(delta)?;
    Ok(Spectral::new(belief)?.verdict(alpha, delta))
}
