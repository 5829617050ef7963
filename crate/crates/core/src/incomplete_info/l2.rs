//! Minimum-ℓ2 effort under the chance constraint.
//!
//! Stationarity of `min ‖e‖₂ s.t. g(e) ≤ 0` reads
//! `e/‖e‖ = λ(μ − q Σe/‖Σ^{1/2}e‖)` with `q = −p_δ ≥ 0`, so the optimum has
//! the form `e = λ(k1 I + k2 Σ)^{−1} μ` with
//! `k1 = 1/‖e‖` and `k2 = λq/‖Σ^{1/2}e‖`. Writing `t = k2/k1` and
//! `d(t) = (I + tΣ)^{−1}μ`, consistency of `k2` with the direction it
//! produces reduces to the scalar equation
//!
//! ```text
//! φ(t) = t·‖Σ^{1/2} d(t)‖ − q = 0,
//! ```
//!
//! `φ` increases monotonically from `−q` towards `‖Σ^{+1/2}μ‖ − q`, so it
//! has a root exactly in the feasible regime and bisection finds it.
//! The effort is then `d(t)` scaled until the constraint is active.

use serde::Serialize;

use super::belief::ContributionBelief;
use super::chance::{chance_margin, sigma_norm, FeasibilityVerdict, Spectral};
use crate::agent_model::{check_delta, EffortProfile};
use crate::error::{Error, Result};
use crate::numerics::{dot, linear_solve, norm2, std_normal_cdf, std_normal_quantile, Matrix};

/// Optimal effort together with the multipliers of the KKT system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChanceL2Solution {
    pub effort: EffortProfile,
    pub cost: f64,
    /// `t = k2/k1`; infinite when the optimum is the null-space limit direction.
    pub t: f64,
    pub k1: f64,
    pub k2: f64,
    pub lambda: f64,
    /// Constraint value `g(e)` at the solution (0 up to rounding).
    pub margin: f64,
    /// `‖e/‖e‖ − λ(μ − qΣe/‖Σ^{1/2}e‖)‖`, absent at the nonsmooth limit.
    pub kkt_residual: Option<f64>,
    pub feasibility: FeasibilityVerdict,
}

/// Relative width at which the bisection on `t` stops.
const BISECTION_REL_TOL: f64 = 1e-12;

/// Position of the optimum along the direction family.
#[derive(Debug, Clone, Copy)]
enum Root {
    Finite(f64),
    /// `t → ∞`: effort along the null-space component of `μ`.
    Limit,
}

/// `φ(t)` in the eigenbasis.
fn phi(t: f64, mu_tilde: &[f64], lambdas: &[f64], q: f64) -> f64 {
    let s: f64 = mu_tilde
        .iter()
        .zip(lambdas)
        .map(|(&m, &l)| {
            let d = m / (1.0 + t * l);
            l * d * d
        })
        .sum();
    t * s.sqrt() - q
}

fn find_root(
    mu_tilde: &[f64],
    lambdas: &[f64],
    q: f64,
    range_norm: f64,
    null_norm: f64,
) -> Result<Root> {
    if q == 0.0 {
        return Ok(Root::Finite(0.0));
    }
    if q >= range_norm {
        // No finite root: only the null-space component can pay for itself.
        return if null_norm > 0.0 {
            Ok(Root::Limit)
        } else {
            Err(Error::NumericalFailure(format!(
                "no root: q = {q} exceeds the attainable {range_norm}"
            )))
        };
    }
    let lam_max = lambdas.iter().copied().fold(0.0, f64::max);
    let mut hi = 1e6 / lam_max;
    let mut expansions = 0;
    while phi(hi, mu_tilde, lambdas, q) <= 0.0 {
        if expansions == 3 {
            return Err(Error::NumericalFailure(format!(
                "could not bracket the multiplier ratio (phi <= 0 at t = {hi:e})"
            )));
        }
        hi *= 10.0;
        expansions += 1;
    }
    let mut lo = 0.0;
    for _ in 0..400 {
        if hi - lo <= BISECTION_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if phi(mid, mu_tilde, lambdas, q) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Root::Finite(0.5 * (lo + hi)))
}

/// `(I + tΣ)^{−1}μ`, through a direct solve with an eigenbasis fallback.
fn direction(belief: &ContributionBelief, spectral: &Spectral, t: f64) -> Result<Vec<f64>> {
    let m = Matrix::identity(belief.dim()).add(&belief.sigma.as_matrix().scale(t))?;
    match linear_solve(&m, &belief.mu) {
        Ok(d) => Ok(d),
        Err(Error::Singular { .. }) => {
            let dt: Vec<f64> = spectral
                .mu_tilde
                .iter()
                .zip(&spectral.lambdas)
                .map(|(&mu, &l)| mu / (1.0 + t * l))
                .collect();
            spectral.eig.from_basis(&dt)
        }
        Err(e) => Err(e),
    }
}

fn null_direction(spectral: &Spectral) -> Result<Vec<f64>> {
    let dt: Vec<f64> = spectral
        .mu_tilde
        .iter()
        .zip(&spectral.lambdas)
        .map(|(&mu, &l)| if l == 0.0 { mu } else { 0.0 })
        .collect();
    spectral.eig.from_basis(&dt)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    belief: &ContributionBelief,
    d: Vec<f64>,
    t: f64,
    q: f64,
    alpha: f64,
    delta: f64,
    verdict: FeasibilityVerdict,
    smooth: bool,
) -> Result<ChanceL2Solution> {
    let gain = dot(&belief.mu, &d) - q * sigma_norm(belief, &d)?;
    if !(gain > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "direction does not raise the score (gain {gain:e})"
        )));
    }
    let s = alpha / gain;
    let e: Vec<f64> = d.iter().map(|x| s * x).collect();
    let norm_e = norm2(&e);
    let lambda = 1.0 / norm2(&d);
    let k1 = 1.0 / norm_e;
    let kkt_residual = if smooth {
        let sig_e = sigma_norm(belief, &e)?;
        let sigma_e = belief.sigma.mul_vec(&e)?;
        let r: Vec<f64> = (0..e.len())
            .map(|i| {
                let pull = if q > 0.0 && sig_e > 0.0 {
                    q * sigma_e[i] / sig_e
                } else {
                    0.0
                };
                e[i] / norm_e - lambda * (belief.mu[i] - pull)
            })
            .collect();
        Some(norm2(&r))
    } else {
        None
    };
    Ok(ChanceL2Solution {
        margin: chance_margin(belief, &e, alpha, delta)?,
        cost: norm_e,
        effort: EffortProfile::new(e)?,
        t,
        k1,
        k2: t * k1,
        lambda,
        kkt_residual,
        feasibility: verdict,
    })
}

fn zero_solution(
    belief: &ContributionBelief,
    alpha: f64,
    delta: f64,
    verdict: FeasibilityVerdict,
) -> Result<ChanceL2Solution> {
    Ok(ChanceL2Solution {
        effort: EffortProfile::zeros(belief.dim()),
        cost: 0.0,
        t: 0.0,
        k1: f64::INFINITY,
        k2: f64::INFINITY,
        lambda: 0.0,
        margin: chance_margin(belief, &vec![0.0; belief.dim()], alpha, delta)?,
        kkt_residual: None,
        feasibility: verdict,
    })
}

/// Minimum-ℓ2 chance-feasible effort for any PSD covariance.
pub fn best_response_chance_l2(
    belief: &ContributionBelief,
    alpha: f64,
    delta: f64,
) -> Result<ChanceL2Solution> {
    check_delta(delta)?;
    let spectral = Spectral::new(belief)?;
    let verdict = spectral.verdict(alpha, delta);
    if alpha <= 0.0 {
        return zero_solution(belief, alpha, delta, verdict);
    }
    if !verdict.feasible {
        return Err(Error::Infeasible {
            threshold_delta: Some(verdict.threshold_delta),
        });
    }
    let q = -std_normal_quantile(delta)?;
    match find_root(
        &spectral.mu_tilde,
        &spectral.lambdas,
        q,
        spectral.range_norm,
        spectral.null_norm,
    )? {
        Root::Finite(t) => {
            let d = direction(belief, &spectral, t)?;
            finish(belief, d, t, q, alpha, delta, verdict, true)
        }
        Root::Limit => {
            let d = null_direction(&spectral)?;
            finish(belief, d, f64::INFINITY, q, alpha, delta, verdict, false)
        }
    }
}

/// Same program for a diagonal covariance, using the per-feature closed form
/// `e_f = λ μ_f / (k1 + k2 Σ_ff)` once the scalar search has fixed `t`.
pub fn best_response_chance_l2_diag(
    belief: &ContributionBelief,
    alpha: f64,
    delta: f64,
) -> Result<ChanceL2Solution> {
    check_delta(delta)?;
    let sigma = belief.sigma.as_matrix();
    if !sigma.is_diagonal() {
        return Err(Error::Precondition("covariance must be diagonal".into()));
    }
    let var = sigma.diag();
    let mu = &belief.mu;
    let cutoff = 1e-12 * var.iter().copied().fold(1.0, f64::max);
    let lambdas: Vec<f64> = var
        .iter()
        .map(|&v| if v <= cutoff { 0.0 } else { v })
        .collect();
    let range_norm = mu
        .iter()
        .zip(&lambdas)
        .filter(|(_, &l)| l > 0.0)
        .map(|(m, l)| m * m / l)
        .sum::<f64>()
        .sqrt();
    let null_raw = mu
        .iter()
        .zip(&lambdas)
        .filter(|(_, &l)| l == 0.0)
        .map(|(m, _)| m * m)
        .sum::<f64>()
        .sqrt();
    let null_norm = if null_raw > 1e-9 * norm2(mu) {
        null_raw
    } else {
        0.0
    };
    let (threshold_delta, norm_value) = if null_norm > 0.0 {
        (0.0, f64::INFINITY)
    } else {
        (std_normal_cdf(-range_norm), range_norm)
    };
    let verdict = FeasibilityVerdict {
        feasible: alpha <= 0.0 || delta > threshold_delta,
        threshold_delta,
        norm_value,
    };
    if alpha <= 0.0 {
        return zero_solution(belief, alpha, delta, verdict);
    }
    if !verdict.feasible {
        return Err(Error::Infeasible {
            threshold_delta: Some(verdict.threshold_delta),
        });
    }
    let q = -std_normal_quantile(delta)?;
    match find_root(mu, &lambdas, q, range_norm, null_norm)? {
        Root::Finite(t) => {
            let d: Vec<f64> = mu
                .iter()
                .zip(&lambdas)
                .map(|(&m, &l)| m / (1.0 + t * l))
                .collect();
            finish(belief, d, t, q, alpha, delta, verdict, true)
        }
        Root::Limit => {
            let d: Vec<f64> = mu
                .iter()
                .zip(&lambdas)
                .map(|(&m, &l)| if l == 0.0 { m } else { 0.0 })
                .collect();
            finish(belief, d, f64::INFINITY, q, alpha, delta, verdict, false)
        }
    }
}
