//! Classifier-side audits.
//!
//! These tools take the principal's point of view. Given a classifier `h0`,
//! they compute the effort it induces and report whether that effort is
//! β-desirable. They also provide membership tests for two classifier
//! families that stay convex:
//!
//! * classifiers with a single desirable feature (`p ∈ [1, 3]`);
//! * classifiers whose undesirable contribution is norm-bounded.
//!
//! Finally, they provide the explicit witnesses showing that the general
//! β-desirable family is not convex.
//!
//! Membership is decided in contribution space `z = C h0`. Convexity there
//! carries over to `h0` space only when `C` has full row rank, so every audit
//! reports the numerical rank of `C`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::agent_model::{beta_of, CostModel, Partition};
use crate::causal_graph::ContributionMatrix;
use crate::complete_info::{
    best_response, check_l1_desirability, check_lp_desirability, log_odds_factor, TIE_SLACK,
};
use crate::error::{check_dim, Error, Result};
use crate::numerics::rank;

/// Pivot threshold for the rank test on `C`.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub classifier: Vec<f64>,
    pub contribution: Vec<f64>,
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    /// Best-response effort, absent when `α ≤ 0` (the agent does nothing).
    pub effort: Option<Vec<f64>>,
    pub cost: Option<f64>,
    /// `beta_of(effort)`, undefined for the zero profile.
    pub achieved_beta: Option<f64>,
    pub zero_effort: bool,
    /// Strict bang-per-buck dominance for `p = 1`, the ℓp norm condition otherwise.
    pub desirability_check: bool,
    /// `‖(C h0)_U‖_{2/(p-1)}` (max norm when `p = 1`).
    pub undesirable_norm: f64,
    pub contribution_rank: usize,
    pub full_row_rank: bool,
    pub witness_notes: Option<String>,
}

/// `‖v‖_q` over the listed coordinates; `q = ∞` gives the max norm.
/// For `q < 1` this is the usual quasi-norm formula.
pub fn subset_norm(v: &[f64], idx: impl Iterator<Item = usize>, q: f64) -> f64 {
    let vals: Vec<f64> = idx.map(|f| v[f].abs()).collect();
    let top = vals.iter().copied().fold(0.0, f64::max);
    if top == 0.0 || q.is_infinite() {
        return top;
    }
    top * vals
        .iter()
        .map(|x| (x / top).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

fn norm_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        2.0 / (p - 1.0)
    }
}

/// Solves the agent's complete-information problem under `h0` and measures
/// the desirability of the result.
pub fn audit_classifier(
    h0: &[f64],
    c: &ContributionMatrix,
    model: &CostModel,
    partition: &Partition,
    beta: f64,
    alpha: f64,
) -> Result<AuditReport> {
    check_dim(c.dim(), h0.len())?;
    check_dim(c.dim(), model.dim())?;
    check_dim(c.dim(), partition.dim())?;
    let ch = c.apply(h0)?;
    let p = model.p();
    let desirability_check = if p == 1.0 {
        check_l1_desirability(&ch, model.weights(), partition)
    } else {
        check_lp_desirability(&ch, model.weights(), p, partition, beta)?
    };
    let undesirable_norm = subset_norm(&ch, partition.undesirable(), norm_exponent(p));
    let contribution_rank = rank(c.as_matrix(), RANK_TOLERANCE);
    let full_row_rank = contribution_rank == c.dim();

    let mut notes = Vec::new();
    if !full_row_rank {
        notes.push(format!(
            "contribution matrix has rank {contribution_rank} < {}; convexity in contribution space need not transfer to classifier space",
            c.dim()
        ));
    }
    let (effort, cost, achieved_beta, zero_effort) = if alpha <= 0.0 {
        notes.push(
            "alpha <= 0: the agent already passes and invests no effort; beta is undefined".into(),
        );
        (None, None, None, true)
    } else {
        let e = best_response(&ch, model, alpha)?;
        let b = beta_of(&e, partition)?;
        (Some(e.to_vec()), Some(model.cost(&e)?), Some(b), false)
    };
    Ok(AuditReport {
        classifier: h0.to_vec(),
        contribution: ch,
        alpha,
        p,
        beta,
        effort,
        cost,
        achieved_beta,
        zero_effort,
        desirability_check,
        undesirable_norm,
        contribution_rank,
        full_row_rank,
        witness_notes: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

fn single_desirable(partition: &Partition) -> Result<usize> {
    let d: Vec<usize> = partition.desirable().collect();
    match d.as_slice() {
        [f] => Ok(*f),
        _ => Err(Error::Partition(d.len())),
    }
}

/// Membership of `h0` in the β-desirable family when exactly one feature
/// `f_d` is desirable. Requires `C h0 ≥ 0`; classifiers violating it are not
/// members.
///
/// For `p > 1` the test is `r(h0) ≤ 0`, where
/// `r(h0) = K·‖((C h0)_f / c_f)_{f∈U}‖_{2/(p-1)} − (C h0)_{f_d}` and
/// `K = c_{f_d}·(β/√(1-β²))^{p-1}`. For `p = 1` it is strict bang-per-buck
/// dominance of `f_d`.
pub fn membership_single_desirable(
    h0: &[f64],
    c: &ContributionMatrix,
    weights: &[f64],
    p: f64,
    partition: &Partition,
    beta: f64,
) -> Result<bool> {
    check_dim(c.dim(), h0.len())?;
    check_dim(c.dim(), weights.len())?;
    check_dim(c.dim(), partition.dim())?;
    let fd = single_desirable(partition)?;
    if !(1.0..=3.0).contains(&p) {
        return Err(Error::Domain(format!(
            "single-desirable membership needs p in [1, 3], got {p}"
        )));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let z = c.apply(h0)?;
    if z.iter().any(|&v| v < 0.0) {
        return Ok(false);
    }
    if p == 1.0 {
        return Ok(check_l1_desirability(&z, weights, partition));
    }
    let ratios: Vec<f64> = z.iter().zip(weights).map(|(z, c)| z / c).collect();
    let k = weights[fd] * ((p - 1.0) * log_odds_factor(beta)).exp();
    let bound = k * subset_norm(&ratios, partition.undesirable(), 2.0 / (p - 1.0));
    let r = bound - z[fd];
    Ok(r <= TIE_SLACK * bound.max(z[fd]))
}

/// Membership in `{h0 : ‖(C h0)_U‖_{2/(p-1)} ≤ γ}`, a closed set.
pub fn membership_undesirable_bounded(
    h0: &[f64],
    c: &ContributionMatrix,
    p: f64,
    partition: &Partition,
    gamma: f64,
) -> Result<bool> {
    check_dim(c.dim(), h0.len())?;
    check_dim(c.dim(), partition.dim())?;
    if !(p > 1.0 && p <= 3.0) {
        return Err(Error::Domain(format!(
            "bounded-undesirable membership needs p in (1, 3], got {p}"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let z = c.apply(h0)?;
    Ok(subset_norm(&z, partition.undesirable(), 2.0 / (p - 1.0)) <= gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessCase {
    L1,
    Lp,
}

impl FromStr for WitnessCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Self::L1),
            "lp" => Ok(Self::Lp),
            other => Err(Error::Schema(format!(
                "unknown witness case {other:?} (expected l1 or lp)"
            ))),
        }
    }
}

impl fmt::Display for WitnessCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L1 => "l1",
            Self::Lp => "lp",
        })
    }
}

/// Two members of the desirable family whose midpoint is not a member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub case: WitnessCase,
    pub p: f64,
    pub beta: Option<f64>,
    pub desirable: Vec<usize>,
    pub undesirable: Vec<usize>,
    pub z_first: Vec<f64>,
    pub z_second: Vec<f64>,
    pub midpoint: Vec<f64>,
    /// Membership of (first, second, midpoint).
    pub memberships: [bool; 3],
    pub notes: String,
}

/// Evaluates the fixed non-convexity witness for the ℓ1 or ℓp case.
///
/// Points live in contribution space and use unit cost weights. Features are
/// numbered from 1 in the report, matching how the witnesses are usually
/// written down.
pub fn nonconvexity_witness(case: WitnessCase) -> WitnessRecord {
    let (z1, z2, desirable, p, beta): (Vec<f64>, Vec<f64>, Vec<bool>, f64, Option<f64>) = match case
    {
        WitnessCase::L1 => (
            vec![4.0, 7.0, 3.0, 6.0],
            vec![7.0, 4.0, 3.0, 6.0],
            vec![true, true, false, false],
            1.0,
            None,
        ),
        WitnessCase::Lp => (
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![true, true, false],
            2.0,
            Some(std::f64::consts::FRAC_1_SQRT_2),
        ),
    };
    let partition = Partition::new(desirable);
    let weights = vec![1.0; z1.len()];
    let mid: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| 0.5 * (a + b)).collect();
    let member = |z: &[f64]| match beta {
        None => check_l1_desirability(z, &weights, &partition),
        Some(b) => check_lp_desirability(z, &weights, p, &partition, b)
            .expect("witness parameters are valid"),
    };
    let memberships = [member(&z1), member(&z2), member(&mid)];
    let notes = match case {
        WitnessCase::L1 => {
            "strict bang-per-buck dominance of a desirable feature, unit costs".to_string()
        }
        WitnessCase::Lp => {
            "||z_D||_2 >= beta/sqrt(1-beta^2) ||z_U||_2 at p = 2, beta = 1/sqrt(2)".to_string()
        }
    };
    WitnessRecord {
        case,
        p,
        beta,
        desirable: partition.desirable().map(|f| f + 1).collect(),
        undesirable: partition.undesirable().map(|f| f + 1).collect(),
        z_first: z1,
        z_second: z2,
        midpoint: mid,
        memberships,
        notes,
    }
}
