//! Minimum weighted-ℓ1 effort under the chance constraint.
//!
//! Without uncertainty an ℓ1-optimal agent touches a single feature. With
//! uncertainty, spreading effort across features that have independent noise
//! shrinks the variance penalty. The optimum can therefore have wider
//! support, and no closed form exists in general.
//!
//! The feasible set is a cone shifted by `α`, so the problem is homogeneous.
//! In `u = c∘e` coordinates the minimum cost is `α / h*`, where
//! `h* = max_{‖u‖₁ ≤ 1} μ̃ᵀu − q·‖Σ̃^{1/2}u‖` with `μ̃ = μ/c` and
//! `Σ̃ = D⁻¹ΣD⁻¹`. This concave maximisation is solved by projected gradient
//! ascent with Armijo backtracking. The result is then certified against
//! the budget-bisection oracle.

use serde::Serialize;

use super::belief::ContributionBelief;
use super::chance::{chance_margin, feasibility_general};
use super::oracle::budget_bisection_oracle;
use super::projection::project_l1_ball;
use crate::agent_model::{check_delta, CostModel, EffortProfile};
use crate::complete_info::best_response_l1;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, std_normal_quantile, Matrix};

const MAX_ITERATIONS: usize = 20_000;
const STEP_TOL: f64 = 1e-15;
const ARMIJO: f64 = 1e-4;
/// Relative slack allowed above the oracle's cost.
pub const CERTIFICATE_TOL: f64 = 1e-4;
/// Bisection tolerance used for the certifying oracle run.
const ORACLE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChanceL1Solution {
    pub effort: EffortProfile,
    pub cost: f64,
    pub margin: f64,
    pub iterations: usize,
    /// Cost of the certifying oracle run; absent when the problem reduced to
    /// the single-feature complete-information solution.
    pub oracle_cost: Option<f64>,
}

struct Ascent<'a> {
    mu: Vec<f64>,
    sigma: &'a Matrix,
    q: f64,
}

impl Ascent<'_> {
    fn spread(&self, u: &[f64]) -> f64 {
        dot(u, &self.sigma.mul_vec(u).expect("square"))
            .max(0.0)
            .sqrt()
    }

    fn value(&self, u: &[f64]) -> f64 {
        dot(&self.mu, u) - self.q * self.spread(u)
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let spread = self.spread(u);
        if spread == 0.0 {
            return self.mu.clone();
        }
        let su = self.sigma.mul_vec(u).expect("square");
        self.mu
            .iter()
            .zip(su)
            .map(|(m, s)| m - self.q * s / spread)
            .collect()
    }

    /// Best signed vertex of the ℓ1 ball.
    fn corner(&self) -> Vec<f64> {
        let d = self.mu.len();
        let mut best = (f64::NEG_INFINITY, vec![0.0; d]);
        for f in 0..d {
            for sign in [1.0, -1.0] {
                let mut u = vec![0.0; d];
                u[f] = sign;
                let v = self.value(&u);
                if v > best.0 {
                    best = (v, u);
                }
            }
        }
        best.1
    }

    fn maximise(&self) -> (Vec<f64>, f64, usize) {
        let mut u = self.corner();
        let mut val = self.value(&u);
        let mut eta = 1.0;
        let mut iterations = 0;
        for it in 1..=MAX_ITERATIONS {
            iterations = it;
            let grad = self.gradient(&u);
            let mut accepted = None;
            for _ in 0..80 {
                let cand = project_l1_ball(
                    &u.iter()
                        .zip(&grad)
                        .map(|(x, g)| x + eta * g)
                        .collect::<Vec<_>>(),
                    1.0,
                );
                let cv = self.value(&cand);
                let dir: f64 = grad
                    .iter()
                    .zip(cand.iter().zip(&u))
                    .map(|(g, (c, x))| g * (c - x))
                    .sum();
                if cv >= val + ARMIJO * dir {
                    accepted = Some((cand, cv));
                    break;
                }
                eta *= 0.5;
            }
            let Some((cand, cv)) = accepted else { break };
            let step = cand
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            u = cand;
            val = cv;
            if step < STEP_TOL {
                break;
            }
            eta = (eta * 2.0).min(1e6);
        }
        (u, val, iterations)
    }
}

/// Minimum weighted-ℓ1 chance-feasible effort, certified against the oracle.
pub fn best_response_chance_l1(
    belief: &ContributionBelief,
    weights: &[f64],
    alpha: f64,
    delta: f64,
) -> Result<ChanceL1Solution> {
    check_delta(delta)?;
    check_dim(belief.dim(), weights.len())?;
    let model = CostModel::new(1.0, weights.to_vec())?;
    let d = belief.dim();
    if alpha <= 0.0 {
        let e = vec![0.0; d];
        return Ok(ChanceL1Solution {
            margin: chance_margin(belief, &e, alpha, delta)?,
            effort: EffortProfile::zeros(d),
            cost: 0.0,
            iterations: 0,
            oracle_cost: None,
        });
    }
    let verdict = feasibility_general(belief, alpha, delta)?;
    if !verdict.feasible {
        return Err(Error::Infeasible {
            threshold_delta: Some(verdict.threshold_delta),
        });
    }
    let q = -std_normal_quantile(delta)?;
    if q == 0.0 || belief.sigma.as_matrix().max_abs() == 0.0 {
        // The penalty vanishes: the single best bang-per-buck feature is optimal.
        let e = best_response_l1(&belief.mu, weights, alpha)?;
        return Ok(ChanceL1Solution {
            cost: model.cost(&e)?,
            margin: chance_margin(belief, &e, alpha, delta)?,
            effort: e,
            iterations: 0,
            oracle_cost: None,
        });
    }
    let mut sigma = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            sigma[(i, j)] = belief.sigma[(i, j)] / (weights[i] * weights[j]);
        }
    }
    let ascent = Ascent {
        mu: belief.mu.iter().zip(weights).map(|(m, c)| m / c).collect(),
        sigma: &sigma,
        q,
    };
    let (u, h, iterations) = ascent.maximise();
    if !(h > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "ascent ended at a non-positive score gain {h:e}"
        )));
    }
    let e: Vec<f64> = u
        .iter()
        .zip(weights)
        .map(|(u, c)| alpha / h * u / c)
        .collect();
    let cost = model.cost(&e)?;
    let margin = chance_margin(belief, &e, alpha, delta)?;
    if margin > 1e-8 * (1.0 + alpha) {
        return Err(Error::NumericalFailure(format!(
            "solution violates the constraint by {margin:e}"
        )));
    }
    let oracle = budget_bisection_oracle(belief, &model, alpha, delta, ORACLE_TOL)?;
    if cost > oracle.cost * (1.0 + CERTIFICATE_TOL) {
        return Err(Error::NumericalFailure(format!(
            "solver cost {cost} exceeds the oracle's {} beyond tolerance",
            oracle.cost
        )));
    }
    Ok(ChanceL1Solution {
        effort: EffortProfile::new(e)?,
        cost,
        margin,
        iterations,
        oracle_cost: Some(oracle.cost),
    })
}
