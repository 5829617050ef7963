//! Solver-independent reference for chance-constrained effort under any
//! weighted ℓp cost.
//!
//! The outer loop bisects on the cost budget `t`. For each budget, the
//! inner loop minimises the convex constraint function `g` over the ball
//! `{Cost(e) ≤ t}` by projected subgradient descent. A budget is accepted
//! once some iterate reaches `g ≤ 0`. The work happens in the rescaled
//! coordinates `u_f = c_f^{1/p} e_f`, where the cost ball becomes an
//! ordinary ℓp ball.
//!
//! Slow but simple: every budget the oracle accepts comes with an explicit
//! feasible witness, so the reported cost is an upper bound on the optimum
//! that tightens as `tol` shrinks.

use serde::Serialize;

use super::belief::ContributionBelief;
use super::chance::{chance_margin, feasibility_general};
use super::projection::project_lp_ball;
use crate::agent_model::{check_delta, CostModel, EffortProfile};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, norm2, std_normal_quantile, Matrix};

/// Inner projected-subgradient iterations per budget.
pub const INNER_ITERATIONS: usize = 5000;

/// Doublings of the budget allowed while searching for a feasible upper bound.
const MAX_DOUBLINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub effort: EffortProfile,
    pub cost: f64,
    pub margin: f64,
    /// Largest budget proven (heuristically) insufficient.
    pub budget_lower: f64,
    /// Smallest budget with a feasible witness.
    pub budget_upper: f64,
}

struct Scaled {
    mu: Vec<f64>,
    sigma: Matrix,
    q: f64,
    alpha: f64,
    p: f64,
}

impl Scaled {
    fn g(&self, u: &[f64]) -> f64 {
        self.alpha - dot(&self.mu, u) + self.q * self.spread(u)
    }

    fn spread(&self, u: &[f64]) -> f64 {
        let su = self
            .sigma
            .mul_vec(u)
            .expect("dimensions fixed at construction");
        dot(u, &su).max(0.0).sqrt()
    }

    fn subgradient(&self, u: &[f64]) -> Vec<f64> {
        let spread = self.spread(u);
        if self.q > 0.0 && spread > 0.0 {
            let su = self
                .sigma
                .mul_vec(u)
                .expect("dimensions fixed at construction");
            self.mu
                .iter()
                .zip(su)
                .map(|(m, s)| -m + self.q * s / spread)
                .collect()
        } else {
            self.mu.iter().map(|m| -m).collect()
        }
    }

    /// Best point found over the budget-`t` ball, stopping as soon as `g ≤ 0`.
    fn inner(&self, t: f64) -> (Vec<f64>, f64) {
        let mut u = vec![0.0; self.mu.len()];
        let mut best = (u.clone(), self.g(&u));
        for k in 1..=INNER_ITERATIONS {
            let s = self.subgradient(&u);
            let sn = norm2(&s);
            if sn == 0.0 {
                break;
            }
            let step = t / (k as f64).sqrt() / sn;
            let moved: Vec<f64> = u.iter().zip(&s).map(|(x, g)| x - step * g).collect();
            u = project_lp_ball(&moved, t, self.p);
            let val = self.g(&u);
            if val < best.1 {
                best = (u.clone(), val);
            }
            if val <= 0.0 {
                break;
            }
        }
        best
    }
}

/// Dual exponent `p/(p−1)` norm of `v`, a lower bound scale for the budget.
fn dual_norm(v: &[f64], p: f64) -> f64 {
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if p == 1.0 || top == 0.0 {
        return top;
    }
    let r = p / (p - 1.0);
    top * v
        .iter()
        .map(|x| (x.abs() / top).powf(r))
        .sum::<f64>()
        .powf(1.0 / r)
}

/// Minimum-cost chance-feasible effort by budget bisection. The returned
/// cost lies within `tol·(1 + cost)` of the optimum, and the returned effort
/// satisfies `g(e) ≤ 0`.
pub fn budget_bisection_oracle(
    belief: &ContributionBelief,
    model: &CostModel,
    alpha: f64,
    delta: f64,
    tol: f64,
) -> Result<OracleResult> {
    check_delta(delta)?;
    check_dim(belief.dim(), model.dim())?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let d = belief.dim();
    if alpha <= 0.0 {
        let e = vec![0.0; d];
        return Ok(OracleResult {
            margin: chance_margin(belief, &e, alpha, delta)?,
            effort: EffortProfile::zeros(d),
            cost: 0.0,
            budget_lower: 0.0,
            budget_upper: 0.0,
        });
    }
    let verdict = feasibility_general(belief, alpha, delta)?;
    if !verdict.feasible {
        return Err(Error::Infeasible {
            threshold_delta: Some(verdict.threshold_delta),
        });
    }
    let p = model.p();
    let scale: Vec<f64> = model.weights().iter().map(|c| c.powf(1.0 / p)).collect();
    let mut sigma = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            sigma[(i, j)] = belief.sigma[(i, j)] / (scale[i] * scale[j]);
        }
    }
    let problem = Scaled {
        mu: belief.mu.iter().zip(&scale).map(|(m, s)| m / s).collect(),
        sigma,
        q: -std_normal_quantile(delta)?,
        alpha,
        p,
    };

    // Without uncertainty the optimum costs exactly α/‖μ̂‖_{p*}; the
    // uncertainty penalty can only raise it.
    let mut lo = alpha / dual_norm(&problem.mu, p);
    let mut hi = lo;
    let mut witness = None;
    for _ in 0..=MAX_DOUBLINGS {
        let (u, val) = problem.inner(hi);
        if val <= 0.0 {
            witness = Some(u);
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    let Some(mut witness) = witness else {
        return Err(Error::IterationLimit(MAX_DOUBLINGS));
    };
    while hi - lo > tol * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        let (u, val) = problem.inner(mid);
        if val <= 0.0 {
            hi = mid;
            witness = u;
        } else {
            lo = mid;
        }
    }
    let e: Vec<f64> = witness.iter().zip(&scale).map(|(u, s)| u / s).collect();
    Ok(OracleResult {
        cost: model.cost(&e)?,
        margin: chance_margin(belief, &e, alpha, delta)?,
        effort: EffortProfile::new(e)?,
        budget_lower: lo,
        budget_upper: hi,
    })
}
