//! Effort profiles, weighted ℓp effort cost and β-desirability.

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::causal_graph::CausalGraph;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{norm2, std_normal_quantile};

/// Weighted ℓp cost `(Σ_f c_f |e_f|^p)^{1/p}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostModel {
    p: f64,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostFile {
    p: f64,
    #[serde(default)]
    weights: BTreeMap<String, f64>,
}

impl CostModel {
    pub fn new(p: f64, weights: Vec<f64>) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::Domain(format!(
                "cost exponent must be a finite p >= 1, got {p}"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Domain(format!(
                "cost weights must be finite and positive, got {w}"
            )));
        }
        Ok(Self { p, weights })
    }

    pub fn unweighted(p: f64, dim: usize) -> Result<Self> {
        Self::new(p, vec![1.0; dim])
    }

    /// Parses `{"p": .., "weights": {name: c}}`; features not listed get weight 1.
    pub fn from_json_str(s: &str, graph: &CausalGraph) -> Result<Self> {
        let file: CostFile =
            serde_json::from_str(s).map_err(|e| Error::Schema(format!("cost JSON: {e}")))?;
        let mut weights = vec![1.0; graph.dim()];
        for (name, w) in file.weights {
            let i = graph.index_of(&name).ok_or_else(|| {
                Error::Schema(format!("cost weight for unknown feature {name:?}"))
            })?;
            weights[i] = w;
        }
        Self::new(file.p, weights)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn cost(&self, e: &[f64]) -> Result<f64> {
        check_dim(self.dim(), e.len())?;
        let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Ok(0.0);
        }
        if self.p == 1.0 {
            return Ok(self.weights.iter().zip(e).map(|(c, x)| c * x.abs()).sum());
        }
        // Factor out the largest magnitude so |e_f|^p cannot overflow.
        let sum: f64 = self
            .weights
            .iter()
            .zip(e)
            .map(|(c, x)| c * (x.abs() / scale).powf(self.p))
            .sum();
        Ok(scale * sum.powf(1.0 / self.p))
    }
}

/// Exogenous effort, one entry per feature in graph order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EffortProfile(Vec<f64>);

impl EffortProfile {
    pub fn new(e: Vec<f64>) -> Result<Self> {
        if e.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("effort entries must be finite".into()));
        }
        Ok(Self(e))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_vec_unchecked(e: Vec<f64>) -> Self {
        Self(e)
    }
}

impl Deref for EffortProfile {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Desirable/undesirable split of the features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    desirable: Vec<bool>,
}

impl Partition {
    pub fn new(desirable: Vec<bool>) -> Self {
        Self { desirable }
    }

    pub fn from_graph(graph: &CausalGraph) -> Self {
        Self::new(graph.features().iter().map(|f| f.desirable).collect())
    }

    pub fn dim(&self) -> usize {
        self.desirable.len()
    }

    pub fn is_desirable(&self, f: usize) -> bool {
        self.desirable[f]
    }

    pub fn desirable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&f| self.desirable[f])
    }

    pub fn undesirable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&f| !self.desirable[f])
    }

    /// ℓ2 norms of the desirable and undesirable parts of `v`.
    pub fn split_norms(&self, v: &[f64]) -> (f64, f64) {
        let d: f64 = self.desirable().map(|f| v[f] * v[f]).sum();
        let u: f64 = self.undesirable().map(|f| v[f] * v[f]).sum();
        (d.sqrt(), u.sqrt())
    }
}

/// Achieved desirability `‖e_D‖₂ / ‖e‖₂`.
pub fn beta_of(e: &[f64], partition: &Partition) -> Result<f64> {
    check_dim(partition.dim(), e.len())?;
    // Rescale first so tiny or huge profiles neither underflow nor overflow.
    let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::ZeroEffort);
    }
    let scaled: Vec<f64> = e.iter().map(|x| x / scale).collect();
    let (d, _) = partition.split_norms(&scaled);
    Ok((d / norm2(&scaled)).clamp(0.0, 1.0))
}

/// Whether `e` is β-desirable (inclusive: `beta_of(e) ≥ β`).
pub fn is_beta_desirable(e: &[f64], partition: &Partition, beta: f64) -> Result<bool> {
    check_beta(beta)?;
    Ok(beta_of(e, partition)? >= beta)
}

/// Desirability levels live in `(0, 1]`.
pub fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "beta must lie in (0, 1], got {beta}"
        )))
    }
}

/// Score shortfall `alpha` and failure tolerance `delta` faced by an agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub alpha: f64,
    pub delta: f64,
}

impl Scenario {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
        }
        check_delta(delta)?;
        Ok(Self { alpha, delta })
    }

    /// Probit coefficient `p_δ = Φ⁻¹(δ) ≤ 0`.
    pub fn p_delta(&self) -> f64 {
        std_normal_quantile(self.delta).expect("delta validated on construction")
    }
}

/// Chance-constrained solvers accept only `δ ∈ (0, 0.5]`, where the
/// reformulated constraint is convex.
pub fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "failure tolerance delta must lie in (0, 0.5], got {delta}"
        )))
    }
}
