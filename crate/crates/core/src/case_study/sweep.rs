//! Grid sweeps over classifier, `α`, `σ` and `δ`.
//!
//! Every cell builds the classifier prior and pushes it through the known
//! graph to get a Gaussian belief. It then classifies feasibility and solves
//! for the minimum-ℓ2 chance-feasible effort. Cells are independent and run
//! in parallel, and rows come back in configuration order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_classifier_prior, build_cvd_graph, ClassifierName};
use crate::agent_model::{beta_of, check_delta, Partition};
use crate::causal_graph::ContributionMatrix;
use crate::error::{Error, Result};
use crate::format::float;
use crate::incomplete_info::{belief_model1, best_response_chance_l2, feasibility_general};

pub const SWEEP_CSV_HEADER: &str = "classifier,alpha,sigma,delta,feasible,beta,cost";

fn default_classifiers() -> Vec<ClassifierName> {
    ClassifierName::ALL.to_vec()
}
fn default_sigmas() -> Vec<f64> {
    vec![0.1, 0.5, 1.0, 2.0, 3.0]
}
fn default_deltas() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5]
}
fn default_alphas() -> Vec<f64> {
    vec![1.0, 10.0]
}
fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierName>,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Recorded for provenance; the Model-1 sweep itself is exact and draws
    /// no random numbers.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            classifiers: default_classifiers(),
            sigmas: default_sigmas(),
            deltas: default_deltas(),
            alphas: default_alphas(),
            seed: default_seed(),
        }
    }
}

impl SweepConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(s).map_err(|e| Error::Schema(format!("sweep config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Non-empty lists, `σ ≥ 0`, `δ ∈ (0, 1/2]`, `α > 0`.
    pub fn validate(&self) -> Result<()> {
        let schema = |msg: String| Err(Error::Schema(msg));
        if self.classifiers.is_empty()
            || self.sigmas.is_empty()
            || self.deltas.is_empty()
            || self.alphas.is_empty()
        {
            return schema("sweep lists must be non-empty".into());
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return schema(format!("sigma must be finite and non-negative, got {s}"));
        }
        if let Some(d) = self.deltas.iter().find(|d| check_delta(**d).is_err()) {
            return schema(format!("delta must lie in (0, 0.5], got {d}"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return schema(format!("alpha must be finite and positive, got {a}"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.classifiers.len() * self.alphas.len() * self.sigmas.len() * self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub classifier: ClassifierName,
    pub alpha: f64,
    pub sigma: f64,
    pub delta: f64,
    pub feasible: bool,
    /// Present iff `feasible`.
    pub beta: Option<f64>,
    /// `‖e⋆‖₂`, present iff `feasible`.
    pub cost: Option<f64>,
    /// `δ*` for this belief.
    pub threshold_delta: f64,
    /// Solver diagnostics when a feasible cell still failed to solve.
    pub note: Option<String>,
}

/// Solves one cell of the grid. Failures are recorded in the row.
pub fn solve_cell(
    c: &ContributionMatrix,
    partition: &Partition,
    classifier: ClassifierName,
    alpha: f64,
    sigma: f64,
    delta: f64,
) -> SweepRow {
    let mut row = SweepRow {
        classifier,
        alpha,
        sigma,
        delta,
        feasible: false,
        beta: None,
        cost: None,
        threshold_delta: f64::NAN,
        note: None,
    };
    let outcome = (|| -> Result<(f64, f64, f64)> {
        let belief = belief_model1(c, &build_classifier_prior(classifier, sigma)?)?;
        let threshold = feasibility_general(&belief, alpha, delta)?.threshold_delta;
        row.threshold_delta = threshold;
        let solution = best_response_chance_l2(&belief, alpha, delta)?;
        Ok((
            beta_of(&solution.effort, partition)?,
            solution.cost,
            threshold,
        ))
    })();
    match outcome {
        Ok((beta, cost, _)) => {
            row.feasible = true;
            row.beta = Some(beta);
            row.cost = Some(cost);
        }
        Err(Error::Infeasible { .. }) => {}
        Err(e) => row.note = Some(e.to_string()),
    }
    row
}

/// Runs every `(classifier, α, σ, δ)` cell on the shipped graph, in that
/// nesting order, using the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let graph = build_cvd_graph();
    let c = graph.contribution();
    let partition = Partition::from_graph(&graph);
    let mut cells = Vec::with_capacity(config.len());
    for &classifier in &config.classifiers {
        for &alpha in &config.alphas {
            for &sigma in &config.sigmas {
                for &delta in &config.deltas {
                    cells.push((classifier, alpha, sigma, delta));
                }
            }
        }
    }
    Ok(cells
        .into_par_iter()
        .map(|(k, a, s, d)| solve_cell(&c, &partition, k, a, s, d))
        .collect())
}

/// Rows as CSV under [`SWEEP_CSV_HEADER`]; infeasible cells leave `beta`
/// and `cost` empty.
pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.classifier,
            float(r.alpha),
            float(r.sigma),
            float(r.delta),
            r.feasible,
            opt(r.beta),
            opt(r.cost)
        ));
    }
    out
}
