//! The cardiovascular-disease case study.
//!
//! Eight features form a bipartite causal graph. The four lifestyle habits
//! (Alcohol, Diet, Activity, Smoking) are desirable and unobservable. The
//! four clinical markers (DM, HPL, HPT, Obesity) are undesirable and
//! observable. Edge weights come from expert fuzzy scores. Each classifier
//! puts unit weight on one marker. The agent is unsure of the classifier:
//! it has variance `σ²` on each marker coordinate and none elsewhere.
//!
//! The graph ships as `data/cvd_graph.json`. The fuzzy-score fixture
//! `data/cvd_fuzzy_scores.csv` rebuilds the same graph through
//! [`graph_from_fuzzy_scores`], which keeps the ingestion path honest.

pub mod figures;
pub mod sweep;

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent_model::Partition;
use crate::causal_graph::{CausalGraph, Edge, Feature};
use crate::error::{Error, Result};
use crate::incomplete_info::{belief_model1, GaussianPrior};
use crate::numerics::SymMatrix;

pub use figures::{
    case_study_artifacts, figure3_panels, figure4_panels, figure6_panel, Artifact,
    CaseStudyOptions, FigurePanel,
};
pub use sweep::{run_sweep, solve_cell, write_sweep_csv, SweepConfig, SweepRow, SWEEP_CSV_HEADER};

const GRAPH_JSON: &str = include_str!("../../data/cvd_graph.json");

/// The fuzzy-score fixture the shipped graph was generated from.
pub const FUZZY_SCORES_CSV: &str = include_str!("../../data/cvd_fuzzy_scores.csv");

/// Feature order used throughout: desirable habits first, then markers.
pub const CVD_FEATURES: [&str; 8] = [
    "Alcohol", "Diet", "Activity", "Smoking", "DM", "HPL", "HPT", "Obesity",
];

/// Number of leading desirable features.
pub const DESIRABLE_COUNT: usize = 4;

pub fn cvd_features() -> Vec<Feature> {
    CVD_FEATURES
        .iter()
        .enumerate()
        .map(|(i, name)| Feature {
            name: (*name).to_string(),
            desirable: i < DESIRABLE_COUNT,
        })
        .collect()
}

/// Maps an expert fuzzy score to an edge weight. Scores at or below `1/2`
/// mean the experts do not agree the link is causal, so there is no edge.
/// Above `1/2` the map is linear, sending `1/2 ↦ 0` and `1 ↦ 1`.
pub fn fuzzy_to_weight(score: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::Domain(format!(
            "fuzzy score must lie in [0, 1], got {score}"
        )));
    }
    Ok((score > 0.5).then_some(2.0 * score - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyScore {
    pub src: String,
    pub dst: String,
    pub score: f64,
}

/// Parses a `src,dst,score` CSV.
pub fn read_fuzzy_scores(reader: impl Read) -> Result<Vec<FuzzyScore>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|row| row.map_err(|e| Error::Schema(format!("fuzzy-score CSV: {e}"))))
        .collect()
}

/// Builds a graph over `features` from fuzzy scores, dropping non-causal links.
pub fn graph_from_fuzzy_scores(
    features: Vec<Feature>,
    scores: &[FuzzyScore],
) -> Result<CausalGraph> {
    let lookup = |name: &str| {
        features.iter().position(|f| f.name == name).ok_or_else(|| {
            Error::Schema(format!("fuzzy score references unknown feature {name:?}"))
        })
    };
    let mut edges = Vec::new();
    for row in scores {
        let (src, dst) = (lookup(&row.src)?, lookup(&row.dst)?);
        if let Some(weight) = fuzzy_to_weight(row.score)? {
            edges.push(Edge { src, dst, weight });
        }
    }
    CausalGraph::new(features, edges)
}

/// The shipped eight-feature graph.
pub fn build_cvd_graph() -> CausalGraph {
    CausalGraph::from_json_str(GRAPH_JSON).expect("bundled graph is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierName {
    #[serde(rename = "DM")]
    Dm,
    #[serde(rename = "HPL")]
    Hpl,
    #[serde(rename = "HPT")]
    Hpt,
    Obesity,
}

impl ClassifierName {
    pub const ALL: [ClassifierName; 4] = [Self::Dm, Self::Hpl, Self::Hpt, Self::Obesity];

    /// Index of the marker this classifier weighs.
    pub fn feature_index(self) -> usize {
        DESIRABLE_COUNT
            + match self {
                Self::Dm => 0,
                Self::Hpl => 1,
                Self::Hpt => 2,
                Self::Obesity => 3,
            }
    }

    pub fn as_str(self) -> &'static str {
        CVD_FEATURES[self.feature_index()]
    }
}

impl fmt::Display for ClassifierName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownClassifier(s.to_string()))
    }
}

/// One-hot mean on the named marker; covariance `Diag(0,0,0,0,σ²,σ²,σ²,σ²)`.
pub fn build_classifier_prior(name: ClassifierName, sigma: f64) -> Result<GaussianPrior> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!(
            "sigma must be finite and non-negative, got {sigma}"
        )));
    }
    let d = CVD_FEATURES.len();
    let mut mean = vec![0.0; d];
    mean[name.feature_index()] = 1.0;
    let var: Vec<f64> = (0..d)
        .map(|i| {
            if i < DESIRABLE_COUNT {
                0.0
            } else {
                sigma * sigma
            }
        })
        .collect();
    GaussianPrior::new(mean, SymMatrix::from_diag(&var))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableMuRow {
    pub classifier: ClassifierName,
    pub mu: Vec<f64>,
    pub l2_desirable: f64,
    pub l2_undesirable: f64,
}

/// Mean contribution `C μ_h` for each classifier with its desirable and
/// undesirable ℓ2 norms.
pub fn reproduce_table_mu() -> Vec<TableMuRow> {
    let graph = build_cvd_graph();
    let c = graph.contribution();
    let partition = Partition::from_graph(&graph);
    ClassifierName::ALL
        .into_iter()
        .map(|classifier| {
            let prior = build_classifier_prior(classifier, 0.0).expect("σ = 0 is valid");
            let mu = belief_model1(&c, &prior).expect("dimensions agree").mu;
            let (l2_desirable, l2_undesirable) = partition.split_norms(&mu);
            TableMuRow {
                classifier,
                mu,
                l2_desirable,
                l2_undesirable,
            }
        })
        .collect()
}

/// `table_mu.csv`: one row per classifier, feature columns then the two norms.
pub fn table_mu_csv(rows: &[TableMuRow]) -> String {
    let mut out = format!(
        "classifier,{},l2_desirable,l2_undesirable\n",
        CVD_FEATURES.join(",")
    );
    for row in rows {
        let cells: Vec<String> = row.mu.iter().map(|v| crate::format::float(*v)).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.classifier,
            cells.join(","),
            crate::format::float(row.l2_desirable),
            crate::format::float(row.l2_undesirable)
        ));
    }
    out
}
