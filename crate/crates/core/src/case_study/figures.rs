//! Plot data for the case-study figures: one CSV per panel. Rendering is
//! left to external tools.

use rayon::prelude::*;
use serde::Serialize;

use super::sweep::{run_sweep, solve_cell, write_sweep_csv, SweepConfig};
use super::{build_cvd_graph, reproduce_table_mu, table_mu_csv, ClassifierName};
use crate::agent_model::Partition;
use crate::error::Result;
use crate::format::float;
use crate::incomplete_info::model3::{default_grid, find_nonconcavity, scan_model3, NonConcavity};

/// A named output file held in memory until the caller writes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePanel {
    pub name: String,
    pub x_label: String,
    pub x: Vec<f64>,
    /// Column name and one value per `x`; `None` marks an infeasible point.
    pub series: Vec<(String, Vec<Option<f64>>)>,
}

impl FigurePanel {
    pub fn to_csv(&self) -> String {
        let mut out = self.x_label.clone();
        for (name, _) in &self.series {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, x) in self.x.iter().enumerate() {
            out.push_str(&float(*x));
            for (_, ys) in &self.series {
                out.push(',');
                if let Some(y) = ys[i] {
                    out.push_str(&float(y));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn artifact(&self) -> Artifact {
        Artifact {
            name: format!("{}.csv", self.name),
            contents: self.to_csv(),
        }
    }
}

/// `start, start+step, …` up to `end` inclusive, computed as `k·step` to
/// avoid drift.
fn grid(step: f64, end: f64) -> Vec<f64> {
    let n = (end / step).round() as usize;
    (1..=n).map(|k| k as f64 * step).collect()
}

fn beta_series(
    xs: &[f64],
    cell: impl Fn(ClassifierName, f64) -> Option<f64> + Sync,
) -> Vec<(String, Vec<Option<f64>>)> {
    ClassifierName::ALL
        .into_iter()
        .map(|k| (k.to_string(), xs.par_iter().map(|&x| cell(k, x)).collect()))
        .collect()
}

/// β against `σ ∈ {0.05, 0.10, …, 3}` at `α = 1`, one panel per `δ ∈ {0.1, 0.3, 0.5}`.
pub fn figure3_panels() -> Vec<FigurePanel> {
    let graph = build_cvd_graph();
    let (c, partition) = (graph.contribution(), Partition::from_graph(&graph));
    let sigmas = grid(0.05, 3.0);
    [0.1, 0.3, 0.5]
        .into_iter()
        .map(|delta| FigurePanel {
            name: format!("fig3_beta_vs_sigma_delta{}", float(delta)),
            x_label: "sigma".into(),
            series: beta_series(&sigmas, |k, s| {
                solve_cell(&c, &partition, k, 1.0, s, delta).beta
            }),
            x: sigmas.clone(),
        })
        .collect()
}

/// β against `δ ∈ {0.01, …, 0.5}`, one panel per `(α, σ)` in `{1, 10} × {3, 1, 0.1}`.
pub fn figure4_panels() -> Vec<FigurePanel> {
    let graph = build_cvd_graph();
    let (c, partition) = (graph.contribution(), Partition::from_graph(&graph));
    let deltas = grid(0.01, 0.5);
    let mut panels = Vec::new();
    for alpha in [1.0, 10.0] {
        for sigma in [3.0, 1.0, 0.1] {
            panels.push(FigurePanel {
                name: format!(
                    "fig4_beta_vs_delta_alpha{}_sigma{}",
                    float(alpha),
                    float(sigma)
                ),
                x_label: "delta".into(),
                series: beta_series(&deltas, |k, d| {
                    solve_cell(&c, &partition, k, alpha, sigma, d).beta
                }),
                x: deltas.clone(),
            });
        }
    }
    panels
}

/// Monte-Carlo pass probability of the scalar Model-3 instance on
/// `e ∈ {0.1, …, 20}` at `α = 1`, plus the strongest concavity violation.
pub fn figure6_panel(samples: usize, seed: u64) -> Result<(FigurePanel, Option<NonConcavity>)> {
    let scan = scan_model3(&default_grid(), 1.0, samples, seed)?;
    let panel = FigurePanel {
        name: "fig6_model3_pass_probability".into(),
        x_label: "effort".into(),
        x: scan.iter().map(|s| s.e).collect(),
        series: vec![
            (
                "probability".into(),
                scan.iter().map(|s| Some(s.estimate.p)).collect(),
            ),
            (
                "std_error".into(),
                scan.iter().map(|s| Some(s.estimate.se)).collect(),
            ),
        ],
    };
    Ok((panel, find_nonconcavity(&scan)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseStudyOptions {
    pub seed: u64,
    /// Monte-Carlo samples per effort level for the Model-3 panel.
    pub mc_samples: usize,
}

impl Default for CaseStudyOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            mc_samples: 1_000_000,
        }
    }
}

/// Every case-study output: the mean-contribution table, the default sweep,
/// and all figure panels.
pub fn case_study_artifacts(options: &CaseStudyOptions) -> Result<Vec<Artifact>> {
    let mut out = vec![Artifact {
        name: "table_mu.csv".into(),
        contents: table_mu_csv(&reproduce_table_mu()),
    }];
    let config = SweepConfig {
        seed: options.seed,
        ..SweepConfig::default()
    };
    out.push(Artifact {
        name: "sweep_results.csv".into(),
        contents: write_sweep_csv(&run_sweep(&config)?),
    });
    out.extend(figure3_panels().iter().map(FigurePanel::artifact));
    out.extend(figure4_panels().iter().map(FigurePanel::artifact));
    let (panel, witness) = figure6_panel(options.mc_samples, options.seed)?;
    out.push(panel.artifact());
    let witness = witness.map(|w| NonConcavity {
        e1: crate::format::round(w.e1),
        e2: crate::format::round(w.e2),
        midpoint: crate::format::round(w.midpoint),
        f1: crate::format::round(w.f1),
        f2: crate::format::round(w.f2),
        f_mid: crate::format::round(w.f_mid),
        gap: crate::format::round(w.gap),
        se: crate::format::round(w.se),
        z: crate::format::round(w.z),
    });
    out.push(Artifact {
        name: "fig6_nonconcavity.json".into(),
        contents: serde_json::to_string_pretty(&witness).expect("plain data serializes") + "\n",
    });
    Ok(out)
}
