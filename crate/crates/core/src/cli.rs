//! The `stratcls` command line.
//!
//! Each subcommand reads and validates all of its input files before doing
//! any work. Output files are written atomically: the data goes to a
//! temporary file in the target directory, which is then renamed. Floats
//! are printed with 12 significant digits.
//!
//! | exit | meaning                                           |
//! |------|---------------------------------------------------|
//! | 0    | success                                           |
//! | 1    | I/O failure while writing output                  |
//! | 2    | malformed or out-of-contract input                |
//! | 3    | invalid graph (cycle, self-loop, depth)           |
//! | 4    | the chance constraint cannot be met               |
//! | 5    | numerical failure                                 |

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::agent_model::{beta_of, CostModel, EffortProfile, Partition};
use crate::case_study::{
    case_study_artifacts, run_sweep, write_sweep_csv, CaseStudyOptions, SweepConfig,
};
use crate::causal_graph::CausalGraph;
use crate::complete_info::best_response;
use crate::design_audit::{audit_classifier, nonconvexity_witness, WitnessCase};
use crate::error::{check_dim, Error};
use crate::format;
use crate::incomplete_info::{
    belief_model1, belief_model2_linear, belief_monte_carlo, best_response_chance_l1,
    best_response_chance_l2, budget_bisection_oracle, chance_margin, feasibility,
    feasibility_general, ContributionBelief, GaussianPrior, Provenance, Sampler,
};
use crate::numerics::{dot, SymMatrix};

/// Largest constraint violation `respond --verify` accepts.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

/// Bisection tolerance when `respond` falls back to the oracle (ℓp, `p ∉ {1, 2}`).
const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "stratcls",
    version,
    about = "Strategic responses over weighted causal feature graphs"
)]
pub struct Cli {
    /// Base seed for every Monte-Carlo step.
    #[arg(long, env = "STRATCLS_SEED", default_value_t = 42, global = true)]
    pub seed: u64,
    /// Worker threads for parallel steps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the contribution matrix of a graph as CSV.
    Contribution {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute an agent's best response to a classifier or classifier belief.
    Respond {
        #[arg(long)]
        graph: PathBuf,
        /// Classifier weights, or a belief over the contribution vector.
        #[arg(long)]
        classifier: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Failure tolerance; required when the classifier file is a belief.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// JSON object mapping feature names to cost weights (default 1).
        #[arg(long)]
        cost_weights: Option<PathBuf>,
        /// Monte-Carlo samples for weight beliefs on deep graphs.
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
        /// Re-evaluate the constraint on the returned effort.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit the desirability of the response a deterministic classifier induces.
    Audit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        classifier: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        cost_weights: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether the chance constraint can be met and report the threshold δ*.
    Feasibility {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        belief: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        delta: f64,
        /// Require a positive-definite covariance instead of using the pseudo-inverse.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a case-study grid sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate every case-study table and figure panel into a directory.
    CaseStudy {
        #[arg(long)]
        out: PathBuf,
        /// Monte-Carlo samples per effort level for the Model-3 panel.
        #[arg(long, default_value_t = 1_000_000)]
        mc_samples: usize,
    },
    /// Print a non-convexity witness for the desirable-classifier family.
    Witness {
        #[arg(long = "case")]
        case: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Pool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model(e) => model_exit_code(e),
            Self::Write { .. } | Self::Pool(_) => 1,
        }
    }
}

fn model_exit_code(e: &Error) -> i32 {
    match e {
        Error::CycleDetected(_) | Error::InvalidGraph(_) | Error::DepthExceeded(_) => 3,
        Error::Infeasible { .. } => 4,
        Error::NumericalFailure(_)
        | Error::IterationLimit(_)
        | Error::Singular { .. }
        | Error::SingularCovariance { .. } => 5,
        _ => 2,
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses nothing; runs an already parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| dispatch(cli.command, cli.seed))
}

fn dispatch(command: Command, seed: u64) -> CliResult<()> {
    match command {
        Command::Contribution { graph, out } => {
            let graph = load_graph(&graph)?;
            write_atomic(&out, &contribution_csv(&graph))
        }
        Command::Respond {
            graph,
            classifier,
            alpha,
            delta,
            p,
            cost_weights,
            mc_samples,
            verify,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let input = load_classifier(&classifier)?;
            let weights = load_weights(cost_weights.as_deref(), &graph)?;
            let model = CostModel::new(p, weights)?;
            check_finite("alpha", alpha)?;
            let value = respond(
                &graph, &input, &model, alpha, delta, seed, mc_samples, verify,
            )?;
            emit(out.as_deref(), &value)
        }
        Command::Audit {
            graph,
            classifier,
            beta,
            alpha,
            p,
            cost_weights,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let ClassifierInput::Weights { h } = load_classifier(&classifier)? else {
                return Err(Error::Schema(
                    "audit needs a deterministic classifier {\"h\": [...]}".into(),
                )
                .into());
            };
            let model = CostModel::new(p, load_weights(cost_weights.as_deref(), &graph)?)?;
            check_finite("alpha", alpha)?;
            let report = audit_classifier(
                &h,
                &graph.contribution(),
                &model,
                &Partition::from_graph(&graph),
                beta,
                alpha,
            )?;
            emit(
                out.as_deref(),
                &serde_json::to_value(report).expect("plain data"),
            )
        }
        Command::Feasibility {
            graph,
            belief,
            alpha,
            delta,
            strict,
            mc_samples,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let input = load_classifier(&belief)?;
            check_finite("alpha", alpha)?;
            let belief = to_belief(&graph, &input, seed, mc_samples)?.ok_or_else(|| {
                Error::Schema("feasibility needs a belief with a covariance".into())
            })?;
            let verdict = if strict {
                feasibility(&belief, alpha, delta)?
            } else {
                feasibility_general(&belief, alpha, delta)?
            };
            let value = json!({
                "feasible": verdict.feasible,
                "threshold_delta": verdict.threshold_delta,
                "norm_value": finite_or_null(verdict.norm_value),
                "alpha": alpha,
                "delta": delta,
                "provenance": belief.provenance,
            });
            emit(out.as_deref(), &value)
        }
        Command::Sweep { config, out } => {
            let config = SweepConfig::from_json_str(&read(&config)?)?;
            let rows = run_sweep(&config)?;
            write_atomic(&out, &write_sweep_csv(&rows))
        }
        Command::CaseStudy { out, mc_samples } => {
            let artifacts = case_study_artifacts(&CaseStudyOptions { seed, mc_samples })?;
            fs::create_dir_all(&out).map_err(|source| CliError::Write {
                path: out.clone(),
                source,
            })?;
            for a in artifacts {
                write_atomic(&out.join(&a.name), &a.contents)?;
            }
            Ok(())
        }
        Command::Witness { case, out } => {
            let case: WitnessCase = case.parse()?;
            emit(
                out.as_deref(),
                &serde_json::to_value(nonconvexity_witness(case)).expect("plain data"),
            )
        }
    }
}

/// What a classifier file may contain.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ClassifierInput {
    /// A known classifier `h`, in graph feature order.
    Weights { h: Vec<f64> },
    /// A Gaussian belief over `Ch` given directly.
    Belief { mu: Vec<f64>, sigma: Vec<Vec<f64>> },
    /// A belief derived from a prior over `h` or over the edge weights.
    Model(ModelBelief),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelBelief {
    Model1 {
        classifier_prior: PriorFile,
    },
    /// `weight_prior` is indexed like the graph's edge list.
    Model2 {
        h0: Vec<f64>,
        weight_prior: PriorFile,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorFile {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl PriorFile {
    fn to_prior(&self) -> crate::Result<GaussianPrior> {
        GaussianPrior::new(self.mean.clone(), SymMatrix::from_rows(&self.covariance)?)
    }
}

/// The Gaussian belief behind a classifier file, or `None` for a known classifier.
pub fn to_belief(
    graph: &CausalGraph,
    input: &ClassifierInput,
    seed: u64,
    mc_samples: usize,
) -> crate::Result<Option<ContributionBelief>> {
    Ok(Some(match input {
        ClassifierInput::Weights { .. } => return Ok(None),
        ClassifierInput::Belief { mu, sigma } => {
            check_dim(graph.dim(), mu.len())?;
            ContributionBelief::new(mu.clone(), SymMatrix::from_rows(sigma)?, Provenance::Given)?
        }
        ClassifierInput::Model(ModelBelief::Model1 { classifier_prior }) => {
            belief_model1(&graph.contribution(), &classifier_prior.to_prior()?)?
        }
        ClassifierInput::Model(ModelBelief::Model2 { h0, weight_prior }) => {
            let prior = weight_prior.to_prior()?;
            match belief_model2_linear(graph, h0, &prior) {
                Err(Error::DepthExceeded(_)) => {
                    let sampler = Sampler::Model2 {
                        graph: graph.clone(),
                        h0: h0.clone(),
                        prior_w: prior,
                    };
                    belief_monte_carlo(&sampler, mc_samples, seed)?
                }
                other => other?,
            }
        }
    }))
}

/// Rescales a belief so a weighted ℓ2 cost becomes unweighted: with
/// `u = √c ∘ e`, the mean becomes `μ/√c` and the covariance `D⁻¹ΣD⁻¹`.
fn rescale_for_l2(
    belief: &ContributionBelief,
    weights: &[f64],
) -> crate::Result<(ContributionBelief, Vec<f64>)> {
    let s: Vec<f64> = weights.iter().map(|c| c.sqrt()).collect();
    let d = belief.dim();
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| belief.sigma[(i, j)] / (s[i] * s[j]))
                .collect()
        })
        .collect();
    let mu = belief.mu.iter().zip(&s).map(|(m, s)| m / s).collect();
    Ok((
        ContributionBelief::new(mu, SymMatrix::from_rows(&rows)?, belief.provenance)?,
        s,
    ))
}

#[allow(clippy::too_many_arguments)]
fn respond(
    graph: &CausalGraph,
    input: &ClassifierInput,
    model: &CostModel,
    alpha: f64,
    delta: Option<f64>,
    seed: u64,
    mc_samples: usize,
    verify: bool,
) -> CliResult<Value> {
    let partition = Partition::from_graph(graph);
    let names = graph.names();
    let Some(belief) = to_belief(graph, input, seed, mc_samples)? else {
        let ClassifierInput::Weights { h } = input else {
            unreachable!("only weights lack a belief")
        };
        check_dim(graph.dim(), h.len())?;
        let ch = graph.contribution().apply(h)?;
        let effort = best_response(&ch, model, alpha)?;
        let margin = alpha - dot(&ch, &effort);
        return Ok(response_json(
            &names,
            &effort,
            model,
            &partition,
            margin,
            "complete_information",
            None,
        ));
    };
    let delta = delta.ok_or_else(|| {
        Error::Schema("--delta is required when the classifier carries a covariance".into())
    })?;
    let weights = model.weights();
    let p = model.p();
    let (effort, solver) = if p == 2.0 {
        let (scaled, s) = rescale_for_l2(&belief, weights)?;
        let sol = best_response_chance_l2(&scaled, alpha, delta)?;
        let e: Vec<f64> = sol.effort.iter().zip(&s).map(|(u, s)| u / s).collect();
        (EffortProfile::new(e)?, "chance_l2")
    } else if p == 1.0 {
        (
            best_response_chance_l1(&belief, weights, alpha, delta)?.effort,
            "chance_l1",
        )
    } else {
        (
            budget_bisection_oracle(&belief, model, alpha, delta, ORACLE_TOL)?.effort,
            "budget_bisection",
        )
    };
    let margin = chance_margin(&belief, &effort, alpha, delta)?;
    if verify && margin > VERIFY_TOLERANCE {
        return Err(Error::NumericalFailure(format!(
            "verification failed: constraint margin {margin:e}"
        ))
        .into());
    }
    let mut value = response_json(
        &names,
        &effort,
        model,
        &partition,
        margin,
        solver,
        Some(belief.provenance),
    );
    if verify {
        value["verified"] = json!(true);
    }
    Ok(value)
}

fn response_json(
    names: &[&str],
    effort: &[f64],
    model: &CostModel,
    partition: &Partition,
    margin: f64,
    solver: &str,
    provenance: Option<Provenance>,
) -> Value {
    json!({
        "features": names,
        "effort": effort,
        "cost": model.cost(effort).expect("dimensions checked"),
        "beta": beta_of(effort, partition).ok(),
        "feasible": true,
        "margin": margin,
        "solver": solver,
        "provenance": provenance,
    })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn check_finite(name: &str, x: f64) -> crate::Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

/// `d×d` CSV with a header row and a leading column of feature names.
pub fn contribution_csv(graph: &CausalGraph) -> String {
    let names = graph.names();
    let c = graph.contribution();
    let mut out = format!("feature,{}\n", names.join(","));
    for (i, name) in names.iter().enumerate() {
        let row: Vec<String> = c
            .as_matrix()
            .row(i)
            .iter()
            .map(|v| format::float(*v))
            .collect();
        out.push_str(&format!("{name},{}\n", row.join(",")));
    }
    out
}

fn read(path: &Path) -> crate::Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> crate::Result<CausalGraph> {
    CausalGraph::from_json_str(&read(path)?)
}

fn load_classifier(path: &Path) -> crate::Result<ClassifierInput> {
    serde_json::from_str(&read(path)?).map_err(|e| {
        Error::Schema(format!(
            "{}: not a classifier or belief file ({e})",
            path.display()
        ))
    })
}

fn load_weights(path: Option<&Path>, graph: &CausalGraph) -> crate::Result<Vec<f64>> {
    let mut weights = vec![1.0; graph.dim()];
    let Some(path) = path else { return Ok(weights) };
    let map: BTreeMap<String, f64> = serde_json::from_str(&read(path)?).map_err(|e| {
        Error::Schema(format!(
            "{}: cost weights must map feature names to numbers ({e})",
            path.display()
        ))
    })?;
    for (name, w) in map {
        let i = graph
            .index_of(&name)
            .ok_or_else(|| Error::Schema(format!("cost weight for unknown feature {name:?}")))?;
        weights[i] = w;
    }
    Ok(weights)
}

/// Rounds every float in a JSON tree to 12 significant digits.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = format::round(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

fn emit(out: Option<&Path>, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&round_json(value.clone()))
        .expect("JSON values serialize")
        + "\n";
    match out {
        Some(path) => write_atomic(path, &text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Writes via a temporary file in the destination directory plus a rename,
/// so readers never observe a half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_category() {
        assert_eq!(CliError::from(Error::Schema("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::CycleDetected(vec![])).exit_code(), 3);
        assert_eq!(
            CliError::from(Error::Infeasible {
                threshold_delta: Some(0.2)
            })
            .exit_code(),
            4
        );
        assert_eq!(
            CliError::from(Error::NumericalFailure("x".into())).exit_code(),
            5
        );
    }

    #[test]
    fn classifier_files_parse() {
        let w: ClassifierInput = serde_json::from_str(r#"{"h":[1,0]}"#).unwrap();
        assert!(matches!(w, ClassifierInput::Weights { .. }));
        let b: ClassifierInput =
            serde_json::from_str(r#"{"mu":[1,0],"sigma":[[1,0],[0,1]]}"#).unwrap();
        assert!(matches!(b, ClassifierInput::Belief { .. }));
        let m: ClassifierInput = serde_json::from_str(
            r#"{"model":"model1","classifier_prior":{"mean":[1,0],"covariance":[[0,0],[0,1]]}}"#,
        )
        .unwrap();
        assert!(matches!(
            m,
            ClassifierInput::Model(ModelBelief::Model1 { .. })
        ));
        assert!(serde_json::from_str::<ClassifierInput>(r#"{"model":"model9"}"#).is_err());
    }

    #[test]
    fn json_rounding() {
        let v = round_json(json!({"a": [0.1 + 0.2, 1], "b": 2.0 / 3.0}));
        assert_eq!(v, json!({"a": [0.3, 1], "b": 0.666666666667}));
    }

    #[test]
    fn weighted_l2_rescaling_matches_oracle() {
        let graph = CausalGraph::new(
            vec![
                crate::causal_graph::Feature {
                    name: "a".into(),
                    desirable: true,
                },
                crate::causal_graph::Feature {
                    name: "b".into(),
                    desirable: false,
                },
            ],
            vec![],
        )
        .unwrap();
        let input = ClassifierInput::Belief {
            mu: vec![1.0, 0.8],
            sigma: vec![vec![0.2, 0.05], vec![0.05, 0.1]],
        };
        let model = CostModel::new(2.0, vec![3.0, 0.5]).unwrap();
        let v = respond(&graph, &input, &model, 1.0, Some(0.2), 0, 100_000, true).unwrap();
        let belief = to_belief(&graph, &input, 0, 100_000).unwrap().unwrap();
        let oracle = budget_bisection_oracle(&belief, &model, 1.0, 0.2, 1e-9).unwrap();
        let cost = v["cost"].as_f64().unwrap();
        assert!(
            (cost - oracle.cost).abs() <= 1e-6 * oracle.cost,
            "{cost} vs {}",
            oracle.cost
        );
    }
}
