//! Acceptance suite: nine end-to-end criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the verdict lines are
//! always printed. Exits non-zero if any criterion fails.

// `ensure!(x <= y, ..)` negates float comparisons on purpose: NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{
    belief, l1_corner_cost, mahalanobis_sq, random_bipartite, random_covariance, random_dag, rng,
    uniform_vec,
};
use rand::Rng;
use stratcls::agent_model::CostModel;
use stratcls::case_study::{reproduce_table_mu, run_sweep, ClassifierName, SweepConfig, SweepRow};
use stratcls::causal_graph::{contribution_matrix, path_oracle};
use stratcls::complete_info::{best_response_l1, best_response_lp};
use stratcls::design_audit::{nonconvexity_witness, WitnessCase};
use stratcls::incomplete_info::{
    belief_model2_linear, best_response_chance_l1, best_response_chance_l2,
    best_response_chance_l2_diag, budget_bisection_oracle, default_grid, feasibility,
    find_nonconcavity, scan_model3, GaussianPrior,
};
use stratcls::numerics::{std_normal_cdf, std_normal_quantile, Matrix, SymMatrix};
use stratcls::Error;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn table_mu() -> Outcome {
    let printed: [(ClassifierName, [f64; 8], f64); 4] = [
        (
            ClassifierName::Dm,
            [0.1, 0.84, 0.82, 0.52, 1.0, 0.0, 0.0, 0.0],
            1.28,
        ),
        (
            ClassifierName::Hpl,
            [0.14, 0.84, 0.82, 0.34, 0.0, 1.0, 0.0, 0.0],
            1.23,
        ),
        (
            ClassifierName::Hpt,
            [0.62, 0.84, 0.82, 0.86, 0.0, 0.0, 1.0, 0.0],
            1.58,
        ),
        (
            ClassifierName::Obesity,
            [0.64, 0.86, 0.82, 0.0, 0.0, 0.0, 0.0, 1.0],
            1.35,
        ),
    ];
    let rows = reproduce_table_mu();
    ensure!(rows.len() == 4, "expected 4 rows, got {}", rows.len());
    let mut worst = 0.0f64;
    let mut norm_misses = Vec::new();
    for (row, (name, mu, l2d)) in rows.iter().zip(printed) {
        ensure!(
            row.classifier == name,
            "row order: {} vs {name}",
            row.classifier
        );
        for (got, want) in row.mu.iter().zip(mu) {
            worst = worst.max((got - want).abs());
            ensure!(
                (got - want).abs() <= 1e-9,
                "{name}: μ entry {got} vs {want}"
            );
        }
        // The printed norms carry two decimals; compare every one so a
        // failure report shows all of them.
        for (label, got, want) in [
            ("ℓ2(D)", row.l2_desirable, l2d),
            ("ℓ2(U)", row.l2_undesirable, 1.0),
        ] {
            if (got - want).abs() > 0.005 {
                norm_misses.push(format!("{name} {label} = {got:.5} vs printed {want}"));
            }
        }
    }
    ensure!(
        norm_misses.is_empty(),
        "μ rows match (max |Δμ| = {worst:.1e}) but norms off by more than 0.005: {}",
        norm_misses.join("; ")
    );
    Ok(format!("max |Δμ| = {worst:.1e}"))
}

fn witnesses() -> Outcome {
    let l1 = nonconvexity_witness(WitnessCase::L1);
    ensure!(
        l1.midpoint == vec![5.5, 5.5, 3.0, 6.0],
        "l1 midpoint {:?}",
        l1.midpoint
    );
    ensure!(
        l1.memberships == [true, true, false],
        "l1 memberships {:?}",
        l1.memberships
    );
    let lp = nonconvexity_witness(WitnessCase::Lp);
    ensure!(
        lp.midpoint == vec![0.5, 0.5, 1.0],
        "lp midpoint {:?}",
        lp.midpoint
    );
    ensure!(
        lp.memberships == [true, true, false],
        "lp memberships {:?}",
        lp.memberships
    );
    Ok("l1 and lp: [true, true, false]".into())
}

fn l1_sharing() -> Outcome {
    let (mean, sd, delta, alpha) = (1.0, 0.5, 0.1, 1.0);
    let b = belief(vec![mean; 2], SymMatrix::from_diag(&[sd * sd; 2]));
    let sol = best_response_chance_l1(&b, &[1.0, 1.0], alpha, delta).map_err(|e| e.to_string())?;
    let p_delta = std_normal_quantile(delta).unwrap();
    let symmetric = alpha / (mean + p_delta * sd / 2f64.sqrt());
    let corner = alpha / (mean + p_delta * sd);
    ensure!(
        sol.cost <= symmetric + 1e-3,
        "cost {} above symmetric {symmetric}",
        sol.cost
    );
    ensure!(
        sol.cost < corner,
        "cost {} not below corner {corner}",
        sol.cost
    );
    Ok(format!(
        "cost {:.4} (symmetric {symmetric:.4}, corner {corner:.4})",
        sol.cost
    ))
}

fn oracle_suites() -> Outcome {
    // (a) complete-information ℓ1 against single-feature enumeration.
    let mut r = rng(401);
    let mut worst_a = 0.0f64;
    for i in 0..200 {
        let d = r.random_range(1..=6);
        let ch = uniform_vec(&mut r, d, -2.0, 2.0);
        let c = uniform_vec(&mut r, d, 0.2, 3.0);
        let alpha = r.random_range(0.1..5.0);
        let e = best_response_l1(&ch, &c, alpha).map_err(|e| format!("(a) #{i}: {e}"))?;
        let cost = CostModel::new(1.0, c.clone()).unwrap().cost(&e).unwrap();
        let score: f64 = ch.iter().zip(e.iter()).map(|(h, e)| h * e).sum();
        let oracle = l1_corner_cost(&ch, &c, alpha);
        let err = (cost - oracle).abs() / oracle.max(1.0);
        worst_a = worst_a.max(err);
        ensure!(err <= 1e-9, "(a) #{i}: cost {cost} vs {oracle}");
        ensure!(
            score >= alpha * (1.0 - 1e-12),
            "(a) #{i}: score {score} < {alpha}"
        );
    }

    // (b) complete-information ℓp against budget bisection on a point belief.
    let mut r = rng(402);
    let mut worst_b = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        for i in 0..100 {
            let d = r.random_range(2..=6);
            let ch = uniform_vec(&mut r, d, -2.0, 2.0);
            let model = CostModel::new(p, uniform_vec(&mut r, d, 0.2, 3.0)).unwrap();
            let alpha = r.random_range(0.1..5.0);
            let e =
                best_response_lp(&ch, &model, alpha).map_err(|e| format!("(b) p={p} #{i}: {e}"))?;
            let cost = model.cost(&e).unwrap();
            let point = belief(ch.clone(), SymMatrix::zeros(d));
            let oracle = budget_bisection_oracle(&point, &model, alpha, 0.5, 1e-9)
                .map_err(|e| format!("(b) p={p} #{i} oracle: {e}"))?;
            let err = rel_err(cost, oracle.cost);
            worst_b = worst_b.max(err);
            ensure!(
                err <= 1e-4,
                "(b) p={p} #{i}: cost {cost} vs oracle {}",
                oracle.cost
            );
        }
    }

    // (c) chance-constrained ℓ2 KKT solver against budget bisection.
    let mut r = rng(403);
    let mut worst_c = 0.0f64;
    let mut solved = 0;
    let mut attempts = 0;
    while solved < 100 {
        attempts += 1;
        ensure!(attempts < 1000, "(c) too few feasible instances");
        let d = r.random_range(2..=6);
        let mu = uniform_vec(&mut r, d, -1.0, 2.0);
        let sigma = random_covariance(&mut r, d, 0.05).scale(r.random_range(0.05..1.0));
        let b = belief(mu, sigma);
        let alpha = r.random_range(0.5..3.0);
        let delta = [0.05, 0.1, 0.2, 0.3, 0.4][r.random_range(0..5)];
        let sol = match best_response_chance_l2(&b, alpha, delta) {
            Ok(s) => s,
            Err(Error::Infeasible { .. }) => continue,
            Err(e) => return Err(format!("(c) #{solved}: {e}")),
        };
        let model = CostModel::unweighted(2.0, d).unwrap();
        let oracle = budget_bisection_oracle(&b, &model, alpha, delta, 1e-9)
            .map_err(|e| format!("(c) #{solved} oracle: {e}"))?;
        let err = rel_err(sol.cost, oracle.cost);
        worst_c = worst_c.max(err);
        ensure!(
            err <= 1e-3,
            "(c) #{solved}: cost {} vs oracle {}",
            sol.cost,
            oracle.cost
        );
        solved += 1;
    }
    Ok(format!(
        "worst relative gaps: (a) {worst_a:.1e}, (b) {worst_b:.1e}, (c) {worst_c:.1e}"
    ))
}

fn feasibility_boundary() -> Outcome {
    let mut r = rng(501);
    let alpha = 1.0;
    let mut thresholds = Vec::new();
    for i in 0..20 {
        let d = r.random_range(2..=6);
        let sigma = random_covariance(&mut r, d, 0.2);
        let raw = uniform_vec(&mut r, d, -1.0, 2.0);
        // Scale μ so that δ* lands in (0.01, 0.25).
        let target = r.random_range(0.7..2.3);
        let scale = target / mahalanobis_sq(&raw, &sigma).sqrt();
        let mu: Vec<f64> = raw.iter().map(|m| m * scale).collect();
        let threshold = std_normal_cdf(-mahalanobis_sq(&mu, &sigma).sqrt());
        let b = belief(mu, sigma);

        let verdict = feasibility(&b, alpha, 0.5).map_err(|e| format!("#{i}: {e}"))?;
        ensure!(
            rel_err(verdict.threshold_delta, threshold) <= 1e-8,
            "#{i}: δ* {} vs {threshold}",
            verdict.threshold_delta
        );
        let above = threshold * 1.05;
        let sol = best_response_chance_l2(&b, alpha, above)
            .map_err(|e| format!("#{i}: δ = {above} failed: {e}"))?;
        ensure!(
            sol.margin <= 1e-8 * (1.0 + alpha),
            "#{i}: margin {} at δ = {above}",
            sol.margin
        );
        let below = threshold * 0.95;
        match best_response_chance_l2(&b, alpha, below) {
            Err(Error::Infeasible { .. }) => {}
            other => return Err(format!("#{i}: δ = {below} gave {other:?}")),
        }
        ensure!(
            !feasibility(&b, alpha, below).unwrap().feasible,
            "#{i}: verdict feasible below δ*"
        );
        thresholds.push(threshold);
    }
    let lo = thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = thresholds.iter().copied().fold(0.0, f64::max);
    Ok(format!("20 beliefs, δ* ∈ [{lo:.3}, {hi:.3}]"))
}

fn sweep_trends() -> Outcome {
    const SLACK: f64 = 1e-6;
    let config = SweepConfig::default();
    let rows = run_sweep(&config).map_err(|e| e.to_string())?;
    let find = |k: ClassifierName, a: f64, s: f64, d: f64| -> &SweepRow {
        rows.iter()
            .find(|r| r.classifier == k && r.alpha == a && r.sigma == s && r.delta == d)
            .expect("cell present")
    };
    for r in &rows {
        ensure!(r.note.is_none(), "solver failure in {r:?}");
    }
    let mut comparisons = 0;
    for &k in &config.classifiers {
        for &a in &config.alphas {
            for &d in &config.deltas {
                let betas: Vec<f64> = config
                    .sigmas
                    .iter()
                    .filter_map(|&s| find(k, a, s, d).beta)
                    .collect();
                for w in betas.windows(2) {
                    comparisons += 1;
                    ensure!(
                        w[1] <= w[0] + SLACK,
                        "{k} α={a} δ={d}: β rises with σ ({} → {})",
                        w[0],
                        w[1]
                    );
                }
            }
            for &s in &config.sigmas {
                let betas: Vec<f64> = config
                    .deltas
                    .iter()
                    .filter_map(|&d| find(k, a, s, d).beta)
                    .collect();
                for w in betas.windows(2) {
                    comparisons += 1;
                    ensure!(
                        w[1] + SLACK >= w[0],
                        "{k} α={a} σ={s}: β falls with δ ({} → {})",
                        w[0],
                        w[1]
                    );
                }
            }
            let at_half: Vec<f64> = [0.1, 1.0, 3.0]
                .iter()
                .map(|&s| {
                    find(k, a, s, 0.5)
                        .beta
                        .ok_or(format!("{k} σ={s} δ=0.5 infeasible"))
                })
                .collect::<Result<_, _>>()?;
            for b in &at_half {
                ensure!(
                    (b - at_half[0]).abs() <= 1e-9,
                    "{k} α={a}: β at δ = 0.5 varies with σ: {at_half:?}"
                );
            }
        }
        for &s in &config.sigmas {
            for &d in &config.deltas {
                let (r1, r10) = (find(k, 1.0, s, d), find(k, 10.0, s, d));
                ensure!(
                    r1.feasible == r10.feasible,
                    "{k} σ={s} δ={d}: feasibility depends on α"
                );
                if let (Some(b1), Some(b10)) = (r1.beta, r10.beta) {
                    ensure!(
                        (b1 - b10).abs() <= 1e-6,
                        "{k} σ={s} δ={d}: β {b1} (α=1) vs {b10} (α=10)"
                    );
                }
            }
        }
    }
    let beta = |k| find(k, 1.0, 0.1, 0.1).beta.unwrap_or(f64::NAN);
    let order = [
        ClassifierName::Hpt,
        ClassifierName::Obesity,
        ClassifierName::Dm,
        ClassifierName::Hpl,
    ];
    let values: Vec<f64> = order.iter().map(|&k| beta(k)).collect();
    ensure!(
        values.windows(2).all(|w| w[0] > w[1]),
        "ordering at σ=0.1, δ=0.1: HPT/Obesity/DM/HPL = {values:?}"
    );
    Ok(format!(
        "{} cells, {comparisons} monotonicity checks; β(HPT, Obesity, DM, HPL) = ({:.4}, {:.4}, {:.4}, {:.4})",
        rows.len(),
        values[0],
        values[1],
        values[2],
        values[3]
    ))
}

fn structural() -> Outcome {
    let mut r = rng(701);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let d = r.random_range(1..=8);
        let density = r.random_range(0.1..0.7);
        let graph = random_dag(&mut r, d, density);
        let a = graph.adjacency();
        let c = contribution_matrix(&a).map_err(|e| format!("DAG #{i}: {e}"))?;
        let cm = c.as_matrix();
        for u in 0..d {
            for v in 0..d {
                let oracle = path_oracle(&graph, u, v);
                worst = worst.max((cm[(u, v)] - oracle).abs());
                ensure!(
                    (cm[(u, v)] - oracle).abs() <= 1e-10,
                    "DAG #{i}: C[{u}][{v}] = {} vs paths {oracle}",
                    cm[(u, v)]
                );
            }
        }
        let residual = cm
            .matmul(&Matrix::identity(d).sub(&a).unwrap())
            .unwrap()
            .sub(&Matrix::identity(d))
            .unwrap()
            .max_abs();
        ensure!(residual <= 1e-10, "DAG #{i}: |C(I − A) − I| = {residual}");
    }
    for i in 0..100 {
        let d = r.random_range(2..=8);
        let graph = random_bipartite(&mut r, d);
        let m = graph.edges().len();
        let h0 = uniform_vec(&mut r, d, -1.0, 1.0);
        let prior = GaussianPrior::new(
            uniform_vec(&mut r, m, -1.0, 1.0),
            SymMatrix::from_diag(&uniform_vec(&mut r, m, 0.01, 2.0)),
        )
        .unwrap();
        let b = belief_model2_linear(&graph, &h0, &prior).map_err(|e| format!("#{i}: {e}"))?;
        let s = b.sigma.as_matrix();
        for u in 0..d {
            for v in 0..d {
                ensure!(
                    u == v || s[(u, v)] == 0.0,
                    "bipartite #{i}: Σ[{u}][{v}] = {:e}",
                    s[(u, v)]
                );
            }
        }
    }
    Ok(format!(
        "100 DAGs (max path gap {worst:.1e}), 100 bipartite beliefs diagonal"
    ))
}

fn model3() -> Outcome {
    let scan = scan_model3(&default_grid(), 1.0, 1_000_000, 42).map_err(|e| e.to_string())?;
    let w = find_nonconcavity(&scan).ok_or("no significant midpoint violation found")?;
    ensure!(w.e1 < w.e2 && w.z > 4.0, "bad witness {w:?}");
    Ok(format!(
        "e1 = {}, e2 = {}: f(mid) = {:.5} < chord {:.5}, z = {:.1}",
        w.e1,
        w.e2,
        w.f_mid,
        0.5 * (w.f1 + w.f2),
        w.z
    ))
}

fn variance_share() -> Outcome {
    let mu = vec![1.0, 0.8, 0.6, 0.4];
    let (alpha, delta) = (1.0, 0.2);
    let mut shares = Vec::new();
    for k in 0..10 {
        let s = 0.05 + 0.2 * k as f64;
        let b = belief(mu.clone(), SymMatrix::from_diag(&[s, 0.5, 0.5, 0.5]));
        let sol = best_response_chance_l2_diag(&b, alpha, delta)
            .map_err(|e| format!("Σ_ff = {s}: {e}"))?;
        let e = &sol.effort[..];
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        shares.push(e[0] / norm);
    }
    for (k, w) in shares.windows(2).enumerate() {
        ensure!(
            w[1] <= w[0] + 1e-6,
            "normalized effort rises between grid points {k} and {}: {shares:?}",
            k + 1
        );
    }
    Ok(format!(
        "e*_f/|e*| from {:.4} down to {:.4}",
        shares[0], shares[9]
    ))
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "Table-mu reproduction",
            limit: Duration::from_secs(1),
            run: table_mu,
        },
        Criterion {
            id: 2,
            name: "Non-convexity witnesses",
            limit: Duration::from_secs(1),
            run: witnesses,
        },
        Criterion {
            id: 3,
            name: "ℓ1 chance-constrained effort sharing",
            limit: Duration::from_secs(10),
            run: l1_sharing,
        },
        Criterion {
            id: 4,
            name: "Oracle equivalence suites",
            limit: Duration::from_secs(120),
            run: oracle_suites,
        },
        Criterion {
            id: 5,
            name: "Feasibility boundary",
            limit: Duration::from_secs(30),
            run: feasibility_boundary,
        },
        Criterion {
            id: 6,
            name: "Sweep trends",
            limit: Duration::from_secs(120),
            run: sweep_trends,
        },
        Criterion {
            id: 7,
            name: "Structural invariants",
            limit: Duration::from_secs(30),
            run: structural,
        },
        Criterion {
            id: 8,
            name: "Model-3 non-concavity",
            limit: Duration::from_secs(60),
            run: model3,
        },
        Criterion {
            id: 9,
            name: "Variance monotonicity of effort share",
            limit: Duration::from_secs(10),
            run: variance_share,
        },
    ];
    // Keep panic messages out of the verdict lines; failures are reported below.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => {
                Err(format!("{detail}; exceeded time limit of {:?}", c.limit))
            }
            other => other,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} [{}] {} ({:.2}s): {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
