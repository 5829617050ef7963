//! Chance-constrained solvers checked against sampling, limits and each other.

mod common;

use common::{belief, random_covariance, rng, uniform_vec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use stratcls::agent_model::CostModel;
use stratcls::causal_graph::{CausalGraph, Edge};
use stratcls::incomplete_info::{
    belief_model2_linear, belief_monte_carlo, best_response_chance_l1, best_response_chance_l2,
    best_response_chance_l2_diag, budget_bisection_oracle, chance_margin, GaussianPrior,
    Provenance, Sampler,
};
use stratcls::numerics::SymMatrix;
use stratcls::Error;

/// Lower Cholesky factor of a positive-definite matrix.
fn cholesky(m: &SymMatrix) -> Vec<Vec<f64>> {
    let n = m.dim();
    let a = m.as_matrix();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (a[(i, i)] - s).sqrt();
            } else {
                l[i][j] = (a[(i, j)] - s) / l[j][j];
            }
        }
    }
    l
}

#[test]
fn solution_passes_with_probability_one_minus_delta() {
    let mut r = rng(11);
    let n = 400_000;
    for _ in 0..5 {
        let d = r.random_range(2..=5);
        let sigma = random_covariance(&mut r, d, 0.05).scale(0.3);
        let mu = uniform_vec(&mut r, d, 0.3, 1.5);
        let delta = r.random_range(0.1..0.4);
        let alpha = 1.0;
        let b = belief(mu.clone(), sigma.clone());
        let sol = best_response_chance_l2(&b, alpha, delta).unwrap();
        let l = cholesky(&sigma);
        let mut passes = 0usize;
        for _ in 0..n {
            let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
            let score: f64 = (0..d)
                .map(|i| (mu[i] + (0..=i).map(|k| l[i][k] * z[k]).sum::<f64>()) * sol.effort[i])
                .sum();
            if score >= alpha {
                passes += 1;
            }
        }
        let p = passes as f64 / n as f64;
        let se = (delta * (1.0 - delta) / n as f64).sqrt();
        assert!(
            (p - (1.0 - delta)).abs() < 5.0 * se,
            "pass rate {p} vs {} (se {se})",
            1.0 - delta
        );
    }
}

#[test]
fn vanishing_uncertainty_recovers_complete_information() {
    let mu = vec![1.0, -0.6, 0.4];
    let norm_sq: f64 = mu.iter().map(|m| m * m).sum();
    let exact: Vec<f64> = mu.iter().map(|m| m / norm_sq).collect();
    let mut last = f64::INFINITY;
    for k in 2..=10 {
        let scale = 10f64.powi(-k);
        let sigma = SymMatrix::from_rows(&[
            vec![1.0, 0.3, 0.0],
            vec![0.3, 2.0, -0.2],
            vec![0.0, -0.2, 0.5],
        ])
        .unwrap()
        .scale(scale);
        let sol = best_response_chance_l2(&belief(mu.clone(), sigma), 1.0, 0.1).unwrap();
        let err = sol
            .effort
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= last * 1.000001, "k = {k}: {err} > {last}");
        last = err;
    }
    assert!(last < 1e-4, "error at Σ = 1e-10·S: {last}");
}

#[test]
fn zero_covariance_is_the_complete_information_response() {
    let mu = vec![0.5, 2.0, -1.0];
    let sol = best_response_chance_l2(&belief(mu.clone(), SymMatrix::zeros(3)), 2.0, 0.2).unwrap();
    let norm_sq: f64 = mu.iter().map(|m| m * m).sum();
    for (e, m) in sol.effort.iter().zip(&mu) {
        assert!((e - 2.0 * m / norm_sq).abs() < 1e-12);
    }
    let l1 =
        best_response_chance_l1(&belief(mu, SymMatrix::zeros(3)), &[1.0; 3], 2.0, 0.2).unwrap();
    assert_eq!(&l1.effort[..], &[0.0, 1.0, 0.0]);
}

#[test]
fn diagonal_and_general_solvers_agree() {
    let mut r = rng(12);
    for _ in 0..50 {
        let d = r.random_range(1..=6);
        let mu = uniform_vec(&mut r, d, -1.0, 2.0);
        let mut var = uniform_vec(&mut r, d, 0.0, 0.5);
        if d > 1 && r.random_bool(0.3) {
            var[0] = 0.0;
        }
        let b = belief(mu, SymMatrix::from_diag(&var));
        let delta = r.random_range(0.05..0.5);
        match (
            best_response_chance_l2(&b, 1.0, delta),
            best_response_chance_l2_diag(&b, 1.0, delta),
        ) {
            (Ok(g), Ok(dg)) => {
                assert!((g.cost - dg.cost).abs() <= 1e-9 * g.cost, "{g:?} vs {dg:?}");
                for (a, b) in g.effort.iter().zip(dg.effort.iter()) {
                    assert!((a - b).abs() <= 1e-7 * (1.0 + g.cost));
                }
            }
            (Err(Error::Infeasible { .. }), Err(Error::Infeasible { .. })) => {}
            (a, b) => panic!("solvers disagree: {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn l1_solver_is_certified_by_the_oracle() {
    let mut r = rng(13);
    let mut checked = 0;
    while checked < 30 {
        let d = r.random_range(2..=5);
        let b = belief(
            uniform_vec(&mut r, d, 0.0, 1.5),
            random_covariance(&mut r, d, 0.05).scale(0.3),
        );
        let weights = uniform_vec(&mut r, d, 0.5, 2.0);
        let delta = r.random_range(0.1..0.4);
        let sol = match best_response_chance_l1(&b, &weights, 1.0, delta) {
            Ok(s) => s,
            Err(Error::Infeasible { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        assert!(sol.margin <= 1e-8 * 2.0, "margin {}", sol.margin);
        let model = CostModel::new(1.0, weights).unwrap();
        let oracle = budget_bisection_oracle(&b, &model, 1.0, delta, 1e-8).unwrap();
        assert!(
            sol.cost <= oracle.cost * (1.0 + 1e-4),
            "ℓ1 {} vs oracle {}",
            sol.cost,
            oracle.cost
        );
        assert!(
            sol.cost >= oracle.cost * (1.0 - 1e-3),
            "ℓ1 {} suspiciously below oracle {}",
            sol.cost,
            oracle.cost
        );
        checked += 1;
    }
}

#[test]
fn oracle_respects_the_constraint_for_every_p() {
    let mut r = rng(14);
    let b = belief(
        vec![1.0, 0.7, 0.4],
        random_covariance(&mut r, 3, 0.05).scale(0.2),
    );
    for p in [1.0, 1.5, 2.0, 3.0] {
        let model = CostModel::unweighted(p, 3).unwrap();
        let o = budget_bisection_oracle(&b, &model, 1.0, 0.2, 1e-8).unwrap();
        assert!(o.margin <= 1e-9, "p = {p}: margin {}", o.margin);
        assert!(chance_margin(&b, &o.effort, 1.0, 0.2).unwrap() <= 1e-9);
        assert!(o.budget_lower <= o.budget_upper);
    }
}

fn depth_one_graph() -> CausalGraph {
    CausalGraph::new(
        common::features(4),
        vec![
            Edge {
                src: 0,
                dst: 2,
                weight: 0.5,
            },
            Edge {
                src: 1,
                dst: 2,
                weight: -0.3,
            },
            Edge {
                src: 1,
                dst: 3,
                weight: 0.8,
            },
        ],
    )
    .unwrap()
}

#[test]
fn linear_model2_matches_its_monte_carlo_estimate() {
    let graph = depth_one_graph();
    let h0 = vec![0.2, 0.1, 1.0, -0.7];
    let prior = GaussianPrior::new(
        vec![0.5, -0.3, 0.8],
        SymMatrix::from_diag(&[0.04, 0.09, 0.01]),
    )
    .unwrap();
    let exact = belief_model2_linear(&graph, &h0, &prior).unwrap();
    assert_eq!(exact.provenance, Provenance::Model2Linear);
    let sampler = Sampler::Model2 {
        graph,
        h0,
        prior_w: prior,
    };
    let mc = belief_monte_carlo(&sampler, 200_000, 5).unwrap();
    assert_eq!(mc.provenance, Provenance::MonteCarloApprox);
    for i in 0..4 {
        assert!((mc.mu[i] - exact.mu[i]).abs() < 5e-3, "μ[{i}]");
        for j in 0..4 {
            assert!(
                (mc.sigma[(i, j)] - exact.sigma[(i, j)]).abs() < 5e-3,
                "Σ[{i}][{j}]"
            );
        }
    }
    // Same seed, same belief.
    assert_eq!(mc, belief_monte_carlo(&sampler, 200_000, 5).unwrap());
}

#[test]
fn deeper_graphs_need_the_monte_carlo_belief() {
    let graph = CausalGraph::new(
        common::features(3),
        vec![
            Edge {
                src: 0,
                dst: 1,
                weight: 0.5,
            },
            Edge {
                src: 1,
                dst: 2,
                weight: 0.5,
            },
        ],
    )
    .unwrap();
    let prior = GaussianPrior::new(vec![0.5, 0.5], SymMatrix::from_diag(&[0.01, 0.01])).unwrap();
    assert!(matches!(
        belief_model2_linear(&graph, &[0.0, 0.0, 1.0], &prior),
        Err(Error::DepthExceeded(2))
    ));
    let mc = belief_monte_carlo(
        &Sampler::Model2 {
            graph,
            h0: vec![0.0, 0.0, 1.0],
            prior_w: prior,
        },
        100_000,
        3,
    )
    .unwrap();
    // E[w1·w2] = 0.25 for independent weights.
    assert!((mc.mu[0] - 0.25).abs() < 2e-3, "{}", mc.mu[0]);
}
