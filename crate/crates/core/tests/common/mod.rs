//! Seeded instance generators shared by the integration test targets.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratcls::causal_graph::{CausalGraph, Edge, Feature};
use stratcls::incomplete_info::{ContributionBelief, Provenance};
use stratcls::numerics::{Matrix, SymMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn features(d: usize) -> Vec<Feature> {
    (0..d)
        .map(|i| Feature {
            name: format!("x{i}"),
            desirable: i % 2 == 0,
        })
        .collect()
}

/// Random DAG on `d` features: a hidden random topological order, each
/// forward pair connected with probability `density`, weights in
/// `[−1.5, 1.5]` away from zero.
pub fn random_dag(rng: &mut ChaCha8Rng, d: usize, density: f64) -> CausalGraph {
    let mut order: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if rng.random_bool(density) {
                let magnitude = rng.random_range(0.1..1.5);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                edges.push(Edge {
                    src: order[a],
                    dst: order[b],
                    weight: sign * magnitude,
                });
            }
        }
    }
    CausalGraph::new(features(d), edges).expect("forward edges form a DAG")
}

/// Random bipartite graph: features `0..k` only send, `k..d` only receive.
pub fn random_bipartite(rng: &mut ChaCha8Rng, d: usize) -> CausalGraph {
    let k = rng.random_range(1..d);
    let mut edges = Vec::new();
    for src in 0..k {
        for dst in k..d {
            if rng.random_bool(0.6) {
                edges.push(Edge {
                    src,
                    dst,
                    weight: rng.random_range(-1.0..1.0),
                });
            }
        }
    }
    if edges.is_empty() {
        edges.push(Edge {
            src: 0,
            dst: k,
            weight: 0.5,
        });
    }
    CausalGraph::new(features(d), edges).expect("bipartite graphs are DAGs")
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..hi)).collect()
}

/// `B Bᵀ / d + ridge·I` with `B` uniform on `[−1, 1]`.
pub fn random_covariance(rng: &mut ChaCha8Rng, d: usize, ridge: f64) -> SymMatrix {
    let b = Matrix::from_rows(
        &(0..d)
            .map(|_| uniform_vec(rng, d, -1.0, 1.0))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let mut m = b.matmul(&b.transpose()).unwrap().scale(1.0 / d as f64);
    for i in 0..d {
        m[(i, i)] += ridge;
    }
    SymMatrix::symmetrize(m).unwrap()
}

pub fn belief(mu: Vec<f64>, sigma: SymMatrix) -> ContributionBelief {
    ContributionBelief::new(mu, sigma, Provenance::Given).unwrap()
}

/// `μᵀΣ⁻¹μ` by dense Gaussian elimination with partial pivoting, kept
/// separate from the library's eigen-decomposition path.
pub fn mahalanobis_sq(mu: &[f64], sigma: &SymMatrix) -> f64 {
    let n = mu.len();
    let mut a: Vec<Vec<f64>> = sigma.as_matrix().to_rows();
    let mut b = mu.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    mu.iter().zip(&x).map(|(m, x)| m * x).sum()
}

/// Cheapest single-feature ℓ1 response: `min_f α c_f / |ch_f|`.
pub fn l1_corner_cost(ch: &[f64], c: &[f64], alpha: f64) -> f64 {
    ch.iter()
        .zip(c)
        .filter(|(h, _)| **h != 0.0)
        .map(|(h, c)| alpha * c / h.abs())
        .fold(f64::INFINITY, f64::min)
}
