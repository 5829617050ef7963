//! Gaussian beliefs over the contribution vector `Ch`.
//!
//! * Model 1: the agent is unsure of the classifier, `h ~ N(μ_h, Σ_h)`.
//!   `Ch` is then exactly Gaussian with mean `C μ_h` and covariance `C Σ_h Cᵀ`.
//! * Model 2: the agent is unsure of the edge weights, `w ~ N(μ_w, Σ_w)`.
//!   `Ch` is affine in `w` only when every influence path has a single edge.
//!   Deeper graphs multiply Gaussian weights, so they get a moment-matched
//!   Monte-Carlo approximation instead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::causal_graph::{contribution_matrix, CausalGraph, ContributionMatrix};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{jacobi_eigen, psd_sqrt, Matrix, SymMatrix};

/// Eigenvalues more negative than this (relative to the matrix scale) make a
/// covariance invalid; smaller negatives are rounding noise.
const PSD_REL_TOLERANCE: f64 = 1e-8;

fn check_psd(m: &SymMatrix) -> Result<()> {
    let eig = jacobi_eigen(m);
    let min = eig.values.first().copied().unwrap_or(0.0);
    let scale = m.as_matrix().max_abs().max(1.0);
    if min < -PSD_REL_TOLERANCE * scale {
        return Err(Error::NotPsd { eigenvalue: min });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianPrior {
    pub mean: Vec<f64>,
    pub covariance: SymMatrix,
}

impl GaussianPrior {
    pub fn new(mean: Vec<f64>, covariance: SymMatrix) -> Result<Self> {
        check_dim(mean.len(), covariance.dim())?;
        check_psd(&covariance)?;
        Ok(Self { mean, covariance })
    }

    /// A point mass at `mean`.
    pub fn degenerate(mean: Vec<f64>) -> Self {
        let d = mean.len();
        Self {
            mean,
            covariance: SymMatrix::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Given,
    Model1,
    Model2Linear,
    MonteCarloApprox,
}

/// `Ch ~ N(mu, sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContributionBelief {
    pub mu: Vec<f64>,
    pub sigma: SymMatrix,
    pub provenance: Provenance,
}

impl ContributionBelief {
    pub fn new(mu: Vec<f64>, sigma: SymMatrix, provenance: Provenance) -> Result<Self> {
        check_dim(mu.len(), sigma.dim())?;
        if mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("belief mean must be finite".into()));
        }
        check_psd(&sigma)?;
        Ok(Self {
            mu,
            sigma,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Model 1: uncertainty about the classifier only.
pub fn belief_model1(
    c: &ContributionMatrix,
    prior_h: &GaussianPrior,
) -> Result<ContributionBelief> {
    check_dim(c.dim(), prior_h.dim())?;
    let cm = c.as_matrix();
    let mu = cm.mul_vec(&prior_h.mean)?;
    let sigma = SymMatrix::symmetrize(
        cm.matmul(prior_h.covariance.as_matrix())?
            .matmul(&cm.transpose())?,
    )?;
    Ok(ContributionBelief {
        mu,
        sigma,
        provenance: Provenance::Model1,
    })
}

/// `J` with `Ch = h0 + J w` for a depth-one graph: edge `e = (f → j)` feeds
/// `w_e · h0_j` into coordinate `f`.
fn edge_jacobian(graph: &CausalGraph, h0: &[f64]) -> Matrix {
    let mut j = Matrix::zeros(graph.dim(), graph.edges().len());
    for (k, e) in graph.edges().iter().enumerate() {
        j[(e.src, k)] = h0[e.dst];
    }
    j
}

/// Model 2 (exact): uncertainty about edge weights on a graph whose influence
/// paths all have length one. `prior_w` is indexed like `graph.edges()`.
pub fn belief_model2_linear(
    graph: &CausalGraph,
    h0: &[f64],
    prior_w: &GaussianPrior,
) -> Result<ContributionBelief> {
    check_dim(graph.dim(), h0.len())?;
    check_dim(graph.edges().len(), prior_w.dim())?;
    let depth = graph.longest_path();
    if depth >= 2 {
        return Err(Error::DepthExceeded(depth));
    }
    let j = edge_jacobian(graph, h0);
    let jw = j.mul_vec(&prior_w.mean)?;
    let mu = h0.iter().zip(&jw).map(|(h, x)| h + x).collect();
    let sigma = SymMatrix::symmetrize(
        j.matmul(prior_w.covariance.as_matrix())?
            .matmul(&j.transpose())?,
    )?;
    Ok(ContributionBelief {
        mu,
        sigma,
        provenance: Provenance::Model2Linear,
    })
}

/// Generative models for the Monte-Carlo belief.
#[derive(Debug, Clone)]
pub enum Sampler {
    /// Random edge weights, fixed classifier.
    Model2 {
        graph: CausalGraph,
        h0: Vec<f64>,
        prior_w: GaussianPrior,
    },
    /// Random edge weights and random classifier, drawn independently.
    Model3 {
        graph: CausalGraph,
        prior_w: GaussianPrior,
        prior_h: GaussianPrior,
    },
}

struct GaussianDraw {
    mean: Vec<f64>,
    root: Matrix,
}

impl GaussianDraw {
    fn new(prior: &GaussianPrior) -> Result<Self> {
        Ok(Self {
            mean: prior.mean.clone(),
            root: psd_sqrt(&prior.covariance)?.into_matrix(),
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let z: Vec<f64> = (0..self.mean.len())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let x = self.root.mul_vec(&z)?;
        Ok(self.mean.iter().zip(x).map(|(m, x)| m + x).collect())
    }
}

fn weighted_contribution(graph: &CausalGraph, w: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let mut a = Matrix::zeros(graph.dim(), graph.dim());
    for (e, &wk) in graph.edges().iter().zip(w) {
        a[(e.src, e.dst)] = wk;
    }
    contribution_matrix(&a)?.apply(h)
}

/// Moment-matched Gaussian from `n ≥ 1000` draws of `C(w)·h`
/// (sample mean, unbiased sample covariance). Deterministic in `seed`.
pub fn belief_monte_carlo(sampler: &Sampler, n: usize, seed: u64) -> Result<ContributionBelief> {
    if n < 1000 {
        return Err(Error::Domain(format!(
            "Monte-Carlo beliefs need at least 1000 samples, got {n}"
        )));
    }
    let (graph, w_draw, h_source) = match sampler {
        Sampler::Model2 { graph, h0, prior_w } => {
            check_dim(graph.dim(), h0.len())?;
            (graph, GaussianDraw::new(prior_w)?, Err(h0.clone()))
        }
        Sampler::Model3 {
            graph,
            prior_w,
            prior_h,
        } => {
            check_dim(graph.dim(), prior_h.dim())?;
            (
                graph,
                GaussianDraw::new(prior_w)?,
                Ok(GaussianDraw::new(prior_h)?),
            )
        }
    };
    check_dim(graph.edges().len(), w_draw.mean.len())?;
    let d = graph.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let w = w_draw.sample(&mut rng)?;
        let h = match &h_source {
            Ok(draw) => draw.sample(&mut rng)?,
            Err(h0) => h0.clone(),
        };
        samples.push(weighted_contribution(graph, &w, &h)?);
    }
    let mut mu = vec![0.0; d];
    for s in &samples {
        for (m, x) in mu.iter_mut().zip(s) {
            *m += x;
        }
    }
    mu.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(d, d);
    for s in &samples {
        for i in 0..d {
            let di = s[i] - mu[i];
            for j in 0..=i {
                cov[(i, j)] += di * (s[j] - mu[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(ContributionBelief {
        mu,
        sigma: SymMatrix::new(cov)?,
        provenance: Provenance::MonteCarloApprox,
    })
}
