//! Model 3 (uncertain weights *and* classifier) on the smallest possible
//! instance: one edge weight `ω` and one classifier weight `h`, both
//! independent standard normals. The probability of passing at effort `e`,
//! `f(e) = P[ω·h·e ≥ α]`, is zero at `e = 0` and tends to `1/2`. It is
//! neither concave nor convex, so the agent's problem is not a convex
//! program. This module estimates `f` by Monte Carlo and searches a grid
//! for a statistically significant failure of midpoint concavity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::derive_seed;
use crate::error::{Error, Result};

/// Smallest sample count accepted per effort level.
pub const MIN_SAMPLES: usize = 100_000;

/// How many combined standard errors a chord gap must exceed.
pub const SIGNIFICANCE_Z: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassEstimate {
    pub p: f64,
    /// Binomial standard error `√(p(1−p)/n)`.
    pub se: f64,
    pub n: usize,
}

/// Monte-Carlo estimate of `P[ω·h·e ≥ α]` with `ω, h ~ N(0, 1)` iid.
pub fn mc_pass_probability_model3(e: f64, alpha: f64, n: usize, seed: u64) -> Result<PassEstimate> {
    if n < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    if !e.is_finite() || !alpha.is_finite() {
        return Err(Error::Domain("effort and threshold must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n {
        let omega: f64 = StandardNormal.sample(&mut rng);
        let h: f64 = StandardNormal.sample(&mut rng);
        if omega * h * e >= alpha {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    Ok(PassEstimate {
        p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
        n,
    })
}

/// The grid `e = 0.1, 0.2, …, 20`.
pub fn default_grid() -> Vec<f64> {
    (1..=200).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub e: f64,
    pub estimate: PassEstimate,
}

/// Estimates `f` at every grid point in parallel; point `i` uses the seed
/// `derive_seed(seed, i)`, so the result does not depend on thread count.
pub fn scan_model3(grid: &[f64], alpha: f64, n: usize, seed: u64) -> Result<Vec<ScanPoint>> {
    grid.par_iter()
        .enumerate()
        .map(|(i, &e)| {
            Ok(ScanPoint {
                e,
                estimate: mc_pass_probability_model3(e, alpha, n, derive_seed(seed, i as u64))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonConcavity {
    pub e1: f64,
    pub e2: f64,
    pub midpoint: f64,
    pub f1: f64,
    pub f2: f64,
    pub f_mid: f64,
    /// `(f1 + f2)/2 − f_mid`; positive means the midpoint lies below the chord.
    pub gap: f64,
    /// Standard error of the gap, `√(se1²/4 + se2²/4 + se_mid²)`.
    pub se: f64,
    pub z: f64,
}

/// Most significant midpoint-concavity violation among grid pairs whose
/// midpoint is itself a grid point, provided it exceeds `SIGNIFICANCE_Z`
/// combined standard errors.
pub fn find_nonconcavity(scan: &[ScanPoint]) -> Option<NonConcavity> {
    let mut best: Option<NonConcavity> = None;
    for i in 0..scan.len() {
        for j in (i + 2..scan.len()).step_by(2) {
            let (a, b, m) = (&scan[i], &scan[j], &scan[(i + j) / 2]);
            let mid = 0.5 * (a.e + b.e);
            if (m.e - mid).abs() > 1e-12 * mid.abs().max(1.0) {
                continue;
            }
            let gap = 0.5 * (a.estimate.p + b.estimate.p) - m.estimate.p;
            let se = (0.25 * a.estimate.se.powi(2)
                + 0.25 * b.estimate.se.powi(2)
                + m.estimate.se.powi(2))
            .sqrt();
            if !(se > 0.0) || gap <= SIGNIFICANCE_Z * se {
                continue;
            }
            let z = gap / se;
            if best.is_none_or(|w| z > w.z) {
                best = Some(NonConcavity {
                    e1: a.e,
                    e2: b.e,
                    midpoint: m.e,
                    f1: a.estimate.p,
                    f2: b.estimate.p,
                    f_mid: m.estimate.p,
                    gap,
                    se,
                    z,
                });
            }
        }
    }
    best
}
