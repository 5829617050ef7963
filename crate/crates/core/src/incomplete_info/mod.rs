//! Best responses when the agent only holds a Gaussian belief about its
//! contribution vector `Ch`.
//!
//! The agent asks to pass with probability at least `1 − δ`. For
//! `δ ≤ 1/2` this chance constraint is a second-order cone, so the
//! minimum-cost response is a convex program. The submodules cover each step:
//!
//! * [`belief`] — building `N(μ, Σ)` from priors over the classifier or the
//!   edge weights.
//! * [`chance`] — the deterministic margin `g(e)` and the feasibility threshold `δ*`.
//! * [`l2`], [`l1`] — minimum ℓ2 and weighted-ℓ1 responses.
//! * [`oracle`] — a slow, solver-independent reference for any ℓp cost.
//! * [`beta`] — when the ℓ2 response is guaranteed β-desirable.
//! * [`model3`] — a Monte-Carlo demonstration that uncertainty in both weights
//!   and classifier breaks concavity.

pub mod belief;
pub mod beta;
pub mod chance;
pub mod l1;
pub mod l2;
pub mod model3;
pub mod oracle;
pub mod projection;

pub use belief::{
    belief_model1, belief_model2_linear, belief_monte_carlo, ContributionBelief, GaussianPrior,
    Provenance, Sampler,
};
pub use beta::check_beta_condition_diag;
pub use chance::{chance_margin, feasibility, feasibility_general, sigma_norm, FeasibilityVerdict};
pub use l1::{best_response_chance_l1, ChanceL1Solution};
pub use l2::{best_response_chance_l2, best_response_chance_l2_diag, ChanceL2Solution};
pub use model3::{
    default_grid, find_nonconcavity, mc_pass_probability_model3, scan_model3, NonConcavity,
    PassEstimate, ScanPoint,
};
pub use oracle::{budget_bisection_oracle, OracleResult};

/// Per-instance seed: SplitMix64 applied to `base + index`, so neighbouring
/// instances get unrelated streams.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
