//! When the chance-constrained ℓ2 response is guaranteed β-desirable.
//!
//! With a diagonal covariance whose entries are all equal, the optimum is
//! parallel to `μ` (the denominators `k1 + k2·σ²` share a common value). Its
//! desirable share is therefore `‖μ_D‖/‖μ‖`, and β-desirability reduces to
//! `‖μ_D‖ ≥ β/√(1−β²)·‖μ_U‖`.

use super::belief::ContributionBelief;
use crate::agent_model::{check_beta, Partition};
use crate::complete_info::TIE_SLACK;
use crate::error::{check_dim, Error, Result};

/// Diagonal entries may differ by this much (relative to `max(1, σ²)`) and
/// still count as a common uncertainty level.
pub const EQUAL_UNCERTAINTY_TOL: f64 = 1e-9;

/// Evaluates `‖μ_D‖·√(1−β²) ≥ β·‖μ_U‖`, the cross-multiplied form of the
/// condition, which stays finite at `β = 1`.
pub fn check_beta_condition_diag(
    belief: &ContributionBelief,
    partition: &Partition,
    beta: f64,
) -> Result<bool> {
    check_dim(belief.dim(), partition.dim())?;
    check_beta(beta)?;
    let sigma = belief.sigma.as_matrix();
    if !sigma.is_diagonal() {
        return Err(Error::Precondition("covariance must be diagonal".into()));
    }
    let diag = sigma.diag();
    let top = diag.iter().copied().fold(1.0f64, f64::max);
    if diag
        .iter()
        .any(|s| (s - diag[0]).abs() > EQUAL_UNCERTAINTY_TOL * top)
    {
        return Err(Error::Precondition(
            "all features must share one uncertainty level".into(),
        ));
    }
    let (d_norm, u_norm) = partition.split_norms(&belief.mu);
    let lhs = d_norm * ((1.0 - beta) * (1.0 + beta)).sqrt();
    let rhs = beta * u_norm;
    Ok(lhs >= rhs - TIE_SLACK * lhs.max(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent_model::beta_of;
    use crate::incomplete_info::belief::Provenance;
    use crate::incomplete_info::l2::best_response_chance_l2_diag;
    use crate::numerics::SymMatrix;

    fn belief(mu: Vec<f64>, diag: &[f64]) -> ContributionBelief {
        ContributionBelief::new(mu, SymMatrix::from_diag(diag), Provenance::Given).unwrap()
    }

    #[test]
    fn norms_from_the_mean_row() {
        // ‖μ_D‖ = 1.28, ‖μ_U‖ = 1: 1.28 ≥ 0.6/0.8 = 0.75.
        let b = belief(vec![1.28, 0.0, 0.6, 0.8], &[0.3; 4]);
        let part = Partition::new(vec![true, true, false, false]);
        assert!(check_beta_condition_diag(&b, &part, 0.6).unwrap());
        assert!(!check_beta_condition_diag(&b, &part, 0.9).unwrap());
    }

    #[test]
    fn zero_undesirable_mean_always_passes() {
        let b = belief(vec![0.5, 0.0], &[1.0, 1.0]);
        let part = Partition::new(vec![true, false]);
        for beta in [0.1, 0.5, 0.99, 1.0] {
            assert!(check_beta_condition_diag(&b, &part, beta).unwrap());
        }
    }

    #[test]
    fn unequal_uncertainty_is_rejected() {
        let b = belief(vec![1.0, 1.0], &[1.0, 2.0]);
        let part = Partition::new(vec![true, false]);
        assert!(matches!(
            check_beta_condition_diag(&b, &part, 0.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn condition_implies_solver_share() {
        let b = belief(vec![1.0, 0.5, 0.4, -0.3], &[0.2; 4]);
        let part = Partition::new(vec![true, true, false, false]);
        let sol = best_response_chance_l2_diag(&b, 1.0, 0.3).unwrap();
        let share = beta_of(&sol.effort, &part).unwrap();
        for beta in [0.5, 0.8, 0.9, 0.95] {
            if check_beta_condition_diag(&b, &part, beta).unwrap() {
                assert!(share >= beta - 1e-12, "β={beta}, share {share}");
            } else {
                assert!(share < beta + 1e-12);
            }
        }
    }
}
