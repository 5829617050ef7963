//! Chance-constrained best responses: the agent only knows a Gaussian belief
//! about its contribution vector and wants to pass with probability 1 − δ.
//!
//! Compares the ℓ2 KKT solver, the ℓ1 solver and the budget-bisection oracle
//! on the same belief.

use stratcls::agent_model::CostModel;
use stratcls::incomplete_info::{
    best_response_chance_l1, best_response_chance_l2, budget_bisection_oracle, ContributionBelief,
    Provenance,
};
use stratcls::numerics::SymMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let belief = ContributionBelief::new(
        vec![1.0, 1.0],
        SymMatrix::from_diag(&[0.25, 0.25]),
        Provenance::Given,
    )?;
    let (alpha, delta) = (1.0, 0.1);

    let l2 = best_response_chance_l2(&belief, alpha, delta)?;
    let oracle2 =
        budget_bisection_oracle(&belief, &CostModel::unweighted(2.0, 2)?, alpha, delta, 1e-9)?;
    println!(
        "ℓ2: effort {:?}, cost {:.6} (oracle {:.6})",
        &l2.effort[..],
        l2.cost,
        oracle2.cost
    );

    // With uncertainty, spreading effort diversifies risk even under ℓ1 costs.
    let l1 = best_response_chance_l1(&belief, &[1.0, 1.0], alpha, delta)?;
    println!("ℓ1: effort {:?}, cost {:.6}", &l1.effort[..], l1.cost);
    for delta in [0.05, 0.2, 0.4] {
        let s = best_response_chance_l2(&belief, alpha, delta)?;
        println!("δ = {delta}: ℓ2 cost {:.6}", s.cost);
    }
    Ok(())
}
