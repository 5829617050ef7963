//! Below the threshold δ* = Φ(−‖Σ^{−1/2}μ‖) no effort passes with
//! probability 1 − δ; just above it the solver succeeds.

use stratcls::incomplete_info::{
    best_response_chance_l2, feasibility, ContributionBelief, Provenance,
};
use stratcls::numerics::SymMatrix;
use stratcls::Error;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let belief = ContributionBelief::new(
        vec![0.8, 0.3],
        SymMatrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.4]])?,
        Provenance::Given,
    )?;
    let threshold = feasibility(&belief, 1.0, 0.5)?.threshold_delta;
    println!("δ* = {threshold:.6}");
    for factor in [0.9, 0.99, 1.01, 1.1] {
        let delta = threshold * factor;
        match best_response_chance_l2(&belief, 1.0, delta) {
            Ok(s) => println!("δ = {delta:.6}: cost {:.4}", s.cost),
            Err(Error::Infeasible { .. }) => println!("δ = {delta:.6}: infeasible"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
