//! Best responses of a fully informed agent under ℓ1, ℓ2 and ℓ3 costs.
//!
//! Under ℓ1 the agent concentrates on the single feature with the best
//! contribution per unit cost; for p > 1 effort spreads across features.

use stratcls::agent_model::{beta_of, CostModel, Partition};
use stratcls::complete_info::best_response;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Contribution vector C·h and per-feature cost weights.
    let ch = [1.2, 0.9, -0.5, 0.3];
    let weights = vec![1.0, 0.8, 1.0, 2.0];
    let partition = Partition::new(vec![true, true, false, false]);
    let alpha = 1.0;
    for p in [1.0, 2.0, 3.0] {
        let model = CostModel::new(p, weights.clone())?;
        let e = best_response(&ch, &model, alpha)?;
        println!(
            "p = {p}: effort {:?}, cost {:.4}, β = {:.4}",
            &e[..],
            model.cost(&e)?,
            beta_of(&e, &partition)?
        );
    }
    Ok(())
}
