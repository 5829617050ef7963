//! The cardiovascular case study: mean contributions per classifier and the
//! desirable effort share β across uncertainty levels.

use stratcls::case_study::{reproduce_table_mu, run_sweep, SweepConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for row in reproduce_table_mu() {
        println!(
            "{:>8}: μ = {:?}  ℓ2(D) = {:.4}  ℓ2(U) = {:.4}",
            row.classifier.to_string(),
            row.mu,
            row.l2_desirable,
            row.l2_undesirable
        );
    }
    let config = SweepConfig {
        alphas: vec![1.0],
        deltas: vec![0.1, 0.3, 0.5],
        ..Default::default()
    };
    println!("\nclassifier  σ     δ    β");
    for r in run_sweep(&config)? {
        let beta = r
            .beta
            .map(|b| format!("{b:.4}"))
            .unwrap_or_else(|| format!("infeasible (δ* = {:.3})", r.threshold_delta));
        println!(
            "{:>8}  {:<4}  {:<3}  {beta}",
            r.classifier.to_string(),
            r.sigma,
            r.delta
        );
    }
    Ok(())
}
