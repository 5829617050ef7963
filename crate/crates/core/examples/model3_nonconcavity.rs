//! With an uncertain edge weight and an uncertain classifier weight the pass
//! probability f(e) = P[ω·h·e ≥ α] is not concave in effort. A seeded
//! Monte-Carlo scan finds a significant chord violation.
//!
//! Pass a sample count as the first argument (default 200000).

use stratcls::incomplete_info::{default_grid, find_nonconcavity, scan_model3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(200_000);
    let scan = scan_model3(&default_grid(), 1.0, n, 42)?;
    for point in scan.iter().step_by(20) {
        println!("f({:>4}) ≈ {:.5}", point.e, point.estimate.p);
    }
    match find_nonconcavity(&scan) {
        Some(w) => println!(
            "non-concave: f({}) = {:.5} below chord {:.5} of e = {} and {} (z = {:.1})",
            w.midpoint,
            w.f_mid,
            0.5 * (w.f1 + w.f2),
            w.e1,
            w.e2,
            w.z
        ),
        None => println!("no significant violation at n = {n}"),
    }
    Ok(())
}
