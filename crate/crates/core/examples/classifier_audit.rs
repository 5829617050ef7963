//! Audits a linear classifier on the bundled cardiovascular graph: does the
//! agent's best response put at least a β share of its effort on desirable
//! features?

use stratcls::agent_model::{CostModel, Partition};
use stratcls::case_study::build_cvd_graph;
use stratcls::design_audit::audit_classifier;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = build_cvd_graph();
    let c = graph.contribution();
    let partition = Partition::from_graph(&graph);
    // A classifier that scores only the DM outcome, then one that also
    // rewards diet directly.
    let candidates = [
        ("DM only", vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
        ("DM + diet", vec![0.0, 1.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
    ];
    for p in [1.0, 2.0] {
        let model = CostModel::unweighted(p, graph.dim())?;
        for (label, h) in &candidates {
            let report = audit_classifier(h, &c, &model, &partition, 0.7, 1.0)?;
            println!(
                "p = {p}, {label:>9}: desirable = {}, achieved β = {:?}, cost = {:?}",
                report.desirability_check,
                report.achieved_beta.map(|b| (b * 1e4).round() / 1e4),
                report.cost.map(|x| (x * 1e4).round() / 1e4),
            );
        }
    }
    Ok(())
}
