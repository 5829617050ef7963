//! Builds a small causal graph and prints its contribution matrix together
//! with the observable change produced by one unit of effort per feature.
//!
//! Run with `cargo run --example contribution_matrix`.

use stratcls::causal_graph::{delta_x, CausalGraph};

const GRAPH: &str = r#"{
  "features": [
    {"name": "exercise", "desirable": true},
    {"name": "sleep", "desirable": true},
    {"name": "stress", "desirable": false},
    {"name": "blood_pressure", "desirable": false}
  ],
  "edges": [
    {"src": "exercise", "dst": "stress", "weight": -0.4},
    {"src": "sleep", "dst": "stress", "weight": -0.6},
    {"src": "stress", "dst": "blood_pressure", "weight": 0.7}
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = CausalGraph::from_json_str(GRAPH)?;
    let c = graph.contribution();
    println!("longest path: {}", graph.longest_path());
    println!("contribution matrix C = I + A + A² + …:");
    for (i, name) in graph.names().iter().enumerate() {
        println!("  {name:>15}: {:?}", c.as_matrix().row(i));
    }
    for (i, name) in graph.names().iter().enumerate() {
        let mut e = vec![0.0; graph.dim()];
        e[i] = 1.0;
        println!(
            "unit effort on {name:>15} moves x by {:?}",
            delta_x(&c, &e)?
        );
    }
    Ok(())
}
