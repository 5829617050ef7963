//! Weighted causal DAGs over features.
//!
//! An edge `i → j` with weight `w` means that one unit of effort on feature
//! `i` moves feature `j` by `w`. The contribution matrix `C` collects the total
//! (direct plus indirect) influence of every feature on every other, summed
//! over all directed paths, so the observable change caused by exogenous effort
//! `e` is `Δx = Cᵀe`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub desirable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// A validated causal DAG. Features keep their declaration order, which fixes
/// the coordinate order of every vector and matrix derived from the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalGraph {
    features: Vec<Feature>,
    edges: Vec<Edge>,
    order: Vec<usize>,
}

/// Graph file layout: features in order, edges referencing features by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub features: Vec<Feature>,
    #[serde(default)]
    pub edges: Vec<NamedEdge>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedEdge {
    pub src: String,
    pub dst: String,
    pub weight: f64,
}

impl CausalGraph {
    /// Validates indices, self-loops, duplicate edges and acyclicity.
    pub fn new(features: Vec<Feature>, edges: Vec<Edge>) -> Result<Self> {
        let d = features.len();
        let mut names = HashSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate feature name {:?}",
                    f.name
                )));
            }
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if e.src >= d || e.dst >= d {
                return Err(Error::InvalidGraph(format!(
                    "edge {} -> {} references a feature outside 0..{d}",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::InvalidGraph(format!(
                    "self-loop on {:?}",
                    features[e.src].name
                )));
            }
            if !e.weight.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge {:?} -> {:?} has non-finite weight",
                    features[e.src].name, features[e.dst].name
                )));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {:?} -> {:?}",
                    features[e.src].name, features[e.dst].name
                )));
            }
        }
        let order = validate_dag(&features, &edges)?;
        Ok(Self {
            features,
            edges,
            order,
        })
    }

    /// Resolves feature names and validates the result.
    pub fn from_file(file: GraphFile) -> Result<Self> {
        let index: BTreeMap<&str, usize> = file
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.name.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Schema(format!("edge references unknown feature {name:?}")))
        };
        let edges = file
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    src: lookup(&e.src)?,
                    dst: lookup(&e.dst)?,
                    weight: e.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.features, edges)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(s).map_err(|e| Error::Schema(format!("graph JSON: {e}")))?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            features: self.features.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| NamedEdge {
                    src: self.features[e.src].name.clone(),
                    dst: self.features[e.dst].name.clone(),
                    weight: e.weight,
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn weight(&self, src: usize, dst: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| e.src == src && e.dst == dst)
            .map(|e| e.weight)
    }

    /// Topological order computed at construction (smallest index first among ready nodes).
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// `A[i][j] = w(i → j)`, zero where no edge exists.
    pub fn adjacency(&self) -> Matrix {
        let d = self.dim();
        let mut a = Matrix::zeros(d, d);
        for e in &self.edges {
            a[(e.src, e.dst)] = e.weight;
        }
        a
    }

    pub fn contribution(&self) -> ContributionMatrix {
        contribution_matrix(&self.adjacency()).expect("adjacency of a validated DAG is nilpotent")
    }

    /// Number of edges on the longest directed path.
    pub fn longest_path(&self) -> usize {
        let mut depth = vec![0usize; self.dim()];
        for &v in &self.order {
            for e in self.edges.iter().filter(|e| e.src == v) {
                depth[e.dst] = depth[e.dst].max(depth[v] + 1);
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

/// Kahn's algorithm, releasing the smallest ready index first so an edgeless
/// graph keeps its input order. On failure one concrete cycle is reported.
pub fn validate_dag(features: &[Feature], edges: &[Edge]) -> Result<Vec<usize>> {
    let d = features.len();
    let mut indeg = vec![0usize; d];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); d];
    for e in edges {
        indeg[e.dst] += 1;
        out[e.src].push(e.dst);
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..d).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() == d {
        return Ok(order);
    }
    // Every unplaced node still has an unplaced predecessor, so walking
    // predecessors must eventually revisit a node.
    let placed: HashSet<usize> = order.iter().copied().collect();
    let start = (0..d)
        .find(|v| !placed.contains(v))
        .expect("some node is unplaced");
    let mut walk = vec![start];
    let mut pos = vec![usize::MAX; d];
    pos[start] = 0;
    let cycle_start = loop {
        let v = *walk.last().unwrap();
        let pred = edges
            .iter()
            .find(|e| e.dst == v && !placed.contains(&e.src))
            .map(|e| e.src)
            .expect("unplaced node has an unplaced predecessor");
        if pos[pred] != usize::MAX {
            break pos[pred];
        }
        pos[pred] = walk.len();
        walk.push(pred);
    };
    let mut cycle: Vec<String> = walk[cycle_start..]
        .iter()
        .rev()
        .map(|&v| features[v].name.clone())
        .collect();
    cycle.push(cycle[0].clone());
    Err(Error::CycleDetected(cycle))
}

/// Total-influence matrix `C = Σ_{k=0}^{d} A^k`, with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionMatrix(Matrix);

impl ContributionMatrix {
    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    /// Contribution vector `C·h` of a classifier `h`.
    pub fn apply(&self, h: &[f64]) -> Result<Vec<f64>> {
        self.0.mul_vec(h)
    }
}

/// Sums matrix powers of a nilpotent adjacency matrix, stopping once a power
/// vanishes (every entry below 1e-15).
pub fn contribution_matrix(a: &Matrix) -> Result<ContributionMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let d = a.rows();
    let mut c = Matrix::identity(d);
    let mut power = Matrix::identity(d);
    for _ in 0..d {
        power = power.matmul(a)?;
        if power.max_abs() < 1e-15 {
            return Ok(ContributionMatrix(c));
        }
        c = c.add(&power)?;
    }
    let tail = power.matmul(a)?.max_abs();
    if tail > 1e-12 * (1.0 + a.max_abs()).powi(d as i32) {
        return Err(Error::Precondition(format!(
            "adjacency matrix is not nilpotent (|A^{}| = {tail:e})",
            d + 1
        )));
    }
    Ok(ContributionMatrix(c))
}

/// Reference value of `C[i][j]` by exhaustive enumeration of directed paths.
pub fn path_oracle(graph: &CausalGraph, i: usize, j: usize) -> f64 {
    if i == j {
        return 1.0;
    }
    fn walk(graph: &CausalGraph, v: usize, target: usize, product: f64) -> f64 {
        graph
            .edges()
            .iter()
            .filter(|e| e.src == v)
            .map(|e| {
                let p = product * e.weight;
                if e.dst == target {
                    p
                } else {
                    walk(graph, e.dst, target, p)
                }
            })
            .sum()
    }
    walk(graph, i, j, 1.0)
}

/// Observable feature change `Δx = Cᵀe` produced by exogenous effort `e`.
pub fn delta_x(c: &ContributionMatrix, e: &[f64]) -> Result<Vec<f64>> {
    check_dim(c.dim(), e.len())?;
    c.0.t_mul_vec(e)
}

/// True when no feature has both incoming and outgoing edges.
pub fn is_bipartite_causal(graph: &CausalGraph) -> bool {
    let sources: HashSet<usize> = graph.edges().iter().map(|e| e.src).collect();
    graph.edges().iter().all(|e| !sources.contains(&e.dst))
}
