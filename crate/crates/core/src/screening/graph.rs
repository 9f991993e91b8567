use serde::{Deserialize, Serialize};

use super::law::{false_positive_prob, ScreeningLaw};
use crate::error::{Error, Result};
use crate::matrix::{Role, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Undirected weighted graph on `p` vertices; edges are stored with `i < j`
/// in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeGraph {
    pub p: usize,
    pub edges: Vec<Edge>,
    pub threshold_used: f64,
}

impl EdgeGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.p];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    pub fn complete_pair_count(&self) -> usize {
        self.p * self.p.saturating_sub(1) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub graph: EdgeGraph,
    pub n_e: usize,
    /// Vertices with degree at least `hub_degree`, ascending.
    pub hubs: Vec<usize>,
    pub hub_degree: usize,
    /// The analytic law at the run's `(n, p, ρ)`, when the sample size is
    /// known and the point lies in the law's domain.
    pub law: Option<ScreeningLaw>,
}

/// Edge `(i, j)` iff `|m_ij| ≥ ρ`, `i ≠ j`.
///
/// `n_samples` is the sample size behind `m`; when given, the screening law
/// is evaluated at `(n, p, ρ)`. Hubs are reported at degree 1.
pub fn screen_edges(m: &SymMatrix, rho: f64, n_samples: Option<usize>) -> Result<ScreenResult> {
    m.expect_role(&[Role::Correlation, Role::PartialCorrelation], "correlation or partial correlation")?;
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("threshold must be >= 0, got {rho}")));
    }
    let p = m.dim();
    let vals = m.values();
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let w = vals[(i, j)];
            if w.abs() >= rho {
                edges.push(Edge { i, j, weight: w });
            }
        }
    }
    let graph = EdgeGraph { p, edges, threshold_used: rho };
    let law = n_samples.and_then(|n| false_positive_prob(n as u64, p as u64, rho).ok());
    Ok(ScreenResult::new(graph, 1, law))
}

impl ScreenResult {
    pub fn new(graph: EdgeGraph, hub_degree: usize, law: Option<ScreeningLaw>) -> Self {
        let n_e = graph.edges.len();
        let hubs = hubs_of(&graph, hub_degree);
        ScreenResult { graph, n_e, hubs, hub_degree, law }
    }
}

/// Vertices of degree `≥ d`, ascending.
pub fn screen_hubs(result: &ScreenResult, d: usize) -> Vec<usize> {
    hubs_of(&result.graph, d)
}

fn hubs_of(graph: &EdgeGraph, d: usize) -> Vec<usize> {
    let d = d.max(1);
    graph.degrees().into_iter().enumerate().filter(|&(_, k)| k >= d).map(|(v, _)| v).collect()
}
