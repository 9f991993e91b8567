//! Thresholded correlation graphs as Euclidean ball graphs.
//!
//! For unit vectors `‖u_i − u_j‖² = 2(1 − r_ij)` and
//! `‖u_i + u_j‖² = 2(1 + r_ij)`, so `|r_ij| ≥ ρ` exactly when one of `u_j`,
//! `−u_j` lies within `√(2(1−ρ))` of `u_i`. Indexing the mirrored point set
//! `{±u_j}` once turns screening into `p` fixed-radius queries instead of a
//! dense `p × p` correlation matrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{Edge, EdgeGraph};
use super::kdtree::KdTree;
use crate::error::{Error, Result};
use crate::matrix::UnitSphereMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BallMode {
    /// Same edge set as dense thresholding.
    Exact,
    /// Cells are pruned at radius `r/(1+eps)` and points accepted up to
    /// `r(1+eps)`: every pair within `r/(1+eps)` is found, nothing beyond
    /// `r(1+eps)` is reported.
    Approx(f64),
}

/// Relative slack on the candidate radius in exact mode; candidates are
/// then decided on the inner product itself.
const EXACT_SLACK: f64 = 1e-9;

pub fn ball_graph(u: &UnitSphereMatrix, rho: f64, mode: BallMode) -> Result<EdgeGraph> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("ball-graph threshold must lie in (0, 1), got {rho}")));
    }
    let p = u.p();
    let dim = u.dim();
    let cols = u.columns();
    let mut points = Vec::with_capacity(2 * p * dim);
    for j in 0..p {
        points.extend(cols.column(j).iter().copied());
        points.extend(cols.column(j).iter().map(|v| -v));
    }
    let tree = KdTree::new(points, dim);
    let r2 = 2.0 * (1.0 - rho);
    let (prune_r2, accept_r2, threshold_used) = match mode {
        BallMode::Exact => {
            let r2 = r2 * (1.0 + EXACT_SLACK) + 1e-12;
            (r2, r2, rho)
        }
        BallMode::Approx(eps) => {
            if !(eps >= 0.0) {
                return Err(Error::Domain(format!("approximation slack must be >= 0, got {eps}")));
            }
            let grow = (1.0 + eps) * (1.0 + eps);
            (r2 / grow, r2 * grow, (1.0 - grow * (1.0 - rho)).max(0.0))
        }
    };
    let per_vertex: Vec<Vec<Edge>> = (0..p)
        .into_par_iter()
        .map(|i| {
            let query: Vec<f64> = cols.column(i).iter().copied().collect();
            let mut found = Vec::new();
            tree.range(&query, prune_r2, accept_r2, |k, _| {
                let j = k / 2;
                if j > i {
                    found.push(j);
                }
            });
            found.sort_unstable();
            found.dedup();
            found
                .into_iter()
                .filter_map(|j| {
                    let weight = u.inner(i, j);
                    let keep = match mode {
                        BallMode::Exact => weight.abs() >= rho,
                        BallMode::Approx(_) => true,
                    };
                    keep.then_some(Edge { i, j, weight })
                })
                .collect()
        })
        .collect();
    Ok(EdgeGraph { p, edges: per_vertex.into_iter().flatten().collect(), threshold_used })
}
