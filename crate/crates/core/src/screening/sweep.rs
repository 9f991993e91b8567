//! Threshold sweeps of an estimated (partial) correlation matrix against a
//! known edge set.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Role, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub edges: usize,
    /// Screened pairs outside the true edge set.
    pub false_edges: usize,
    /// True edges below the threshold.
    pub missed: usize,
}

impl SweepRow {
    pub fn symmetric_difference(&self) -> usize {
        self.false_edges + self.missed
    }
}

/// Screens `m` at every threshold of `rho_grid` and scores the result
/// against `truth` (pairs `(i, j)` with `i < j`).
pub fn support_sweep(m: &SymMatrix, truth: &[(usize, usize)], rho_grid: &[f64]) -> Result<Vec<SweepRow>> {
    m.expect_role(&[Role::Correlation, Role::PartialCorrelation], "correlation or partial correlation")?;
    let p = m.dim();
    let truth: HashSet<(usize, usize)> = truth.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    if let Some(&(i, j)) = truth.iter().find(|&&(i, j)| j >= p || i == j) {
        return Err(Error::Domain(format!("truth pair ({i}, {j}) is not an off-diagonal pair of a {p}-vertex graph")));
    }
    let mut on = Vec::with_capacity(truth.len());
    let mut off = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            let w = m.get(i, j).abs();
            if truth.contains(&(i, j)) {
                on.push(w);
            } else {
                off.push(w);
            }
        }
    }
    on.sort_by(f64::total_cmp);
    off.sort_by(f64::total_cmp);
    let at_least = |v: &[f64], rho: f64| v.len() - v.partition_point(|&w| w < rho);
    Ok(rho_grid
        .iter()
        .map(|&rho| {
            let hit = at_least(&on, rho);
            let false_edges = at_least(&off, rho);
            SweepRow { rho, edges: hit + false_edges, false_edges, missed: on.len() - hit }
        })
        .collect())
}

/// Row with the smallest symmetric difference; ties go to the larger
/// threshold.
pub fn best_threshold(rows: &[SweepRow]) -> Option<SweepRow> {
    rows.iter()
        .copied()
        .min_by(|a, b| a.symmetric_difference().cmp(&b.symmetric_difference()).then(b.rho.total_cmp(&a.rho)))
}

/// Largest threshold at which the false-edge count reaches `fraction` of
/// the `non_edges` pairs that carry no true edge.
pub fn explosion_onset(rows: &[SweepRow], non_edges: usize, fraction: f64) -> Option<f64> {
    let level = fraction * non_edges as f64;
    rows.iter().filter(|r| r.false_edges as f64 >= level).map(|r| r.rho).max_by(f64::total_cmp)
}
