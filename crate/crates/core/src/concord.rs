//! Sparse precision estimation with the CONCORD pseudo-likelihood.
//!
//! The objective, for centered columns `Y_i` and `S = YᵀY`, is
//!
//! `Q(Ω) = −n Σ_i log ω_ii + ½ Σ_i ‖Σ_j ω_ij Y_j‖² + λ Σ_{i<j} |ω_ij|`
//!
//! and `½ Σ_i ‖Σ_j ω_ij Y_j‖² = ½ tr(ΩSΩ)`. It is jointly convex, and each
//! coordinate subproblem has a closed form:
//!
//! * off-diagonal: `ω_ij = −soft(c, λ) / (S_ii + S_jj)` with
//!   `c = Σ_{k≠j} S_jk ω_ki + Σ_{k≠i} S_ik ω_kj`;
//! * diagonal: `ω_ii` is the positive root of `S_ii x² + b x − n = 0` with
//!   `b = Σ_{k≠i} S_ik ω_ki`.
//!
//! The solver sweeps the coordinates cyclically while keeping `W = SΩ`
//! current, so each update costs `O(p)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, Role, SymMatrix, ZeroTolerance};
use crate::screening::EdgeGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordOptions {
    /// Stop once no coordinate moves by more than this in a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Rescale every centered column to `‖Y_i‖² = n` before fitting.
    pub standardize: bool,
}

impl Default for ConcordOptions {
    fn default() -> Self {
        ConcordOptions { tol: 1e-6, max_sweeps: 500, standardize: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcordState {
    pub omega: SymMatrix,
    pub lambda: f64,
    pub sweeps: usize,
    /// Objective at the starting point followed by its value after each sweep.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    /// Largest subgradient-optimality violation over all coordinates,
    /// divided by `n`.
    pub kkt_residual: f64,
}

/// Centered Gram matrix `S = YᵀY` and sample count.
#[derive(Debug, Clone)]
struct Problem {
    s: DMatrix<f64>,
    n: f64,
}

impl Problem {
    fn new(data: &DataMatrix, standardize: bool) -> Result<Self> {
        let mut y = data.centered();
        if standardize {
            let n = data.n() as f64;
            for (j, mut col) in y.column_iter_mut().enumerate() {
                let norm = col.norm();
                if !(norm > 0.0) {
                    return Err(Error::Diverged(format!("column {j} has zero variance")));
                }
                col *= n.sqrt() / norm;
            }
        }
        Ok(Problem { s: y.transpose() * &y, n: data.n() as f64 })
    }

    fn p(&self) -> usize {
        self.s.nrows()
    }

    /// Diagonal starting point: the exact minimizer over diagonal `Ω`.
    fn diagonal_start(&self) -> Result<DMatrix<f64>> {
        let p = self.p();
        let mut omega = DMatrix::zeros(p, p);
        for i in 0..p {
            let sii = self.s[(i, i)];
            if !(sii > 0.0) {
                return Err(Error::Diverged(format!("column {i} has zero variance")));
            }
            omega[(i, i)] = (self.n / sii).sqrt();
        }
        Ok(omega)
    }

    fn objective(&self, omega: &DMatrix<f64>, lambda: f64) -> Result<f64> {
        let p = self.p();
        let w = &self.s * omega;
        let mut log_term = 0.0;
        let mut quad = 0.0;
        let mut penalty = 0.0;
        for i in 0..p {
            let d = omega[(i, i)];
            if !(d > 0.0) {
                return Err(Error::NonPositiveDiagonal(i));
            }
            log_term += d.ln();
            for j in 0..p {
                quad += omega[(i, j)] * w[(j, i)];
                if j > i {
                    penalty += omega[(i, j)].abs();
                }
            }
        }
        Ok(-self.n * log_term + 0.5 * quad + lambda * penalty)
    }

    fn lambda_max(&self) -> Result<f64> {
        let omega = self.diagonal_start()?;
        let p = self.p();
        let mut best = 0.0f64;
        for i in 0..p {
            for j in (i + 1)..p {
                best = best.max(self.s[(i, j)].abs() * (omega[(i, i)] + omega[(j, j)]));
            }
        }
        Ok(best)
    }

    fn fit(&self, lambda: f64, start: DMatrix<f64>, opts: &ConcordOptions) -> Result<ConcordState> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::config("tol", format!("must be > 0, got {}", opts.tol)));
        }
        let p = self.p();
        let s = &self.s;
        for i in 0..p {
            if !(s[(i, i)] > 0.0) {
                return Err(Error::Diverged(format!("column {i} has zero variance")));
            }
        }
        let mut omega = start;
        let mut w = s * &omega;
        let mut trace = vec![self.objective(&omega, lambda)?];
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < opts.max_sweeps {
            let mut max_change = 0.0f64;
            for i in 0..p {
                for j in (i + 1)..p {
                    let old = omega[(i, j)];
                    let c = w[(j, i)] - s[(j, j)] * old + w[(i, j)] - s[(i, i)] * old;
                    let new = -soft_threshold(c, lambda) / (s[(i, i)] + s[(j, j)]);
                    let delta = new - old;
                    if delta != 0.0 {
                        omega[(i, j)] = new;
                        omega[(j, i)] = new;
                        for k in 0..p {
                            w[(k, j)] += delta * s[(k, i)];
                            w[(k, i)] += delta * s[(k, j)];
                        }
                        max_change = max_change.max(delta.abs());
                    }
                }
                let old = omega[(i, i)];
                let sii = s[(i, i)];
                let b = w[(i, i)] - sii * old;
                let new = (-b + (b * b + 4.0 * sii * self.n).sqrt()) / (2.0 * sii);
                if !(new > 0.0 && new.is_finite()) {
                    return Err(Error::Diverged(format!("diagonal update for variable {i} has no positive root")));
                }
                let delta = new - old;
                if delta != 0.0 {
                    omega[(i, i)] = new;
                    for k in 0..p {
                        w[(k, i)] += delta * s[(k, i)];
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            sweeps += 1;
            w = s * &omega;
            trace.push(self.objective(&omega, lambda)?);
            if max_change <= opts.tol {
                converged = true;
                break;
            }
        }
        let kkt_residual = self.kkt(&omega, &w, lambda);
        Ok(ConcordState {
            omega: SymMatrix::new(omega, Role::Precision)?,
            lambda,
            sweeps,
            objective_trace: trace,
            converged,
            kkt_residual,
        })
    }

    fn kkt(&self, omega: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64) -> f64 {
        let p = self.p();
        let mut worst = 0.0f64;
        for i in 0..p {
            worst = worst.max((w[(i, i)] - self.n / omega[(i, i)]).abs());
            for j in (i + 1)..p {
                let g = w[(i, j)] + w[(j, i)];
                let x = omega[(i, j)];
                let v = if x == 0.0 { (g.abs() - lambda).max(0.0) } else { (g + lambda * x.signum()).abs() };
                worst = worst.max(v);
            }
        }
        worst / self.n
    }
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// Evaluates the pseudo-likelihood objective on the centered data.
pub fn concord_objective(omega: &SymMatrix, data: &DataMatrix, lambda: f64) -> Result<f64> {
    if omega.dim() != data.p() {
        return Err(Error::DimensionMismatch { expected: data.p(), found: omega.dim() });
    }
    Problem::new(data, false)?.objective(omega.values(), lambda)
}

/// Smallest `λ` whose fit from the diagonal start stays diagonal:
/// `max_{i<j} |S_ij| (ω_ii + ω_jj)` with `ω_ii = √(n/S_ii)`.
pub fn lambda_max(data: &DataMatrix) -> Result<f64> {
    Problem::new(data, false)?.lambda_max()
}

pub fn lambda_max_with(data: &DataMatrix, opts: &ConcordOptions) -> Result<f64> {
    Problem::new(data, opts.standardize)?.lambda_max()
}

/// Fits from the diagonal starting point.
pub fn concord_fit(data: &DataMatrix, lambda: f64, opts: &ConcordOptions) -> Result<ConcordState> {
    let problem = Problem::new(data, opts.standardize)?;
    let start = problem.diagonal_start()?;
    problem.fit(lambda, start, opts)
}

/// Fits along a strictly decreasing grid, each fit starting from the
/// previous solution.
pub fn concord_path(data: &DataMatrix, lambda_grid: &[f64], opts: &ConcordOptions) -> Result<Vec<ConcordState>> {
    if let Some(k) = lambda_grid.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::config("lambda_grid", format!("entry {k} is not positive")));
    }
    if lambda_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::config("lambda_grid", "must be strictly decreasing"));
    }
    let problem = Problem::new(data, opts.standardize)?;
    let mut start = problem.diagonal_start()?;
    let mut out = Vec::with_capacity(lambda_grid.len());
    for (index, &lambda) in lambda_grid.iter().enumerate() {
        let state = problem
            .fit(lambda, start, opts)
            .map_err(|e| Error::PathFit { index, source: Box::new(e) })?;
        start = state.omega.values().clone();
        out.push(state);
    }
    Ok(out)
}

/// Off-diagonal support comparison against a true precision matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportMetrics {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    /// Fraction of true edges estimated with the correct sign; a missed
    /// edge counts as a disagreement. 1 when the truth has no edges.
    pub sign_agreement_rate: f64,
    /// 1 when both supports are empty.
    pub f1: f64,
}

/// Anything with a signed off-diagonal support on `p` vertices.
pub trait SignedSupport {
    fn vertex_count(&self) -> usize;
    /// `(i, j, sign)` with `i < j` for every nonzero off-diagonal entry.
    fn signed_support(&self, tol: ZeroTolerance) -> Vec<(usize, usize, f64)>;
}

impl SignedSupport for SymMatrix {
    fn vertex_count(&self) -> usize {
        self.dim()
    }

    fn signed_support(&self, tol: ZeroTolerance) -> Vec<(usize, usize, f64)> {
        self.support(tol).into_iter().map(|(i, j)| (i, j, self.get(i, j).signum())).collect()
    }
}

impl SignedSupport for ConcordState {
    fn vertex_count(&self) -> usize {
        self.omega.dim()
    }

    fn signed_support(&self, tol: ZeroTolerance) -> Vec<(usize, usize, f64)> {
        self.omega.signed_support(tol)
    }
}

impl SignedSupport for EdgeGraph {
    fn vertex_count(&self) -> usize {
        self.p
    }

    fn signed_support(&self, _tol: ZeroTolerance) -> Vec<(usize, usize, f64)> {
        self.edges.iter().map(|e| (e.i, e.j, e.weight.signum())).collect()
    }
}

pub fn support_metrics(estimated: &impl SignedSupport, truth: &SymMatrix) -> Result<SupportMetrics> {
    support_metrics_with(estimated, truth, ZeroTolerance::default())
}

pub fn support_metrics_with(estimated: &impl SignedSupport, truth: &SymMatrix, tol: ZeroTolerance) -> Result<SupportMetrics> {
    truth.expect_role(&[Role::Precision], "precision")?;
    if estimated.vertex_count() != truth.dim() {
        return Err(Error::DimensionMismatch { expected: truth.dim(), found: estimated.vertex_count() });
    }
    let est: std::collections::HashMap<(usize, usize), f64> =
        estimated.signed_support(tol).into_iter().map(|(i, j, s)| ((i.min(j), i.max(j)), s)).collect();
    let real = truth.signed_support(tol);
    let mut tp = 0;
    let mut agree = 0;
    for &(i, j, sign) in &real {
        if let Some(&s) = est.get(&(i, j)) {
            tp += 1;
            if s == sign {
                agree += 1;
            }
        }
    }
    let fp = est.len() - tp;
    let fn_ = real.len() - tp;
    let sign_agreement_rate = if real.is_empty() { 1.0 } else { agree as f64 / real.len() as f64 };
    let denom = 2 * tp + fp + fn_;
    let f1 = if denom == 0 { 1.0 } else { 2.0 * tp as f64 / denom as f64 };
    Ok(SupportMetrics { true_positive: tp, false_positive: fp, false_negative: fn_, sign_agreement_rate, f1 })
}
