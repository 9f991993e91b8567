//! Sample statistics: covariance, correlation, precision, partial
//! correlation and the unit-sphere projection of the data.
//!
//! All functions are pure. Internal arithmetic is sequential, so results are
//! bitwise reproducible for a given input.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` samples (rows) of `p` variables (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    column_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::TooFewSamples(values.nrows()));
        }
        if values.ncols() == 0 {
            return Err(Error::config("p", "data needs at least one column"));
        }
        for col in 0..values.ncols() {
            for row in 0..values.nrows() {
                if !values[(row, col)].is_finite() {
                    return Err(Error::NonFiniteInput { row, col });
                }
            }
        }
        Ok(DataMatrix { values, column_names: None })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: names.len() });
        }
        self.column_names = Some(names);
        Ok(self)
    }

    /// Sample count.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Variable count.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Copy with every column shifted to zero mean.
    pub fn centered(&self) -> DMatrix<f64> {
        let mut out = self.values.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        out
    }

    /// Copy with column `j` multiplied by `scale[j]`.
    pub fn scale_columns(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: scale.len() });
        }
        let mut values = self.values.clone();
        for (mut col, s) in values.column_iter_mut().zip(scale) {
            col *= *s;
        }
        DataMatrix::new(values)
    }
}

/// What a symmetric matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Covariance,
    Correlation,
    Precision,
    PartialCorrelation,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Covariance => "covariance",
            Role::Correlation => "correlation",
            Role::Precision => "precision",
            Role::PartialCorrelation => "partial-correlation",
        }
    }
}

/// Relative cut below which a matrix entry counts as zero:
/// `|v| <= tol * max|entry|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTolerance(pub f64);

impl Default for ZeroTolerance {
    fn default() -> Self {
        ZeroTolerance(1e-12)
    }
}

impl ZeroTolerance {
    pub fn is_zero(self, value: f64, max_abs: f64) -> bool {
        value.abs() <= self.0 * max_abs
    }
}

/// Symmetric `p × p` matrix tagged with its [`Role`].
///
/// Construction symmetrizes the input as `(M + Mᵀ)/2`; the largest
/// `|m_ij − m_ji|` seen before that is kept in [`SymMatrix::asymmetry`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    values: DMatrix<f64>,
    role: Role,
    rank_hint: Option<usize>,
    asymmetry: f64,
}

impl SymMatrix {
    pub fn new(values: DMatrix<f64>, role: Role) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::DimensionMismatch { expected: values.nrows(), found: values.ncols() });
        }
        if values.nrows() == 0 {
            return Err(Error::config("p", "matrix must be at least 1x1"));
        }
        let p = values.nrows();
        let mut asymmetry = 0.0f64;
        for j in 0..p {
            for i in 0..p {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput { row: i, col: j });
                }
                asymmetry = asymmetry.max((v - values[(j, i)]).abs());
            }
        }
        let values = if asymmetry > 0.0 { (&values + values.transpose()) * 0.5 } else { values };
        Ok(SymMatrix { values, role, rank_hint: None, asymmetry })
    }

    pub fn identity(p: usize, role: Role) -> Self {
        SymMatrix { values: DMatrix::identity(p, p), role, rank_hint: None, asymmetry: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Retained rank when the matrix came from a pseudoinverse.
    pub fn rank_hint(&self) -> Option<usize> {
        self.rank_hint
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Upper-triangle off-diagonal pairs `(i, j)`, `i < j`, that are
    /// nonzero under `tol`.
    pub fn support(&self, tol: ZeroTolerance) -> Vec<(usize, usize)> {
        let max_abs = self.max_abs();
        let p = self.dim();
        let mut out = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                if !tol.is_zero(self.values[(i, j)], max_abs) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.values.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub(crate) fn with_rank_hint(mut self, rank: usize) -> Self {
        self.rank_hint = Some(rank);
        self
    }

    pub(crate) fn expect_role(&self, accepted: &[Role], expected: &'static str) -> Result<()> {
        if accepted.contains(&self.role) {
            Ok(())
        } else {
            Err(Error::RoleMismatch { expected, found: self.role.name() })
        }
    }
}

/// `p` unit vectors, one per variable, each centered and normalized so that
/// inner products are correlations.
///
/// Columns are stored as `n`-vectors lying in the `(n−1)`-dimensional
/// hyperplane orthogonal to the all-ones vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSphereMatrix {
    columns: DMatrix<f64>,
    source_n: usize,
    rank: Option<usize>,
}

impl UnitSphereMatrix {
    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn p(&self) -> usize {
        self.columns.ncols()
    }

    /// Numerical rank of the correlation matrix, for vectors built by
    /// [`pseudo_partial_projection`].
    pub fn rank(&self) -> Option<usize> {
        self.rank
    }

    /// Ambient length of each stored vector.
    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn inner(&self, i: usize, j: usize) -> f64 {
        self.columns.column(i).dot(&self.columns.column(j))
    }

    pub fn gram(&self) -> DMatrix<f64> {
        self.columns.transpose() * &self.columns
    }
}

/// Unbiased sample covariance `(1/(n−1)) Σ_k (X_k − μ̂)(X_k − μ̂)ᵀ`.
pub fn sample_covariance(data: &DataMatrix) -> Result<SymMatrix> {
    let n = data.n();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let centered = data.centered();
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    SymMatrix::new(cov, Role::Covariance)
}

/// `R = diag(Σ)^{-1/2} Σ diag(Σ)^{-1/2}`, unit diagonal, entries clamped to `[-1, 1]`.
pub fn correlation_matrix(cov: &SymMatrix) -> Result<SymMatrix> {
    cov.expect_role(&[Role::Covariance], "covariance")?;
    let diag = positive_diagonal(cov.values(), Error::ZeroVariance)?;
    let r = rescale(cov.values(), &diag, |_, _| false);
    Ok(SymMatrix { values: r, role: Role::Correlation, rank_hint: None, asymmetry: cov.asymmetry })
}

/// How [`precision`] inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InverseMode {
    /// Exact inverse; fails on numerically singular input.
    Strict,
    /// Moore-Penrose pseudoinverse through a symmetric eigendecomposition.
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionOptions {
    /// Strict mode rejects inputs whose eigenvalue ratio exceeds this.
    pub condition_cap: f64,
    /// Relative eigenvalue cut for the pseudoinverse; `None` uses
    /// `p · ε · λ_max`.
    pub rank_cutoff: Option<f64>,
}

impl Default for PrecisionOptions {
    fn default() -> Self {
        PrecisionOptions { condition_cap: 1e12, rank_cutoff: None }
    }
}

/// Inverse (or pseudoinverse) of a covariance or correlation matrix.
pub fn precision(m: &SymMatrix, mode: InverseMode) -> Result<SymMatrix> {
    precision_with(m, mode, &PrecisionOptions::default())
}

pub fn precision_with(m: &SymMatrix, mode: InverseMode, opts: &PrecisionOptions) -> Result<SymMatrix> {
    m.expect_role(&[Role::Covariance, Role::Correlation], "covariance or correlation")?;
    let p = m.dim();
    let eig = SymmetricEigen::new(m.values().clone());
    let lmax = eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lmin = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    match mode {
        InverseMode::Strict => {
            let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
            if !(condition <= opts.condition_cap) {
                return Err(Error::SingularMatrix { condition });
            }
            let inv = nalgebra::Cholesky::new(m.values().clone())
                .ok_or(Error::SingularMatrix { condition })?
                .inverse();
            Ok(SymMatrix::new(inv, Role::Precision)?.with_rank_hint(p))
        }
        InverseMode::Pseudo => {
            let rel = opts.rank_cutoff.unwrap_or(p as f64 * f64::EPSILON);
            let cut = rel * lmax.max(0.0);
            let mut inv = DMatrix::zeros(p, p);
            let mut rank = 0;
            for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
                if lambda > cut {
                    rank += 1;
                    let v = eig.eigenvectors.column(k);
                    inv.ger(1.0 / lambda, &v, &v, 1.0);
                }
            }
            Ok(SymMatrix::new(inv, Role::Precision)?.with_rank_hint(rank))
        }
    }
}

/// `P = diag(Ω)^{-1/2} Ω diag(Ω)^{-1/2}`.
///
/// The conventional minus sign on off-diagonal partial correlations is not
/// applied: `P_ij` carries the sign of `ω_ij`. Screening only looks at
/// magnitudes, so this does not affect edge sets. Entries of `Ω` that are
/// zero under the default [`ZeroTolerance`] are written as exact zeros, so
/// the support of the output equals the support of the input.
pub fn partial_correlation(prec: &SymMatrix) -> Result<SymMatrix> {
    partial_correlation_with(prec, ZeroTolerance::default())
}

pub fn partial_correlation_with(prec: &SymMatrix, tol: ZeroTolerance) -> Result<SymMatrix> {
    prec.expect_role(&[Role::Precision], "precision")?;
    let diag = positive_diagonal(prec.values(), Error::NonPositiveDiagonal)?;
    let max_abs = prec.max_abs();
    let vals = prec.values();
    let p = rescale(vals, &diag, |i, j| tol.is_zero(vals[(i, j)], max_abs));
    Ok(SymMatrix { values: p, role: Role::PartialCorrelation, rank_hint: prec.rank_hint, asymmetry: prec.asymmetry })
}

/// Center and normalize each column: `u_i = (x_i − x̄_i)/‖x_i − x̄_i‖`.
pub fn zscore_project(data: &DataMatrix) -> Result<UnitSphereMatrix> {
    let reference: Vec<f64> = data.values().column_iter().map(|c| c.amax()).collect();
    let mut cols = data.centered();
    normalize_columns(&mut cols, &reference, Error::ZeroVariance)?;
    Ok(UnitSphereMatrix { columns: cols, source_n: data.n(), rank: None })
}

/// Unit vectors whose Gram matrix is the partial correlation built from the
/// Moore-Penrose pseudoinverse of the sample correlation matrix.
///
/// With `U` the `n × p` matrix of [`zscore_project`] columns, `R = UᵀU` and
/// `R⁺ = Uᵀ (UUᵀ)⁺ (UUᵀ)⁺ U`, so `R⁺ = YᵀY` with `Y = (UUᵀ)⁺ U`. Only an
/// `n × n` eigendecomposition is needed, which is what makes `n ≪ p`
/// screening cheap.
pub fn pseudo_partial_projection(data: &DataMatrix) -> Result<UnitSphereMatrix> {
    let u = zscore_project(data)?;
    let n = u.dim();
    let g = u.columns() * u.columns().transpose();
    let eig = SymmetricEigen::new(g);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = n as f64 * f64::EPSILON * lmax;
    let mut g_pinv = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cut {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            g_pinv.ger(1.0 / lambda, &v, &v, 1.0);
        }
    }
    let mut y = g_pinv * u.columns();
    let reference: Vec<f64> = y.column_iter().map(|c| c.amax()).collect();
    normalize_columns(&mut y, &reference, Error::NonPositiveDiagonal)?;
    Ok(UnitSphereMatrix { columns: y, source_n: data.n(), rank: Some(rank) })
}

fn normalize_columns(cols: &mut DMatrix<f64>, reference: &[f64], err: fn(usize) -> Error) -> Result<()> {
    let root_n = (cols.nrows() as f64).sqrt();
    for (j, mut col) in cols.column_iter_mut().enumerate() {
        let norm = col.norm();
        // a constant column leaves only rounding residue after centering
        if !(norm > 1e-13 * reference[j] * root_n) {
            return Err(err(j));
        }
        col /= norm;
    }
    Ok(())
}

fn positive_diagonal(m: &DMatrix<f64>, err: fn(usize) -> Error) -> Result<Vec<f64>> {
    (0..m.nrows())
        .map(|i| {
            let d = m[(i, i)];
            if d > 0.0 {
                Ok(d)
            } else {
                Err(err(i))
            }
        })
        .collect()
}

fn rescale(m: &DMatrix<f64>, diag: &[f64], force_zero: impl Fn(usize, usize) -> bool) -> DMatrix<f64> {
    let p = m.nrows();
    DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if force_zero(i, j) {
            0.0
        } else {
            (m[(i, j)] / (diag[i] * diag[j]).sqrt()).clamp(-1.0, 1.0)
        }
    })
}
