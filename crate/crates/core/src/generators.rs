//! Ground-truth models and Gaussian samplers.
//!
//! Three precision-matrix families are provided: the finite-difference
//! Poisson field on an `N1 × N2` grid, row-sparse diagonally dominant random
//! matrices, and rank-one Kronecker products of two sparse factors. Every
//! generator is a pure function of its configuration and seed.

use nalgebra::{DMatrix, DVector, LU};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, Role, SymMatrix};
use crate::rng::{child_seed, substream};

/// Grid and noise parameters of the discretized Poisson equation
/// `ΔX = W` on the unit square with zero boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonFieldConfig {
    pub n1: usize,
    pub n2: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub sigma_w: f64,
}

impl PoissonFieldConfig {
    /// `N1 × N2` grid with increments `1/N1`, `1/N2` and unit noise.
    pub fn new(n1: usize, n2: usize) -> Self {
        PoissonFieldConfig { n1, n2, delta1: 1.0 / n1.max(1) as f64, delta2: 1.0 / n2.max(1) as f64, sigma_w: 1.0 }
    }

    pub fn p(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 {
            return Err(Error::config("n1", "must be positive"));
        }
        if self.n2 == 0 {
            return Err(Error::config("n2", "must be positive"));
        }
        for (field, v) in [("delta1", self.delta1), ("delta2", self.delta2), ("sigma_w", self.sigma_w)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be a positive real, got {v}")));
            }
        }
        Ok(())
    }

    /// Weights on the `u1` (`i ± 1`) and `u2` (`j ± 1`) neighbours.
    pub fn neighbour_weights(&self) -> (f64, f64) {
        let d1 = self.delta1 * self.delta1;
        let d2 = self.delta2 * self.delta2;
        (d2 / (2.0 * (d1 + d2)), d1 / (2.0 * (d1 + d2)))
    }

    /// Row-major position of grid node `(i, j)`, `i` the `u1` index.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }
}

/// The Poisson field model with its factored operator `I − A`.
#[derive(Debug, Clone)]
pub struct PoissonField {
    cfg: PoissonFieldConfig,
    operator: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl PoissonField {
    pub fn new(cfg: PoissonFieldConfig) -> Result<Self> {
        cfg.validate()?;
        let operator = poisson_operator(&cfg);
        let lu = LU::new(operator.clone());
        Ok(PoissonField { cfg, operator, lu })
    }

    pub fn config(&self) -> &PoissonFieldConfig {
        &self.cfg
    }

    pub fn p(&self) -> usize {
        self.cfg.p()
    }

    /// `I − A` in row-major grid order.
    pub fn operator(&self) -> &DMatrix<f64> {
        &self.operator
    }

    /// `Ω = (I − A)(I − A)ᵀ / σ_W²`.
    pub fn precision(&self) -> SymMatrix {
        let s2 = self.cfg.sigma_w * self.cfg.sigma_w;
        let omega = &self.operator * self.operator.transpose() / s2;
        SymMatrix::new(omega, Role::Precision).expect("Gram product of a finite operator is finite and square")
    }

    /// Nearest-neighbour (cartesian) edges of the grid, the support of `I − A`.
    ///
    /// In row-major order this is the five-band pattern (offsets `0, ±1,
    /// ±N2`, minus the wrap-around entries). `Ω` itself additionally carries
    /// small second-neighbour entries created by the product.
    pub fn stencil_support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.cfg.n1 {
            for j in 0..self.cfg.n2 {
                let k = self.cfg.index(i, j);
                if j + 1 < self.cfg.n2 {
                    out.push((k, self.cfg.index(i, j + 1)));
                }
                if i + 1 < self.cfg.n1 {
                    out.push((k, self.cfg.index(i + 1, j)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// One realization on the grid: draw `W ~ N(0, σ_W² I)` and solve
    /// `(I − A) X = W`. Returns an `N1 × N2` matrix.
    pub fn sample(&self, seed: u64) -> DMatrix<f64> {
        let x = self.sample_vector(seed, 0);
        DMatrix::from_fn(self.cfg.n1, self.cfg.n2, |i, j| x[self.cfg.index(i, j)])
    }

    /// `n` vectorized realizations as rows; row `k` uses stream `k`.
    pub fn sample_data(&self, n: usize, seed: u64) -> Result<DataMatrix> {
        let rows: Vec<DVector<f64>> = (0..n).into_par_iter().map(|k| self.sample_vector(seed, k as u64)).collect();
        DataMatrix::new(DMatrix::from_fn(n, self.p(), |k, j| rows[k][j]))
    }

    fn sample_vector(&self, seed: u64, key: u64) -> DVector<f64> {
        let mut rng = substream(seed, key);
        let w = DVector::from_fn(self.p(), |_, _| self.cfg.sigma_w * rng.sample::<f64, _>(StandardNormal));
        self.lu.solve(&w).expect("I - A is nonsingular for positive grid increments")
    }
}

fn poisson_operator(cfg: &PoissonFieldConfig) -> DMatrix<f64> {
    let p = cfg.p();
    let (w1, w2) = cfg.neighbour_weights();
    let mut m = DMatrix::identity(p, p);
    for i in 0..cfg.n1 {
        for j in 0..cfg.n2 {
            let k = cfg.index(i, j);
            // nodes outside the open square are zero
            if i > 0 {
                m[(k, cfg.index(i - 1, j))] = -w1;
            }
            if i + 1 < cfg.n1 {
                m[(k, cfg.index(i + 1, j))] = -w1;
            }
            if j > 0 {
                m[(k, cfg.index(i, j - 1))] = -w2;
            }
            if j + 1 < cfg.n2 {
                m[(k, cfg.index(i, j + 1))] = -w2;
            }
        }
    }
    m
}

pub fn poisson_field_precision(cfg: &PoissonFieldConfig) -> Result<SymMatrix> {
    Ok(PoissonField::new(*cfg)?.precision())
}

pub fn poisson_field_sample(cfg: &PoissonFieldConfig, seed: u64) -> Result<DMatrix<f64>> {
    Ok(PoissonField::new(*cfg)?.sample(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsePrecisionConfig {
    pub p: usize,
    /// Maximum off-diagonal nonzeros per row.
    pub s: usize,
    /// Off-diagonal magnitudes are uniform in `[lo, hi]` with random sign.
    pub magnitude: (f64, f64),
    pub seed: u64,
}

impl SparsePrecisionConfig {
    pub fn new(p: usize, s: usize, seed: u64) -> Self {
        SparsePrecisionConfig { p, s, magnitude: (0.5, 1.0), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::config("p", "must be positive"));
        }
        if self.s >= self.p {
            return Err(Error::InfeasibleSparsity { s: self.s, p: self.p });
        }
        let (lo, hi) = self.magnitude;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::config("magnitude", format!("need 0 < lo <= hi, got ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// Symmetric, row-sparse, strictly diagonally dominant precision.
///
/// Rows are visited in order; row `i` draws the positions it still needs
/// (without replacement) among columns `j > i` whose rows have spare
/// capacity, so no row exceeds `s` nonzeros. The diagonal is then set to the
/// absolute row sum plus one.
pub fn sparse_random_precision(cfg: &SparsePrecisionConfig) -> Result<SymMatrix> {
    cfg.validate()?;
    let p = cfg.p;
    let mut rng = substream(cfg.seed, 0);
    let mut m = DMatrix::zeros(p, p);
    let mut degree = vec![0usize; p];
    for i in 0..p {
        let need = cfg.s - degree[i];
        let open: Vec<usize> = ((i + 1)..p).filter(|&j| degree[j] < cfg.s).collect();
        let take = need.min(open.len());
        if take == 0 {
            continue;
        }
        let mut picked: Vec<usize> = sample_indices(&mut rng, open.len(), take).into_iter().map(|k| open[k]).collect();
        picked.sort_unstable();
        for j in picked {
            let mag = rng.random_range(cfg.magnitude.0..=cfg.magnitude.1);
            let v = if rng.random::<bool>() { mag } else { -mag };
            m[(i, j)] = v;
            m[(j, i)] = v;
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    for i in 0..p {
        let row: f64 = (0..p).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        m[(i, i)] = row + 1.0;
    }
    SymMatrix::new(m, Role::Precision)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KroneckerConfig {
    pub q: usize,
    pub r: usize,
    /// Kronecker rank; only 1 is supported.
    pub k: usize,
    pub s_a: usize,
    pub s_b: usize,
    pub seed: u64,
}

impl KroneckerConfig {
    pub fn new(q: usize, r: usize, s_a: usize, s_b: usize, seed: u64) -> Self {
        KroneckerConfig { q, r, k: 1, s_a, s_b, seed }
    }
}

/// The two sparse positive definite factors `A` (`q × q`) and `B` (`r × r`).
pub fn kronecker_factors(cfg: &KroneckerConfig) -> Result<(SymMatrix, SymMatrix)> {
    if cfg.k != 1 {
        return Err(Error::UnsupportedRank(cfg.k));
    }
    let a = sparse_random_precision(&SparsePrecisionConfig::new(cfg.q, cfg.s_a, child_seed(cfg.seed, 0)))?;
    let b = sparse_random_precision(&SparsePrecisionConfig::new(cfg.r, cfg.s_b, child_seed(cfg.seed, 1)))?;
    Ok((a, b))
}

/// `Ω = A ⊗ B`; entry `(i1·r + i2, j1·r + j2)` is `A[i1,j1]·B[i2,j2]`.
pub fn kronecker_precision(cfg: &KroneckerConfig) -> Result<SymMatrix> {
    let (a, b) = kronecker_factors(cfg)?;
    SymMatrix::new(a.values().kronecker(b.values()), Role::Precision)
}

/// `n` i.i.d. zero-mean Gaussian rows whose covariance is the model
/// (a covariance) or its inverse (a precision).
///
/// Both paths use the unique upper-triangular factor `U` with `UUᵀ = Σ`:
/// from a covariance it comes from a Cholesky factorization of the
/// index-reversed matrix, from a precision `Ω = LLᵀ` it is `L⁻ᵀ`. Row `k`
/// is `U z_k` with `z_k` drawn from stream `k`, so the two paths agree to
/// rounding and the output does not depend on thread count.
pub fn sample_gaussian(model: &SymMatrix, n: usize, seed: u64) -> Result<DataMatrix> {
    let p = model.dim();
    let factor = match model.role() {
        Role::Covariance => {
            let rev = DMatrix::from_fn(p, p, |i, j| model.get(p - 1 - i, p - 1 - j));
            let l = nalgebra::Cholesky::new(rev).ok_or(Error::NotPositiveDefinite)?.unpack();
            UpperFactor::Explicit(DMatrix::from_fn(p, p, |i, j| l[(p - 1 - i, p - 1 - j)]))
        }
        Role::Precision => {
            let l = nalgebra::Cholesky::new(model.values().clone()).ok_or(Error::NotPositiveDefinite)?.unpack();
            UpperFactor::InverseTranspose(l)
        }
        other => return Err(Error::RoleMismatch { expected: "covariance or precision", found: other.name() }),
    };
    let rows: Vec<DVector<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, k as u64);
            let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
            factor.apply(z)
        })
        .collect();
    DataMatrix::new(DMatrix::from_fn(n, p, |k, j| rows[k][j]))
}

enum UpperFactor {
    Explicit(DMatrix<f64>),
    /// Holds lower `L`; applying solves `Lᵀ x = z`.
    InverseTranspose(DMatrix<f64>),
}

impl UpperFactor {
    fn apply(&self, z: DVector<f64>) -> DVector<f64> {
        match self {
            UpperFactor::Explicit(u) => u * z,
            UpperFactor::InverseTranspose(l) => {
                let mut x = z;
                l.tr_solve_lower_triangular_mut(&mut x);
                x
            }
        }
    }
}
