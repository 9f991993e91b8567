//! Monte Carlo false-edge experiments under null models.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::law::p_e;
use crate::error::{Error, Result};
use crate::matrix::{
    correlation_matrix, partial_correlation, precision, pseudo_partial_projection, sample_covariance, DataMatrix,
    InverseMode,
};
use crate::rng::{child_seed, substream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum NullModel {
    /// Independent standard normal variables.
    #[default]
    Identity,
    /// Consecutive blocks of `block_size` variables with common
    /// within-block correlation; variables in different blocks are
    /// independent. Only between-block pairs count as false edges.
    BlockSparse { block_size: usize, correlation: f64 },
}

impl NullModel {
    fn validate(&self) -> Result<()> {
        match *self {
            NullModel::Identity => Ok(()),
            NullModel::BlockSparse { block_size, correlation } => {
                if block_size == 0 {
                    return Err(Error::config("null_model.block_size", "must be >= 1"));
                }
                if !(0.0..1.0).contains(&correlation) {
                    return Err(Error::config("null_model.correlation", format!("must lie in [0, 1), got {correlation}")));
                }
                Ok(())
            }
        }
    }

    fn same_block(&self, i: usize, j: usize) -> bool {
        match *self {
            NullModel::Identity => false,
            NullModel::BlockSparse { block_size, .. } => i / block_size == j / block_size,
        }
    }

    /// Draws `x = √c·g_block + √(1−c)·z` row by row from one stream.
    fn sample(&self, n: usize, p: usize, seed: u64) -> Result<DataMatrix> {
        let mut rng = substream(seed, 0);
        let mut x = DMatrix::zeros(n, p);
        match *self {
            NullModel::Identity => {
                for k in 0..n {
                    for j in 0..p {
                        x[(k, j)] = rng.sample(StandardNormal);
                    }
                }
            }
            NullModel::BlockSparse { block_size, correlation } => {
                let (a, b) = (correlation.sqrt(), (1.0 - correlation).sqrt());
                let blocks = p.div_ceil(block_size);
                for k in 0..n {
                    let shared: Vec<f64> = (0..blocks).map(|_| rng.sample(StandardNormal)).collect();
                    for j in 0..p {
                        let z: f64 = rng.sample(StandardNormal);
                        x[(k, j)] = a * shared[j / block_size] + b * z;
                    }
                }
            }
        }
        DataMatrix::new(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub n: usize,
    pub p: usize,
    pub rho_grid: Vec<f64>,
    pub trials: usize,
    pub null_model: NullModel,
    pub seed: u64,
}

/// Which partial correlation estimate the trials screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScreeningPath {
    /// `n > p`: the sample correlation matrix is invertible.
    StrictInverse,
    /// `n ≤ p`: Moore-Penrose pseudoinverse of the sample correlation.
    PseudoInverse,
}

impl ScreeningPath {
    pub fn for_shape(n: usize, p: usize) -> Self {
        if n <= p {
            ScreeningPath::PseudoInverse
        } else {
            ScreeningPath::StrictInverse
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub rho: f64,
    pub mean_edges: f64,
    /// Fraction of trials with at least one false edge.
    pub prob_any: f64,
    /// The analytic false-edge probability, for identity nulls.
    pub analytic_pe: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub rows: Vec<PhaseRow>,
    pub path: ScreeningPath,
}

/// Screens `trials` independent null data sets at every threshold.
///
/// Trial `t` draws from seed `child_seed(seed, t)`; trials run in
/// parallel and are reduced in trial order, so the table does not depend
/// on the thread count.
pub fn phase_transition_curve(cfg: &PhaseConfig) -> Result<PhaseTable> {
    if cfg.n < 5 {
        return Err(Error::config("n", format!("must be >= 5, got {}", cfg.n)));
    }
    if cfg.p < 2 {
        return Err(Error::config("p", format!("must be >= 2, got {}", cfg.p)));
    }
    if cfg.trials == 0 {
        return Err(Error::config("trials", "must be >= 1"));
    }
    if let Some(r) = cfg.rho_grid.iter().find(|r| !(**r >= 0.0 && **r <= 1.0)) {
        return Err(Error::config("rho_grid", format!("thresholds must lie in [0, 1], got {r}")));
    }
    cfg.null_model.validate()?;
    let path = ScreeningPath::for_shape(cfg.n, cfg.p);
    let counts: Vec<Vec<usize>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_counts(cfg, path, child_seed(cfg.seed, t as u64)))
        .collect::<Result<_>>()?;
    let trials = cfg.trials as f64;
    let rows = cfg
        .rho_grid
        .iter()
        .enumerate()
        .map(|(g, &rho)| {
            let total: usize = counts.iter().map(|c| c[g]).sum();
            let any = counts.iter().filter(|c| c[g] > 0).count();
            let analytic_pe = match cfg.null_model {
                NullModel::Identity => p_e(cfg.n as u64, cfg.p as u64, rho).ok(),
                NullModel::BlockSparse { .. } => None,
            };
            PhaseRow { rho, mean_edges: total as f64 / trials, prob_any: any as f64 / trials, analytic_pe }
        })
        .collect();
    Ok(PhaseTable { rows, path })
}

fn trial_counts(cfg: &PhaseConfig, path: ScreeningPath, seed: u64) -> Result<Vec<usize>> {
    let data = cfg.null_model.sample(cfg.n, cfg.p, seed)?;
    let partial = match path {
        ScreeningPath::PseudoInverse => pseudo_partial_projection(&data)?.gram(),
        ScreeningPath::StrictInverse => {
            let r = correlation_matrix(&sample_covariance(&data)?)?;
            partial_correlation(&precision(&r, InverseMode::Strict)?)?.into_values()
        }
    };
    let mut null_weights = Vec::with_capacity(cfg.p * (cfg.p - 1) / 2);
    for j in 0..cfg.p {
        for i in 0..j {
            if !cfg.null_model.same_block(i, j) {
                null_weights.push(partial[(i, j)].abs());
            }
        }
    }
    null_weights.sort_by(f64::total_cmp);
    Ok(cfg
        .rho_grid
        .iter()
        .map(|&rho| null_weights.len() - null_weights.partition_point(|&w| w < rho))
        .collect())
}

/// Threshold at which `prob_any` first falls to `level`, scanning rows in
/// increasing `ρ` and interpolating linearly between grid points.
pub fn crossing(rows: &[PhaseRow], level: f64) -> Option<f64> {
    let mut sorted: Vec<&PhaseRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    sorted.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.prob_any >= level && b.prob_any <= level {
            if a.prob_any == b.prob_any {
                return Some(a.rho);
            }
            let t = (a.prob_any - level) / (a.prob_any - b.prob_any);
            Some(a.rho + t * (b.rho - a.rho))
        } else {
            None
        }
    })
}
