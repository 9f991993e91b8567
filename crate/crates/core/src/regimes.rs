//! Sample-complexity bounds and their isoclines.
//!
//! Two families are covered. Contextual bounds give the asymptotic log
//! Frobenius error of inverse covariance estimation for a `q × r` variable
//! layout under increasingly informative structural priors. Task bounds
//! give the risk of increasingly demanding inference tasks (screening,
//! detection, support recovery, parameter estimation, performance
//! estimation) as functions of `n` and `p`. An isocline is the required `n`
//! as `p` varies at a fixed bound level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::screening::design::min_detectable_correlation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextualKind {
    /// No structural prior.
    Saturated,
    Sparse,
    Kronecker,
    KroneckerSparse,
}

impl ContextualKind {
    pub const ALL: [ContextualKind; 4] =
        [ContextualKind::Saturated, ContextualKind::Sparse, ContextualKind::Kronecker, ContextualKind::KroneckerSparse];

    pub fn name(self) -> &'static str {
        match self {
            ContextualKind::Saturated => "saturated",
            ContextualKind::Sparse => "sparse",
            ContextualKind::Kronecker => "kronecker",
            ContextualKind::KroneckerSparse => "kronecker_sparse",
        }
    }
}

/// The constant `M` inside the `log M` factor of the Kronecker bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum ScaleConstant {
    /// `M = max(q, r, n)`.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextualModel {
    pub kind: ContextualKind,
    pub q: usize,
    pub r: usize,
    pub m: ScaleConstant,
}

impl ContextualModel {
    pub fn new(kind: ContextualKind, q: usize, r: usize) -> Self {
        ContextualModel { kind, q, r, m: ScaleConstant::Auto }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 || self.r < 2 {
            return Err(Error::config("q, r", format!("factor dimensions must be >= 2, got {} x {}", self.q, self.r)));
        }
        if let ScaleConstant::Fixed(m) = self.m {
            let floor = self.q.max(self.r) as f64;
            if !(m >= floor) || !m.is_finite() {
                return Err(Error::config("m", format!("must be finite and >= max(q, r) = {floor}, got {m}")));
            }
        }
        Ok(())
    }

    /// The `M` used at sample size `n`.
    pub fn scale_constant(&self, n: f64) -> f64 {
        match self.m {
            ScaleConstant::Auto => (self.q.max(self.r) as f64).max(n),
            ScaleConstant::Fixed(m) => m,
        }
    }

    /// Numerator `c(n)` of the bound `½ log(c(n)/n)`.
    fn complexity(&self, n: f64) -> f64 {
        let (q, r) = (self.q as f64, self.r as f64);
        match self.kind {
            ContextualKind::Saturated => q * q * r * r,
            ContextualKind::Sparse => q * r * (q * r).ln(),
            ContextualKind::Kronecker => (q * q + r * r) * self.scale_constant(n).ln(),
            ContextualKind::KroneckerSparse => (q + r) * self.scale_constant(n).ln(),
        }
    }
}

/// Asymptotic log Frobenius error `½ log(c/n)` of the model at `n` samples.
pub fn contextual_bound(model: &ContextualModel, n: f64) -> Result<f64> {
    model.validate()?;
    if !(n >= 1.0) {
        return Err(Error::Domain(format!("n must be >= 1, got {n}")));
    }
    Ok(0.5 * (model.complexity(n) / n).ln())
}

/// Sample size at which the bound equals `level`.
///
/// Without `log M` or with a fixed `M` this is `n = c·e^{−2·level}`. With
/// `M = max(q, r, n)` it solves `n = K log max(q, r, n)`; iterating that map
/// from `max(q, r, K)` is monotone and reaches its largest root.
pub fn contextual_required_n(model: &ContextualModel, level: f64) -> Result<f64> {
    model.validate()?;
    if !level.is_finite() {
        return Err(Error::Domain(format!("level must be finite, got {level}")));
    }
    let shrink = (-2.0 * level).exp();
    let n = match (model.kind, model.m) {
        (ContextualKind::Kronecker | ContextualKind::KroneckerSparse, ScaleConstant::Auto) => {
            let (q, r) = (model.q as f64, model.r as f64);
            let k = shrink
                * match model.kind {
                    ContextualKind::Kronecker => q * q + r * r,
                    _ => q + r,
                };
            let floor = q.max(r);
            let mut n = floor.max(k);
            for _ in 0..500 {
                let next = k * floor.max(n).ln();
                let done = (next - n).abs() <= 1e-14 * n;
                n = next;
                if done {
                    break;
                }
            }
            n
        }
        _ => model.complexity(1.0) * shrink,
    };
    if !(n >= 1.0) {
        return Err(Error::InfeasibleLevel { level, n });
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextualPoint {
    pub p: u64,
    pub q: usize,
    pub r: usize,
    pub n: f64,
    /// `M` at the solution; `None` for kinds without a `log M` factor.
    pub m: Option<f64>,
}

/// Required `n` over a grid of `p` with the square layout `q = r = √p`.
pub fn contextual_isocline(kind: ContextualKind, m: ScaleConstant, level: f64, p_grid: &[u64]) -> Result<Vec<ContextualPoint>> {
    p_grid
        .iter()
        .map(|&p| {
            let side = p.isqrt();
            if side * side != p {
                return Err(Error::Domain(format!("p = {p} is not a perfect square")));
            }
            let side = side as usize;
            let model = ContextualModel { kind, q: side, r: side, m };
            let n = contextual_required_n(&model, level)?;
            let m = matches!(kind, ContextualKind::Kronecker | ContextualKind::KroneckerSparse).then(|| model.scale_constant(n));
            Ok(ContextualPoint { p, q: side, r: side, n, m })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    Screening,
    Detection,
    SupportRecovery,
    ParamEstimation,
    PerformanceEstimation,
}

impl Task {
    pub const ALL: [Task; 5] =
        [Task::Screening, Task::Detection, Task::SupportRecovery, Task::ParamEstimation, Task::PerformanceEstimation];

    pub fn name(self) -> &'static str {
        match self {
            Task::Screening => "screening",
            Task::Detection => "detection",
            Task::SupportRecovery => "support_recovery",
            Task::ParamEstimation => "param_estimation",
            Task::PerformanceEstimation => "performance_estimation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRegime {
    pub task: Task,
    /// Limit of the regime ratio; carried for reporting, the bounds do not
    /// depend on it.
    pub alpha: f64,
    pub beta: f64,
    /// Exponent in the support-recovery bound, in `(0, 1]`.
    pub nu: f64,
    /// Sample size held fixed along the screening isocline, where the
    /// threshold rises with `p` instead.
    pub screening_n: u64,
}

impl TaskRegime {
    pub fn new(task: Task) -> Self {
        TaskRegime { task, alpha: 1.0, beta: 1.0, nu: 0.5, screening_n: 10 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::config("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::config("beta", format!("must be > 0, got {}", self.beta)));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::config("nu", format!("must lie in (0, 1], got {}", self.nu)));
        }
        if self.screening_n < 5 {
            return Err(Error::config("screening_n", format!("must be >= 5, got {}", self.screening_n)));
        }
        Ok(())
    }
}

/// Natural log of the task bound. Screening needs `κ_n` from the
/// screening law.
pub fn task_log_bound(regime: &TaskRegime, n: f64, p: f64, kappa_n: Option<f64>) -> Result<f64> {
    regime.validate()?;
    if !(n >= 1.0 && p >= 2.0) {
        return Err(Error::Domain(format!("need n >= 1 and p >= 2, got n = {n}, p = {p}")));
    }
    let beta = regime.beta;
    Ok(match regime.task {
        Task::Screening => {
            let kappa = kappa_n.ok_or(Error::MissingKappa)?;
            if !(kappa >= 0.0) {
                return Err(Error::Domain(format!("kappa_n must be >= 0, got {kappa}")));
            }
            (-(-kappa).exp_m1()).ln()
        }
        Task::Detection => p.ln() - n * beta,
        Task::SupportRecovery => p.powf(regime.nu) * std::f64::consts::LN_2 - n * beta,
        Task::ParamEstimation => (p * p.ln() / n * beta).ln(),
        Task::PerformanceEstimation => -2.0 / (1.0 + p) * n.ln() + beta.ln(),
    })
}

pub fn task_bound(regime: &TaskRegime, n: f64, p: f64, kappa_n: Option<f64>) -> Result<f64> {
    match regime.task {
        Task::Screening => {
            regime.validate()?;
            let kappa = kappa_n.ok_or(Error::MissingKappa)?;
            task_log_bound(regime, n, p, Some(kappa))?;
            Ok(-(-kappa).exp_m1())
        }
        _ => task_log_bound(regime, n, p, kappa_n).map(f64::exp),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskPoint {
    pub p: f64,
    /// Required sample size; infinite when it overflows, see `log_n`.
    pub n: f64,
    pub log_n: f64,
    /// Screening only: the threshold that holds the bound at `level` with
    /// `n = screening_n`.
    pub rho: Option<f64>,
}

/// Required `n` at which each task's bound equals `level`.
pub fn task_isocline(regime: &TaskRegime, level: f64, p_grid: &[f64]) -> Result<Vec<TaskPoint>> {
    regime.validate()?;
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::Domain(format!("level must be positive and finite, got {level}")));
    }
    let beta = regime.beta;
    p_grid
        .iter()
        .map(|&p| {
            if !(p >= 2.0) || !p.is_finite() {
                return Err(Error::Domain(format!("p must be finite and >= 2, got {p}")));
            }
            let (log_n, rho) = match regime.task {
                Task::Screening => {
                    if level >= 1.0 {
                        return Err(Error::InfeasibleLevel { level, n: f64::NAN });
                    }
                    let n = regime.screening_n;
                    let rho = min_detectable_correlation(n, p.round() as u64, level)?;
                    ((n as f64).ln(), Some(rho))
                }
                Task::Detection => (((p.ln() - level.ln()) / beta).ln(), None),
                Task::SupportRecovery => {
                    (((p.powf(regime.nu) * std::f64::consts::LN_2 - level.ln()) / beta).ln(), None)
                }
                Task::ParamEstimation => ((beta * p * p.ln() / level).ln(), None),
                Task::PerformanceEstimation => ((1.0 + p) / 2.0 * (beta / level).ln(), None),
            };
            if !(log_n >= 0.0) {
                return Err(Error::InfeasibleLevel { level, n: log_n.exp() });
            }
            Ok(TaskPoint { p, n: log_n.exp(), log_n, rho })
        })
        .collect()
}
