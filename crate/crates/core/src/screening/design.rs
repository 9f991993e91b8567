//! Design curves: inverting the false-edge law for sample size or for the
//! smallest detectable correlation at a target familywise error rate.

use serde::{Deserialize, Serialize};

use super::law::p_e;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Largest sample size considered.
    pub max_n: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_n: 1_000_000_000 }
    }
}

/// Smallest `n ≥ 5` with `P_e(n, p, ρ) ≤ fwer`.
pub fn min_sample_size(p: u64, rho: f64, fwer: f64) -> Result<u64> {
    min_sample_size_with(p, rho, fwer, &SearchOptions::default())
}

/// Exponential bracketing followed by bisection. Both phases rely on `P_e`
/// being non-increasing in `n`; every evaluated point is checked against
/// its bracket, and a violation drops to a linear scan of the bracket.
pub fn min_sample_size_with(p: u64, rho: f64, fwer: f64, opts: &SearchOptions) -> Result<u64> {
    check_fwer(fwer)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    const N_MIN: u64 = 5;
    let pe = |n: u64| p_e(n, p, rho);
    let mut lo = N_MIN;
    let mut pe_lo = pe(lo)?;
    if pe_lo <= fwer {
        return Ok(lo);
    }
    let mut hi = lo;
    let mut pe_hi;
    loop {
        if hi >= opts.max_n {
            return Err(Error::NoSolution(format!(
                "P_e stays above {fwer} up to n = {} (p = {p}, rho = {rho})",
                opts.max_n
            )));
        }
        hi = (hi * 2).min(opts.max_n);
        pe_hi = pe(hi)?;
        if pe_hi > pe_lo {
            return linear_scan(lo, hi, fwer, pe);
        }
        if pe_hi <= fwer {
            break;
        }
        lo = hi;
        pe_lo = pe_hi;
    }
    // invariant: pe(lo) > fwer >= pe(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let pe_mid = pe(mid)?;
        if pe_mid > pe_lo || pe_mid < pe_hi {
            return linear_scan(lo, hi, fwer, pe);
        }
        if pe_mid <= fwer {
            hi = mid;
            pe_hi = pe_mid;
        } else {
            lo = mid;
            pe_lo = pe_mid;
        }
    }
    Ok(hi)
}

fn linear_scan(lo: u64, hi: u64, fwer: f64, pe: impl Fn(u64) -> Result<f64>) -> Result<u64> {
    for n in lo..=hi {
        if pe(n)? <= fwer {
            return Ok(n);
        }
    }
    Err(Error::NoSolution(format!("no n in [{lo}, {hi}] reaches fwer {fwer}")))
}

/// Smallest `ρ` with `P_e(n, p, ρ) ≤ fwer`, by bisection to `1e-12`.
///
/// The returned value always satisfies the error target.
pub fn min_detectable_correlation(n: u64, p: u64, fwer: f64) -> Result<f64> {
    check_fwer(fwer)?;
    if n < 5 {
        return Err(Error::Domain(format!("n must be >= 5, got {n}")));
    }
    let rho_max = 1.0 - 1e-12;
    if p_e(n, p, rho_max)? > fwer {
        return Err(Error::NoSolution(format!("P_e > {fwer} for every rho < 1 at n = {n}, p = {p}")));
    }
    if p_e(n, p, 0.0)? <= fwer {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, rho_max);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if p_e(n, p, mid)? <= fwer {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_fwer(fwer: f64) -> Result<()> {
    if fwer > 0.0 && fwer < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("fwer must lie in (0, 1), got {fwer}")))
    }
}

/// One row of a sample-size design curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeRow {
    pub p: u64,
    pub rho: f64,
    pub fwer: f64,
    /// `None` when no sample size up to the search cap suffices.
    pub n_required: Option<u64>,
}

/// One row of a detectable-correlation design curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectableRow {
    pub n: u64,
    pub p: u64,
    pub fwer: f64,
    pub rho_min: Option<f64>,
}

/// `n_required` for every `(p, ρ)` pair, `p` outermost. Unsolvable points
/// are kept with `n_required = None`.
pub fn sample_size_curve(p_grid: &[u64], rho_grid: &[f64], fwer: f64) -> Result<Vec<SampleSizeRow>> {
    let mut rows = Vec::with_capacity(p_grid.len() * rho_grid.len());
    for &p in p_grid {
        for &rho in rho_grid {
            let n_required = match min_sample_size(p, rho, fwer) {
                Ok(n) => Some(n),
                Err(Error::NoSolution(_)) => None,
                Err(e) => return Err(e),
            };
            rows.push(SampleSizeRow { p, rho, fwer, n_required });
        }
    }
    check_sample_size_monotone(&rows)?;
    Ok(rows)
}

pub fn detectable_curve(n_grid: &[u64], p_grid: &[u64], fwer: f64) -> Result<Vec<DetectableRow>> {
    let mut rows = Vec::with_capacity(n_grid.len() * p_grid.len());
    for &n in n_grid {
        for &p in p_grid {
            let rho_min = match min_detectable_correlation(n, p, fwer) {
                Ok(r) => Some(r),
                Err(Error::NoSolution(_)) => None,
                Err(e) => return Err(e),
            };
            rows.push(DetectableRow { n, p, fwer, rho_min });
        }
    }
    check_detectable_monotone(&rows)?;
    Ok(rows)
}

/// Required `n` must not decrease with `p` (fixed `ρ`) nor increase with
/// `ρ` (fixed `p`).
pub fn check_sample_size_monotone(rows: &[SampleSizeRow]) -> Result<()> {
    for a in rows {
        for b in rows {
            let (Some(na), Some(nb)) = (a.n_required, b.n_required) else { continue };
            let bad = (a.rho == b.rho && a.p < b.p && na > nb) || (a.p == b.p && a.rho < b.rho && na < nb);
            if bad {
                return Err(Error::NoSolution(format!("design curve is not monotone at p={}, rho={}", b.p, b.rho)));
            }
        }
    }
    Ok(())
}

pub fn check_detectable_monotone(rows: &[DetectableRow]) -> Result<()> {
    for a in rows {
        for b in rows {
            let (Some(ra), Some(rb)) = (a.rho_min, b.rho_min) else { continue };
            let bad = (a.n == b.n && a.p < b.p && ra > rb + 1e-12) || (a.p == b.p && a.n < b.n && ra + 1e-12 < rb);
            if bad {
                return Err(Error::NoSolution(format!("design curve is not monotone at n={}, p={}", b.n, b.p)));
            }
        }
    }
    Ok(())
}
