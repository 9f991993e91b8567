//! The false-edge law of thresholded correlation screening.
//!
//! With `a_n = Γ((n−1)/2) / (√π Γ((n−2)/2))` (the normalizer of the null
//! density `a_n (1−r²)^{(n−4)/2}` of a sample correlation), define
//!
//! ```text
//! e_n = p(p−1)(1−ρ²)^{(n−2)/2}
//! κ_n = e_n a_n / (n−2)
//! P_e = 1 − exp(−κ_n)
//! ρ_c = sqrt(1 − (a_n (p−1))^{−2/(n−4)})
//! ```
//!
//! `κ_n` is the limiting expected number of false edges, so `P_e` is the
//! Poisson probability of at least one. The exponent is `κ_n`, not `κ_n/2`:
//! the halved form understates the false-edge probability (at `n = 20`,
//! `p = 1000` its median threshold yields `P(N_e > 0) ≈ 0.8` by simulation).
//! `e_n` is evaluated at the finite `(p, ρ)` rather than as a limit. All
//! quantities are computed in log space so `p` up to `1e10` and beyond is
//! safe.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `ln a_n`.
pub fn ln_sphere_constant(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("sphere constant needs n >= 3, got {n}")));
    }
    let n = n as f64;
    Ok(ln_gamma((n - 1.0) / 2.0) - ln_gamma((n - 2.0) / 2.0) - 0.5 * std::f64::consts::PI.ln())
}

/// `a_n = Γ((n−1)/2) / (√π Γ((n−2)/2))`.
pub fn sphere_constant(n: u64) -> Result<f64> {
    ln_sphere_constant(n).map(f64::exp)
}

/// Threshold below which false edges explode.
///
/// Undefined for `n ≤ 4`, and for the handful of tiny `(n, p)` with
/// `a_n (p−1) ≤ 1`, where fewer than one false edge is expected even at
/// `ρ = 0`.
pub fn critical_threshold(n: u64, p: u64) -> Result<f64> {
    if n <= 4 {
        return Err(Error::Domain(format!("critical threshold needs n >= 5, got {n}")));
    }
    if p < 2 {
        return Err(Error::Domain(format!("critical threshold needs p >= 2, got {p}")));
    }
    let log_mass = ln_sphere_constant(n)? + ((p - 1) as f64).ln();
    if log_mass <= 0.0 {
        return Err(Error::Domain(format!("a_n (p-1) <= 1 at n={n}, p={p}: no transition")));
    }
    // 1 − (a_n (p−1))^{−2/(n−4)}, via expm1 for large n
    Ok((-(-2.0 * log_mass / (n as f64 - 4.0)).exp_m1()).sqrt())
}

/// Everything the law says about one `(n, p, ρ)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningLaw {
    pub n: u64,
    pub p: u64,
    pub rho: f64,
    pub a_n: f64,
    pub e_n: f64,
    pub kappa_n: f64,
    pub p_e: f64,
    /// `None` where the critical threshold is undefined (`n ≤ 4`).
    pub rho_c: Option<f64>,
}

/// `ln κ_n`, finite for `ρ < 1`.
pub fn ln_kappa(n: u64, p: u64, rho: f64) -> Result<f64> {
    check_domain(n, p, rho)?;
    let nf = n as f64;
    let pf = p as f64;
    let ln_e = pf.ln() + (pf - 1.0).ln() + 0.5 * (nf - 2.0) * (-rho * rho).ln_1p();
    Ok(ln_e + ln_sphere_constant(n)? - (nf - 2.0).ln())
}

/// `P_e = 1 − exp(−κ_n)` without building the full [`ScreeningLaw`].
pub fn p_e(n: u64, p: u64, rho: f64) -> Result<f64> {
    let kappa = ln_kappa(n, p, rho)?.exp();
    Ok(-(-kappa).exp_m1())
}

pub fn false_positive_prob(n: u64, p: u64, rho: f64) -> Result<ScreeningLaw> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
    }
    let ln_k = ln_kappa(n, p, rho)?;
    let ln_a = ln_sphere_constant(n)?;
    let nf = n as f64;
    let kappa_n = ln_k.exp();
    Ok(ScreeningLaw {
        n,
        p,
        rho,
        a_n: ln_a.exp(),
        e_n: (ln_k - ln_a + (nf - 2.0).ln()).exp(),
        kappa_n,
        p_e: -(-kappa_n).exp_m1(),
        rho_c: critical_threshold(n, p).ok(),
    })
}

fn check_domain(n: u64, p: u64, rho: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("n must be >= 3, got {n}")));
    }
    if p < 2 {
        return Err(Error::Domain(format!("p must be >= 2, got {p}")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1), got {rho}")));
    }
    Ok(())
}
