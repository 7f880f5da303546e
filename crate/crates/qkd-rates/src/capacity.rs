//! Lower bounds on the depolarizing channel's quantum capacity: the hashing
//! bound and concatenated-cat-code rates, plus the threshold search for the
//! largest error weight with a positive rate.

use crate::channels::{depolarizing, PauliDist};
use crate::core_math::shannon_entropy;
use crate::repcodes::{conccat_conditional_entropy_with_budget, DEFAULT_CLASS_BUDGET};
use crate::{Error, Result};

/// Hashing (random-coding) rate 1 − H₄(dist) in qubits per channel use.
/// May be negative; no clamping.
pub fn hashing_rate(dist: &PauliDist) -> f64 {
    1.0 - shannon_entropy(&dist.as_array(), 2.0).expect("PauliDist entries are nonnegative")
}

/// Rate of the [[m1·m2, 1]] concatenated cat code:
/// (1 − H(L|S)) / (m1·m2). The single-level cat code is the m2 = 1 case and
/// (m1, m2) = (1, 1) reduces to the hashing rate.
pub fn conc_rate(m1: u32, m2: u32, dist: &PauliDist) -> Result<f64> {
    conc_rate_with_budget(m1, m2, dist, DEFAULT_CLASS_BUDGET)
}

pub fn conc_rate_with_budget(m1: u32, m2: u32, dist: &PauliDist, budget: u128) -> Result<f64> {
    let h = conccat_conditional_entropy_with_budget(m1, m2, dist, budget)?;
    Ok((1.0 - h) / (m1 as f64 * m2 as f64))
}

/// Largest depolarizing parameter at which the (m1, m2) code rate stays
/// positive, located by bisection to |Δp| ≤ tol (defaulted to 1e-7 when a
/// non-positive tol is passed).
///
/// The initial bracket is [1e-4, 0.25]; if the rate is still positive at
/// 0.25 the upper end is extended once to 0.4 before giving up.
pub fn pmax_capacity(m1: u32, m2: u32, tol: f64) -> Result<f64> {
    let tol = if tol > 0.0 { tol } else { 1e-7 };
    let rate_at = |p: f64| -> Result<f64> { conc_rate(m1, m2, &depolarizing(p)?) };
    let lo = 1e-4;
    let mut hi = 0.25;
    if rate_at(lo)? <= 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    if rate_at(hi)? > 0.0 {
        hi = 0.4;
        if rate_at(hi)? > 0.0 {
            return Err(Error::NoBracket { lo, hi });
        }
    }
    bisect_root(lo, hi, tol, rate_at)
}

/// Sign-change bisection: f(lo) > 0, f(hi) ≤ 0 assumed already verified.
pub(crate) fn bisect_root<F: FnMut(f64) -> Result<f64>>(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut f: F,
) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
