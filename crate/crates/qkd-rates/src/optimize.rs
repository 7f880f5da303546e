//! Maximization of key rates over the preprocessing noise and bisection
//! search for the error-rate threshold p_max.
//!
//! Rate functions are smooth but each evaluation can be expensive (large
//! blocks diagonalize many spin blocks), so everything here is
//! derivative-free: fixed coarse grids pick the basin, golden-section
//! refines. No randomness anywhere; thresholds are reproducible bit for bit.

use alloc::format;

use crate::capacity::bisect_root;
use crate::channels::ProtocolKind;
use crate::keyrates::{bb84_iter_rate, bb84_rate, rate_q0, sixstate_rate};
use crate::{Error, Result};

/// Inverse golden ratio, the interval-reduction factor per probe.
const GOLDEN: f64 = 0.618_033_988_749_895;

/// Result of a noise maximization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptResult {
    /// Largest rate seen; equals the evaluation at `argmax` exactly.
    pub best_value: f64,
    /// Maximizing (q, Q); the second slot is None for one-parameter searches.
    pub argmax: (f64, Option<f64>),
    /// Number of rate-function evaluations spent.
    pub evaluations: u32,
    /// Whether every refinement bracket shrank below its tolerance.
    pub converged: bool,
}

/// Which rate curve a threshold search runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateSpec {
    Single { kind: ProtocolKind, m: u32 },
    /// Two-round iterated BB84.
    Iterated { m1: u32, m2: u32 },
}

/// Noise handling inside a threshold search: hold (q, Q) fixed, or
/// re-maximize the rate over them at every probed p.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QMode {
    Fixed { q: f64, big_q: f64 },
    Optimize,
}

/// Golden-section maximization on [a, b]. Returns the best probe seen (which
/// dominates the interior optimum whenever the function is unimodal there),
/// the probe count, and whether the bracket closed below tol.
fn golden_refine<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64, u32, bool)> {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2u32;
    let (mut best_x, mut best_v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    let mut iters = 0u32;
    while b - a > tol && iters < 300 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1)?;
            if f1 > best_v {
                best_v = f1;
                best_x = x1;
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2)?;
            if f2 > best_v {
                best_v = f2;
                best_x = x2;
            }
        }
        evals += 1;
        iters += 1;
    }
    Ok((best_x, best_v, evals, b - a <= tol))
}

/// Maximize a rate function of the flip probability q over [0, 1/2].
///
/// Coarse grid in steps of 0.005, then golden-section inside the best
/// bracket until |Δq| ≤ tol (default 1e-6 for tol ≤ 0). The returned value
/// is the best evaluation seen anywhere, so it never falls below the best
/// grid sample; if the whole curve is negative the best (possibly boundary)
/// sample is still returned with `converged` set.
pub fn maximize_q<F: FnMut(f64) -> Result<f64>>(mut rate_fn: F, tol: f64) -> Result<OptResult> {
    let tol = if tol > 0.0 { tol } else { 1e-6 };
    let n = 100u32;
    let mut evals = 0u32;
    let mut best_i = 0u32;
    let mut best_q = 0.0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let q = 0.5 * i as f64 / n as f64;
        let v = rate_fn(q)?;
        evals += 1;
        if v > best_v {
            best_v = v;
            best_q = q;
            best_i = i;
        }
    }
    let lo = 0.5 * best_i.saturating_sub(1) as f64 / n as f64;
    let hi = 0.5 * (best_i + 1).min(n) as f64 / n as f64;
    let (x, v, used, converged) = golden_refine(&mut rate_fn, lo, hi, tol)?;
    evals += used;
    if v > best_v {
        best_v = v;
        best_q = x;
    }
    Ok(OptResult { best_value: best_v, argmax: (best_q, None), evaluations: evals, converged })
}

/// Maximize a rate function of both flip probabilities over [0, 1/2]².
///
/// Coarse 2-D grid in steps of 0.02, then three sweeps of coordinate-wise
/// golden-section in a ±0.03 window (clamped) around the running best.
pub fn maximize_qq<F: FnMut(f64, f64) -> Result<f64>>(
    mut rate_fn: F,
    tol: f64,
) -> Result<OptResult> {
    let tol = if tol > 0.0 { tol } else { 1e-6 };
    let n = 25u32;
    let mut evals = 0u32;
    let mut best = (0.0f64, 0.0f64);
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let q = 0.5 * i as f64 / n as f64;
        for j in 0..=n {
            let big_q = 0.5 * j as f64 / n as f64;
            let v = rate_fn(q, big_q)?;
            evals += 1;
            if v > best_v {
                best_v = v;
                best = (q, big_q);
            }
        }
    }
    let mut converged = true;
    for _ in 0..3 {
        let hold = best.1;
        let (a, b) = ((best.0 - 0.03).max(0.0), (best.0 + 0.03).min(0.5));
        let (x, v, used, c) = golden_refine(&mut |q| rate_fn(q, hold), a, b, tol)?;
        evals += used;
        converged &= c;
        if v > best_v {
            best_v = v;
            best.0 = x;
        }
        let hold = best.0;
        let (a, b) = ((best.1 - 0.03).max(0.0), (best.1 + 0.03).min(0.5));
        let (x, v, used, c) = golden_refine(&mut |big_q| rate_fn(hold, big_q), a, b, tol)?;
        evals += used;
        converged &= c;
        if v > best_v {
            best_v = v;
            best.1 = x;
        }
    }
    Ok(OptResult {
        best_value: best_v,
        argmax: (best.0, Some(best.1)),
        evaluations: evals,
        converged,
    })
}

/// Largest bit-error rate p at which the chosen rate stays positive, by
/// bisection on [1e-4, 0.2] to |Δp| ≤ tol_p (default 1e-7 for tol_p ≤ 0).
///
/// With `QMode::Optimize` the rate is re-maximized over the noise at every
/// probed p, the conservative reading of an optimized threshold. Fixed q = 0
/// single-round searches go through the syndrome-pair formula [`rate_q0`],
/// which is the exact BB84 rate and shares the six-state zero crossing.
///
/// The preprocessing advantage of q → 1/2 is probed at q = 0.4999; the rate
/// curves are continuous there and thresholds move by less than 5e-5.
pub fn pmax_search(spec: RateSpec, q_mode: QMode, tol_p: f64) -> Result<f64> {
    let tol_p = if tol_p > 0.0 { tol_p } else { 1e-7 };
    if let (RateSpec::Single { .. }, QMode::Fixed { big_q, .. }) = (spec, q_mode) {
        if big_q != 0.0 {
            return Err(Error::Domain(format!(
                "outer flip probability Q={big_q} only applies to the iterated protocol"
            )));
        }
    }
    let rate_at = |p: f64| -> Result<f64> {
        match (spec, q_mode) {
            (RateSpec::Single { kind, m }, QMode::Fixed { q, .. }) => {
                if q == 0.0 {
                    rate_q0(kind, m, p)
                } else {
                    match kind {
                        ProtocolKind::Bb84 => Ok(bb84_rate(m, p, q)?.rate),
                        ProtocolKind::SixState => Ok(sixstate_rate(m, p, q)?.rate),
                    }
                }
            }
            (RateSpec::Single { kind, m }, QMode::Optimize) => {
                let f = |q: f64| match kind {
                    ProtocolKind::Bb84 => Ok(bb84_rate(m, p, q)?.rate),
                    ProtocolKind::SixState => Ok(sixstate_rate(m, p, q)?.rate),
                };
                Ok(maximize_q(f, 1e-6)?.best_value)
            }
            (RateSpec::Iterated { m1, m2 }, QMode::Fixed { q, big_q }) => {
                Ok(bb84_iter_rate(m1, m2, p, q, big_q)?.rate)
            }
            (RateSpec::Iterated { m1, m2 }, QMode::Optimize) => {
                let f = |q: f64, big_q: f64| Ok(bb84_iter_rate(m1, m2, p, q, big_q)?.rate);
                Ok(maximize_qq(f, 1e-6)?.best_value)
            }
        }
    };
    let (lo, hi) = (1e-4, 0.2);
    if rate_at(lo)? <= 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    if rate_at(hi)? > 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    bisect_root(lo, hi, tol_p, rate_at)
}
