//! Entropy functions, dense Hermitian eigensolving, and the shared
//! combinatorial helpers (log-binomials, compensated sums).
//!
//! Conventions: `0 log 0 = 0`; spectra descend; eigenvalues in `[-1e-9, 0)`
//! are clamped to zero before a logarithm is taken, anything lower is a hard
//! error. Entropies are in bits unless a base is passed explicitly.

pub(crate) mod eigen;

use crate::fp;
use crate::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Entries this far below zero are treated as roundoff and clamped.
pub const PROB_NEG_TOL: f64 = 1e-12;
/// Clamp band for eigenvalues of nominally PSD operators.
pub const PSD_CLAMP: f64 = 1e-9;
/// Hermiticity tolerance for matrix constructors, relative to the largest
/// entry magnitude (absolute for matrices with entries of order one).
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Shannon entropy −Σ x log_base x of a possibly subnormalized distribution.
///
/// Entries in `[-1e-12, 0)` are clamped to zero; lower entries are a domain
/// error, as is a base ≤ 1.
pub fn shannon_entropy(p: &[f64], base: f64) -> Result<f64> {
    if base.is_nan() || base <= 1.0 {
        return Err(Error::Domain(format!("entropy base must exceed 1, got {base}")));
    }
    let ln_base = fp::ln(base);
    let mut acc = KahanSum::new();
    for &x in p {
        if x < -PROB_NEG_TOL {
            return Err(Error::Domain(format!("probability entry {x:e} below -1e-12")));
        }
        if x > 0.0 {
            acc.add(-x * fp::ln(x) / ln_base);
        }
    }
    Ok(acc.value())
}

/// Binary entropy H₂(x) in bits. Accepts x in [−1e-12, 1+1e-12], clamping
/// into [0, 1].
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-PROB_NEG_TOL..=1.0 + PROB_NEG_TOL).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    Ok(h2(x.clamp(0.0, 1.0)))
}

/// Unchecked binary entropy on [0, 1]; hot-path form of [`binary_entropy`].
#[inline]
pub(crate) fn h2(x: f64) -> f64 {
    let mut s = 0.0;
    if x > 0.0 {
        s -= x * fp::log2(x);
    }
    if x < 1.0 {
        s -= (1.0 - x) * fp::log2(1.0 - x);
    }
    s
}

/// ln C(n, k) with a −∞ sentinel for k outside [0, n].
///
/// Computed as a compensated sum of ln((n−k+i)/i); relative error stays at
/// ulp scale for n ≤ 1000, which keeps multinomial weights composed from it
/// effectively exact.
pub fn log_binomial(n: u32, k: i64) -> f64 {
    if k < 0 || k > n as i64 {
        return f64::NEG_INFINITY;
    }
    let k = (k as u32).min(n - k as u32);
    let mut acc = KahanSum::new();
    for i in 1..=k {
        acc.add(fp::ln((n - k + i) as f64 / i as f64));
    }
    acc.value()
}

/// Precomputed ln-factorial table; backs the multinomial weights of the
/// class-sum enumerations without re-summing per class.
pub(crate) struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn up_to(n: usize) -> Self {
        let mut table = vec![0.0; n + 1];
        let mut acc = KahanSum::new();
        for (i, slot) in table.iter_mut().enumerate().skip(1) {
            acc.add(fp::ln(i as f64));
            *slot = acc.value();
        }
        LnFactorials { table }
    }

    #[inline]
    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n);
        self.ln_factorial(n) - self.ln_factorial(k) - self.ln_factorial(n - k)
    }

    /// ln of the multinomial coefficient n! / Π parts_i! where n = Σ parts.
    pub fn ln_multinomial(&self, parts: &[u32]) -> f64 {
        let n: u32 = parts.iter().sum();
        let mut v = self.ln_factorial(n as usize);
        for &p in parts {
            v -= self.ln_factorial(p as usize);
        }
        v
    }
}

/// Neumaier-compensated accumulator; the class sums add 1e7+ terms of mixed
/// magnitude and plain summation would cost several digits.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fp::abs(self.sum) >= fp::abs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Dense Hermitian matrix, row-major complex entries.
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds from row-major data, checking the shape and that
    /// A equals its conjugate transpose within [`HERMITICITY_TOL`]
    /// (scaled by the largest entry magnitude when that exceeds one).
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        let mut max_abs: f64 = 0.0;
        for z in &data {
            max_abs = max_abs.max(fp::abs(z.re)).max(fp::abs(z.im));
        }
        let tol = HERMITICITY_TOL * max_abs.max(1.0);
        let mut residual: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i].conj();
                residual = residual.max(fp::abs(a.re - b.re)).max(fp::abs(a.im - b.im));
            }
        }
        if residual > tol {
            return Err(Error::Shape(format!(
                "matrix is not Hermitian: residual {residual:e} exceeds {tol:e}"
            )));
        }
        Ok(HermitianMatrix { dim, data })
    }

    /// Builds from a real symmetric row-major matrix.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        let complex: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        HermitianMatrix::new(dim, complex)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        let mut acc = KahanSum::new();
        for i in 0..self.dim {
            acc.add(self.data[i * self.dim + i].re);
        }
        acc.value()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub(crate) fn real_part(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }
}

/// Real spectrum in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub(crate) fn from_descending(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        Spectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Eigenvalues of a Hermitian matrix, descending.
///
/// Real input runs through the symmetric path directly; complex input uses
/// the 2n-dimensional real embedding, whose doubled spectrum is thinned back
/// out. The reconstruction residual stays within 1e-10·‖A‖_F.
pub fn eigenvalues_hermitian(a: &HermitianMatrix) -> Result<Spectrum> {
    let n = a.dim;
    if a.is_real() {
        let vals = eigen::symmetric_eigenvalues(n, &a.real_part())?;
        return Ok(Spectrum::from_descending(vals));
    }
    // [[Re, -Im], [Im, Re]] is symmetric for Hermitian input and each
    // eigenvalue of A appears exactly twice.
    let m = 2 * n;
    let mut embed = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a.data[i * n + j];
            embed[i * m + j] = z.re;
            embed[i * m + (n + j)] = -z.im;
            embed[(n + i) * m + j] = z.im;
            embed[(n + i) * m + (n + j)] = z.re;
        }
    }
    let doubled = eigen::symmetric_eigenvalues(m, &embed)?;
    let vals: Vec<f64> = doubled.iter().step_by(2).copied().collect();
    Ok(Spectrum::from_descending(vals))
}

/// Von Neumann entropy −Σ λ log₂ λ of a PSD Hermitian operator, in bits.
/// Subnormalized operators are fine; the trace is not rescaled.
pub fn von_neumann_entropy(a: &HermitianMatrix) -> Result<f64> {
    let spectrum = eigenvalues_hermitian(a)?;
    entropy_of_spectrum(spectrum.values())
}

/// Entropy of an eigenvalue list with the PSD clamp applied: values in
/// `[-1e-9, 0)` count as zero, lower values are an error.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut acc = KahanSum::new();
    for &lambda in eigenvalues {
        if lambda < -PSD_CLAMP {
            return Err(Error::NotPositive { min_eigenvalue: lambda });
        }
        if lambda > 0.0 {
            acc.add(-lambda * fp::log2(lambda));
        }
    }
    Ok(acc.value())
}
