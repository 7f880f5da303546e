//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL iteration, in the classic
//! Handbook/EISPACK formulation. Complex Hermitian input is handled by the
//! real embedding [[Re, -Im], [Im, Re]], whose spectrum is the Hermitian
//! spectrum doubled.

use crate::fp;
use crate::{Error, Result};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

const MAX_QL_SWEEPS: usize = 60;

/// Reduces the symmetric matrix stored row-major in `a` to tridiagonal form.
/// On exit `d` holds the diagonal and `e[1..]` the subdiagonal. When
/// `accumulate` is set, `a` is overwritten with the accumulated orthogonal
/// transform Q (columns are the basis change), as needed to recover
/// eigenvectors; otherwise `a` is scratch.
fn householder_tridiag(n: usize, a: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    debug_assert_eq!(a.len(), n * n);
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += fp::abs(a[i * n + k]);
            }
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -fp::sqrt(h) } else { fp::sqrt(h) };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut fsum = 0.0;
                for j in 0..=l {
                    if accumulate {
                        a[j * n + i] = a[i * n + j] / h;
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    fsum += e[j] * a[i * n + j];
                }
                let hh = fsum / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    e[j] -= hh * f;
                    let g = e[j];
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    if accumulate {
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += a[i * n + k] * a[k * n + j];
                    }
                    for k in 0..i {
                        a[k * n + j] -= g * a[k * n + i];
                    }
                }
            }
            d[i] = a[i * n + i];
            a[i * n + i] = 1.0;
            for j in 0..i {
                a[j * n + i] = 0.0;
                a[i * n + j] = 0.0;
            }
        }
    } else {
        for i in 0..n {
            d[i] = a[i * n + i];
        }
    }
}

/// Implicit-shift QL on a tridiagonal matrix. `d` holds the diagonal, `e[1..]`
/// the subdiagonal (`e[0]` unused). When `z` is `Some`, its n×n contents are
/// rotated along (pass the identity to get tridiagonal eigenvectors, or the
/// Householder Q to get eigenvectors of the original matrix; eigenvector i is
/// column i of z on exit, paired with `d[i]`).
fn ql_implicit(n: usize, d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    // Deflation floor at rounding level relative to the whole matrix. The
    // purely relative test below stalls on clusters of near-equal tiny
    // eigenvalues, whose residual couplings are rounding debris that no
    // amount of sweeping can push under EPSILON * |cluster scale|.
    let mut anorm = 0.0f64;
    for i in 0..n {
        anorm = anorm.max(fp::abs(d[i]) + fp::abs(e[i]));
    }
    let floor = f64::EPSILON * anorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = fp::abs(d[m]) + fp::abs(d[m + 1]);
                if fp::abs(e[m]) <= f64::EPSILON * dd || fp::abs(e[m]) <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NotConverged(String::from(
                    "QL sweep limit hit in symmetric eigensolver",
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = fp::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + fp::copysign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = fp::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    // deflate: a subdiagonal vanished mid-sweep
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_descending(d: &mut [f64], z: Option<&mut [f64]>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(core::cmp::Ordering::Equal));
    let sorted: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    d.copy_from_slice(&sorted);
    if let Some(z) = z {
        let old = z.to_vec();
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                z[row * n + new_col] = old[row * n + old_col];
            }
        }
    }
}

/// Eigenvalues of a real symmetric matrix (row-major), descending.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[0]]);
    }
    let mut work = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiag(n, &mut work, &mut d, &mut e, false);
    ql_implicit(n, &mut d, &mut e, None)?;
    sort_descending(&mut d, None);
    Ok(d)
}

/// Full eigendecomposition of a real symmetric matrix. Returns
/// `(eigenvalues, vectors)` with eigenvalues descending and eigenvector i in
/// column i of the row-major vector matrix.
pub fn symmetric_eigen(n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if n == 1 {
        return Ok((vec![a[0]], vec![1.0]));
    }
    let mut work = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiag(n, &mut work, &mut d, &mut e, true);
    ql_implicit(n, &mut d, &mut e, Some(&mut work))?;
    sort_descending(&mut d, Some(&mut work));
    Ok((d, work))
}

/// Eigenvalues (descending) and optionally eigenvectors of a symmetric
/// tridiagonal matrix given by its diagonal and subdiagonal.
pub fn tridiagonal_eigen(
    diag: &[f64],
    subdiag: &[f64],
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    debug_assert!(n == 0 || subdiag.len() == n - 1);
    if n == 0 {
        return Ok((Vec::new(), None));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(subdiag);
    if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        ql_implicit(n, &mut d, &mut e, Some(&mut z))?;
        sort_descending(&mut d, Some(&mut z));
        Ok((d, Some(z)))
    } else {
        ql_implicit(n, &mut d, &mut e, None)?;
        sort_descending(&mut d, None);
        Ok((d, None))
    }
}
