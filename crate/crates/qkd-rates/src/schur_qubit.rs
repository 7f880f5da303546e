//! Block-diagonal evaluation of S(α·ρ^⊗n + β·(ZρZ)^⊗n) for a single-qubit
//! state ρ, using the decomposition of (C²)^⊗n into spin-j blocks.
//!
//! Both tensor factors are diagonal in their own product eigenbasis with the
//! same block eigenvalues; only the relative Bloch-sphere angle θ between the
//! two eigenbases enters, as one Wigner rotation per block. Each spin-j block
//! appears with multiplicity h_j, so the entropy is a weighted sum of
//! (2j+1)-dimensional eigenproblems instead of one 2ⁿ-dimensional one.
//!
//! Half-integer spins are passed as `twice_j` integers throughout.

use crate::core_math::{eigen, log_binomial, KahanSum};
use crate::fp;
use crate::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// The geometry shared by ρ and ZρZ: both have spectrum ((1+r)/2, (1−r)/2)
/// and their Bloch vectors subtend the angle θ.
///
/// Built from the effective bit-error probability and the flip probability q;
/// the two appearances of the underlying pure-state pair in the protocol
/// derivations differ by a √p ↔ √(1−p) swap, but (r, cos θ) and hence every
/// spectrum computed here are identical for both, so only this pair of
/// invariants leaves the constructor.
#[derive(Clone, Copy, Debug)]
pub struct BlochPair {
    p_eff: f64,
    q: f64,
    r: f64,
    cos_theta: f64,
}

impl BlochPair {
    pub fn new(p_eff: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_eff) {
            return Err(Error::Domain(format!("effective probability {p_eff} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("flip probability {q} outside [0, 1]")));
        }
        let pp = p_eff * (1.0 - p_eff);
        let qq = q * (1.0 - q);
        let r = fp::sqrt((1.0 - 16.0 * pp * qq).max(0.0));
        // r = 0 collapses both states to I/2; the angle is then immaterial
        let cos_theta = if r > 0.0 {
            ((1.0 - 8.0 * pp * (1.0 - 2.0 * qq)) / (r * r)).clamp(-1.0, 1.0)
        } else {
            1.0
        };
        Ok(BlochPair { p_eff, q, r, cos_theta })
    }

    pub fn p_eff(&self) -> f64 {
        self.p_eff
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Common Bloch-vector length of the two states.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    /// Relative angle θ ∈ [0, π].
    pub fn theta(&self) -> f64 {
        fp::acos(self.cos_theta)
    }

    /// Larger eigenvalue (1+r)/2 shared by both states.
    pub fn rho1(&self) -> f64 {
        0.5 * (1.0 + self.r)
    }

    /// Smaller eigenvalue (1−r)/2.
    pub fn rho2(&self) -> f64 {
        0.5 * (1.0 - self.r)
    }

    /// Binary entropy of either state, H₂((1+r)/2).
    pub fn state_entropy(&self) -> f64 {
        crate::core_math::h2(self.rho1())
    }
}

fn check_parity(n: u32, twice_j: u32) -> Result<()> {
    if twice_j > n || !(n - twice_j).is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "spin 2j={twice_j} incompatible with n={n}: need 2j ≤ n and matching parity"
        )));
    }
    Ok(())
}

/// Multiplicity h_j of the spin-j block in (C²)^⊗n,
/// C(n, n/2−j)·(2j+1)/(n/2+j+1), equal to C(n, n/2−j) − C(n, n/2−j−1).
///
/// Exact for values representable in an f64 (always the case for n ≤ 120,
/// where an integer path is used); beyond that the value is correct to
/// ~1e-14 relative and [`log_degeneracy`] carries the precision-critical
/// paths.
pub fn degeneracy(n: u32, twice_j: u32) -> Result<f64> {
    check_parity(n, twice_j)?;
    let d = (n - twice_j) / 2;
    if n <= 120 {
        let big = binomial_u128(n, d) - if d == 0 { 0 } else { binomial_u128(n, d - 1) };
        Ok(big as f64)
    } else {
        Ok(fp::exp(log_degeneracy(n, twice_j)?))
    }
}

/// ln h_j, stable for all n ≤ 500 and beyond.
pub fn log_degeneracy(n: u32, twice_j: u32) -> Result<f64> {
    check_parity(n, twice_j)?;
    let d = (n - twice_j) / 2;
    Ok(log_binomial(n, d as i64) + fp::ln((twice_j + 1) as f64)
        - fp::ln(((n + twice_j) / 2 + 1) as f64))
}

pub(crate) fn binomial_u128(n: u32, k: u32) -> u128 {
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

/// Diagonal of the spin-j block of ρ^⊗n in ρ's own eigenbasis:
/// entries ρ₁^{j−k} ρ₂^{j+k} (ρ₁ρ₂)^{n/2−j} for k = −j..j.
pub fn diag_irrep(n: u32, twice_j: u32, rho1: f64, rho2: f64) -> Result<Vec<f64>> {
    check_parity(n, twice_j)?;
    if rho1 < 0.0 || rho2 < 0.0 {
        return Err(Error::Domain("irrep eigenvalue arguments must be nonnegative".into()));
    }
    let outer = (n - twice_j) / 2;
    let scale = fp::powi(rho1 * rho2, outer);
    let dim = twice_j as usize + 1;
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        // i-th entry from the ρ₁-rich end: ρ₁^{2j−i} ρ₂^i
        out.push(scale * fp::powi(rho1, twice_j - i as u32) * fp::powi(rho2, i as u32));
    }
    Ok(out)
}

/// Wigner rotation exp(−i·J_y·θ/2) in the spin-j irrep: a real orthogonal
/// (2j+1)-dimensional matrix, row-major, basis ordered k = j..−j.
///
/// J_x is real symmetric tridiagonal in this basis; the matrix exponential is
/// assembled from its eigendecomposition, with the J_y phases folded in as
/// the exact fourfold sign pattern they reduce to for real output.
pub fn wigner_rotation(twice_j: u32, theta: f64) -> Vec<f64> {
    let dim = twice_j as usize + 1;
    if dim == 1 {
        return vec![1.0];
    }
    let tj = twice_j as i64;
    let mut offdiag = Vec::with_capacity(dim - 1);
    for a in 0..(dim - 1) as i64 {
        // ⟨k+1|J₊|k⟩ = √(j(j+1) − k(k+1)) at k = j−a−1, halved for J_x
        let num = tj * (tj + 2) - (tj - 2 * a - 2) * (tj - 2 * a);
        offdiag.push(0.5 * fp::sqrt(num as f64 / 4.0));
    }
    let diag = vec![0.0; dim];
    let (lam, vecs) = eigen::tridiagonal_eigen(&diag, &offdiag, true)
        .expect("tridiagonal QL converges for angular-momentum matrices");
    let v = vecs.expect("vectors requested");
    let half = 0.5 * theta;
    let cos_l: Vec<f64> = lam.iter().map(|&x| fp::cos(half * x)).collect();
    let sin_l: Vec<f64> = lam.iter().map(|&x| fp::sin(half * x)).collect();
    let mut out = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            let mut c = 0.0;
            let mut s = 0.0;
            for i in 0..dim {
                let w = v[a * dim + i] * v[b * dim + i];
                c += w * cos_l[i];
                s += w * sin_l[i];
            }
            // exp(−iθ/2·J_y) = P(exp(−iθ/2·J_x)) conjugated by the J_z phase
            // diag; the phases reduce to this sign pattern on (a−b) mod 4
            out[a * dim + b] = match (4 + (a as i64 - b as i64) % 4) % 4 {
                0 => c,
                1 => s,
                2 => -c,
                _ => -s,
            };
        }
    }
    out
}

/// Per-block spectra of α·ρ^⊗n + β·(ZρZ)^⊗n: pairs (h_j, eigenvalues of the
/// spin-j block), j descending, eigenvalues descending within a block.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    /// (block multiplicity h_j, the 2j+1 block eigenvalues), j = n/2 first.
    pub blocks: Vec<(f64, Vec<f64>)>,
}

impl BlockSpectrum {
    /// Total eigenvalue mass Σ h_j Σ λ; equals α+β up to roundoff.
    pub fn mass(&self) -> f64 {
        let mut acc = KahanSum::new();
        for (h, eigs) in &self.blocks {
            for &e in eigs {
                acc.add(h * e);
            }
        }
        acc.value()
    }
}

/// Unpruned per-block spectra at natural scale. Intended for moderate n
/// (tests, diagnostics); the entropy path below prunes and rescales instead.
pub fn mix_block_spectrum(n: u32, alpha: f64, beta: f64, bp: &BlochPair) -> Result<BlockSpectrum> {
    check_mix_args(n, alpha, beta)?;
    let theta = bp.theta();
    let mut blocks = Vec::new();
    for twice_j in spins(n) {
        let dim = twice_j as usize + 1;
        let lam = diag_irrep(n, twice_j, bp.rho1(), bp.rho2())?;
        let rot = wigner_rotation(twice_j, 2.0 * theta);
        let mut m = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                let mut x = 0.0;
                for i in 0..dim {
                    x += rot[a * dim + i] * lam[i] * rot[b * dim + i];
                }
                m[a * dim + b] = alpha * x;
            }
        }
        for (i, &l) in lam.iter().enumerate() {
            m[i * dim + i] += beta * l;
        }
        let eigs = eigen::symmetric_eigenvalues(dim, &m)?;
        blocks.push((degeneracy(n, twice_j)?, eigs));
    }
    Ok(BlockSpectrum { blocks })
}

/// S(α·ρ^⊗n + β·(ZρZ)^⊗n) in bits, by blockwise eigensolves.
///
/// Equals the dense 2ⁿ von Neumann entropy; blocks whose total mass is below
/// 1e-18·(α+β) are skipped (the entropy they could carry is < 1e-16).
pub fn mix_entropy_z_pair(n: u32, alpha: f64, beta: f64, bp: &BlochPair) -> Result<f64> {
    let engine = MixEngine::new(n, bp)?;
    engine.entropy(alpha, beta)
}

fn check_mix_args(n: u32, alpha: f64, beta: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("blocklength must be at least 1".into()));
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(Error::Domain("mixture weights must be nonnegative".into()));
    }
    Ok(())
}

/// Spin labels 2j = n, n−2, …, (1 or 0).
pub(crate) fn spins(n: u32) -> impl Iterator<Item = u32> {
    (0..=n).rev().step_by(2)
}

/// Precomputed per-spin data for repeated mixture-entropy evaluations against
/// one BlochPair: the scaled block diagonal Λ̂, its rotation R Λ̂ Rᵀ by the
/// relative angle, and log-domain scale factors. Evaluating at new (α, β)
/// then costs one symmetric eigensolve per surviving block.
pub(crate) struct MixEngine {
    n: u32,
    blocks: Vec<EngineBlock>,
}

struct EngineBlock {
    dim: usize,
    /// ln(h_j · Λ-scale): the log of the factor relating Λ̂ to h_j·Λ.
    ln_weight: f64,
    /// ln of the Λ-scale alone (entropy needs the eigenvalue scale without h).
    ln_scale: f64,
    lam_hat: Vec<f64>,
    rotated: Vec<f64>,
    trace_hat: f64,
}

/// Blocks with mass below this fraction of α+β contribute < 1e-16 bits and
/// are skipped.
const BLOCK_MASS_CUTOFF_LN: f64 = -41.5; // ln(1e-18)

impl MixEngine {
    pub fn new(n: u32, bp: &BlochPair) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("blocklength must be at least 1".into()));
        }
        let rho1 = bp.rho1();
        let rho2 = bp.rho2();
        let ratio = if rho1 > 0.0 { rho2 / rho1 } else { 0.0 };
        let theta = bp.theta();
        let spin_list: Vec<u32> = spins(n).collect();
        let build = |&twice_j: &u32| -> Result<EngineBlock> {
            let dim = twice_j as usize + 1;
            let outer = (n - twice_j) / 2;
            // Λ = (ρ₁ρ₂)^{n/2−j} ρ₁^{2j} Λ̂ with Λ̂ entries (ρ₂/ρ₁)^i
            let ln_scale = if outer == 0 {
                twice_j as f64 * fp::ln(rho1)
            } else {
                outer as f64 * fp::ln(rho1 * rho2) + twice_j as f64 * fp::ln(rho1)
            };
            let ln_weight = log_degeneracy(n, twice_j)? + ln_scale;
            let mut lam_hat = Vec::with_capacity(dim);
            let mut trace_hat = 0.0;
            for i in 0..dim {
                let v = fp::powi(ratio, i as u32);
                lam_hat.push(v);
                trace_hat += v;
            }
            let rot = wigner_rotation(twice_j, 2.0 * theta);
            let mut rotated = vec![0.0; dim * dim];
            for a in 0..dim {
                for b in 0..=a {
                    let mut x = 0.0;
                    for i in 0..dim {
                        x += rot[a * dim + i] * lam_hat[i] * rot[b * dim + i];
                    }
                    rotated[a * dim + b] = x;
                    rotated[b * dim + a] = x;
                }
            }
            Ok(EngineBlock {
                dim,
                ln_weight,
                ln_scale,
                lam_hat,
                rotated,
                trace_hat,
            })
        };

        #[cfg(feature = "parallel")]
        let blocks: Vec<EngineBlock> = {
            use rayon::prelude::*;
            spin_list.par_iter().map(build).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let blocks: Vec<EngineBlock> = spin_list.iter().map(build).collect::<Result<_>>()?;

        Ok(MixEngine { n, blocks })
    }

    /// S(α·ρ^⊗n + β·(ZρZ)^⊗n) in bits.
    pub fn entropy(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_mix_args(self.n, alpha, beta)?;
        let total = alpha + beta;
        if total <= 0.0 {
            return Ok(0.0);
        }
        let ln_total = fp::ln(total);
        let eval = |block: &EngineBlock| -> Result<f64> {
            // block mass = h_j (α+β) scale tr Λ̂
            let ln_mass = block.ln_weight + ln_total + fp::ln(block.trace_hat);
            let rel = ln_mass - ln_total;
            if rel.is_nan() || rel <= BLOCK_MASS_CUTOFF_LN {
                return Ok(0.0);
            }
            let dim = block.dim;
            let s = alpha / total;
            let mut m = Vec::with_capacity(dim * dim);
            m.extend(block.rotated.iter().map(|&x| s * x));
            let t = 1.0 - s;
            for i in 0..dim {
                m[i * dim + i] += t * block.lam_hat[i];
            }
            let eigs = eigen::symmetric_eigenvalues(dim, &m)?;
            let mut shat = 0.0;
            for &e in &eigs {
                if e < -crate::core_math::PSD_CLAMP {
                    return Err(Error::NotPositive { min_eigenvalue: e });
                }
                if e > 0.0 {
                    shat -= e * fp::log2(e);
                }
            }
            // eigenvalues of the true block are c'·ê with c' = (α+β)·scale
            let ln_c = ln_total + block.ln_scale;
            let log2_c = ln_c * core::f64::consts::LOG2_E;
            let weight = fp::exp(block.ln_weight + ln_total);
            Ok(weight * (shat - log2_c * block.trace_hat))
        };

        #[cfg(feature = "parallel")]
        let contributions: Vec<f64> = {
            use rayon::prelude::*;
            self.blocks.par_iter().map(eval).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let contributions: Vec<f64> = self.blocks.iter().map(eval).collect::<Result<_>>()?;

        let mut acc = KahanSum::new();
        for c in contributions {
            acc.add(c);
        }
        Ok(acc.value())
    }
}
