//! Asymptotic one-way secret-key rates for BB84 and six-state protocols with
//! local preprocessing.
//!
//! The postprocessing chain: Alice flips each sifted bit with probability `q`
//! (deliberate noise that costs Eve more than Bob), partitions the noisy key
//! into repetition blocks of length `m`, announces each block's syndrome, and
//! keeps one candidate key bit per block. The iterated variant stacks a second
//! flip round (probability `Q`) and a second repetition level (length `m2`) on
//! top of the first. Every rate is the difference of block mutual informations
//! `(I(X:Y) − I(X:E)) / blocklength`, with Eve held to the strongest attack
//! consistent with the observed error rate.
//!
//! Bob's side is exact classical bookkeeping over syndrome classes. Eve's side
//! reduces to entropies of mixtures of the form `α ρ^⊗n + β (ZρZ)^⊗n` for a
//! protocol-dependent qubit `ρ`; those are evaluated blockwise through
//! [`crate::schur_qubit`], which keeps blocklengths in the hundreds cheap.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::capacity::conc_rate;
use crate::channels::{effective_dist, ProtocolKind};
use crate::core_math::{
    entropy_of_spectrum, eigenvalues_hermitian, h2, log_binomial, HermitianMatrix, KahanSum,
    LnFactorials,
};
use crate::fp;
use crate::repcodes::{for_each_composition, DEFAULT_CLASS_BUDGET};
use crate::schur_efm;
use crate::schur_qubit::{mix_entropy_z_pair, BlochPair, MixEngine};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const LN_2: f64 = core::f64::consts::LN_2;

/// Block-weight cutoff for the six-state sum over phase-error counts, in
/// natural log. A dropped term contributes at most e⁻⁴⁵ · O(m) bits, so the
/// total error stays below 1e-14 for m ≤ 500, far under every tolerance
/// downstream. Applied before work is dispatched, so results do not depend
/// on thread count.
const WEIGHT_CUTOFF_LN: f64 = -45.0;

/// Preprocessing noise parameters shared by all protocol variants.
///
/// `p` is the measured bit-error rate between the sifted keys, `q` the
/// first-round flip probability, `big_q` the second-round flip probability
/// (zero for single-round protocols).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreprocParams {
    pub p: f64,
    pub q: f64,
    pub big_q: f64,
}

impl PreprocParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Self::iterated(p, q, 0.0)
    }

    pub fn iterated(p: f64, q: f64, big_q: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::Domain(format!("bit-error rate p={p} outside [0, 1/2)")));
        }
        if !(0.0..=0.5).contains(&q) {
            return Err(Error::Domain(format!("flip probability q={q} outside [0, 1/2]")));
        }
        if !(0.0..=0.5).contains(&big_q) {
            return Err(Error::Domain(format!("outer flip probability Q={big_q} outside [0, 1/2]")));
        }
        Ok(PreprocParams { p, q, big_q })
    }

    /// Alice-Bob error rate after the first flip round.
    pub fn p_tilde(&self) -> f64 {
        compose_flip(self.p, self.q)
    }

    /// Conditional phase-error weight entering the six-state analysis:
    /// p / (2(1−p)).
    pub fn p_prime(&self) -> f64 {
        self.p / (2.0 * (1.0 - self.p))
    }

    /// Total flip probability accumulated over both rounds.
    pub fn q_tot(&self) -> f64 {
        compose_flip(self.q, self.big_q)
    }
}

/// Probability that exactly one of two independent flips fires.
pub(crate) fn compose_flip(a: f64, b: f64) -> f64 {
    a + b - 2.0 * a * b
}

/// A computed rate with its mutual-information decomposition.
///
/// `rate` is exactly `(i_xy − i_xe) / block_size`; both informations are for
/// the whole block, in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateResult {
    /// Secret bits per sifted key bit. May be negative.
    pub rate: f64,
    /// I(X:Y) for the whole block.
    pub i_xy: f64,
    /// I(X:E) bound for the whole block.
    pub i_xe: f64,
    /// Sifted bits consumed per block: m, or m1·m2 for the iterated variant.
    pub block_size: u32,
    /// Echo of the noise parameters the rate was computed at.
    pub params: PreprocParams,
}

impl RateResult {
    fn assemble(i_xy: f64, i_xe: f64, block_size: u32, params: PreprocParams) -> Self {
        RateResult { rate: (i_xy - i_xe) / block_size as f64, i_xy, i_xe, block_size, params }
    }
}

fn require_block(m: u32, name: &str) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain(format!("blocklength {name} must be at least 1")));
    }
    Ok(())
}

fn require_prob(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name}={x} outside [0, 1]")));
    }
    Ok(())
}

/// Mutual information, in bits, between the repetition-block key bit and
/// Bob's block plus announced syndrome, at effective error rate `p_tilde`.
///
/// Syndrome strings of equal weight s share the same conditional
/// distribution, so the sum runs over the m weight classes with binomial
/// multiplicities. Everything is carried in logs: the two joint masses of a
/// class differ by a factor exp(±Δ) and the class entropy only needs
/// t = e^{−|Δ|}.
pub fn mutual_info_xy(m: u32, p_tilde: f64) -> Result<f64> {
    require_block(m, "m")?;
    require_prob(p_tilde, "p_tilde")?;
    if p_tilde == 0.0 || p_tilde == 1.0 {
        return Ok(1.0);
    }
    let lnp = fp::ln(p_tilde);
    let lnq = fp::ln(1.0 - p_tilde);
    let mut cond = KahanSum::new();
    for s in 0..m {
        // key bit 0 leaves a weight-s error pattern, key bit 1 a weight-(m−s) one
        let ln_a = s as f64 * lnp + (m - s) as f64 * lnq;
        let ln_b = (m - s) as f64 * lnp + s as f64 * lnq;
        let (hi, lo) = if ln_a >= ln_b { (ln_a, ln_b) } else { (ln_b, ln_a) };
        let t = fp::exp(lo - hi);
        // (1+t) H₂(1/(1+t)) in bits, the entropy of the class scaled by its mass/hi
        let g = if t > 0.0 { ((1.0 + t) * fp::ln(1.0 + t) - t * fp::ln(t)) / LN_2 } else { 0.0 };
        cond.add(fp::exp(log_binomial(m - 1, s as i64) + hi) * g);
    }
    Ok(1.0 - cond.value())
}

/// One-way BB84 key rate with flip probability `q` and repetition blocks of
/// length `m`, at bit-error rate `p`.
///
/// Eve's conditional block states are the two Z-conjugate tensor powers of a
/// single qubit whose coherence carries the (p, q) dependence; their mixture
/// entropy comes from the spin-block decomposition.
pub fn bb84_rate(m: u32, p: f64, q: f64) -> Result<RateResult> {
    require_block(m, "m")?;
    let params = PreprocParams::new(p, q)?;
    let bp = BlochPair::new(p, q)?;
    let i_xy = mutual_info_xy(m, params.p_tilde())?;
    let i_xe = mix_entropy_z_pair(m, 0.5, 0.5, &bp)? - m as f64 * bp.state_entropy();
    Ok(RateResult::assemble(i_xy, i_xe, m, params))
}

/// Six-state analog of [`bb84_rate`].
///
/// The six-state estimates pin the full Pauli error distribution, so Eve's
/// block states split over the number u of phase-affected positions. Each u
/// contributes pair mixtures on the remaining m − u positions, weighted over
/// the k flipped bits Alice's noise puts among the u marked ones.
pub fn sixstate_rate(m: u32, p: f64, q: f64) -> Result<RateResult> {
    require_block(m, "m")?;
    let params = PreprocParams::new(p, q)?;
    let bp = BlochPair::new(params.p_prime(), q)?;
    let i_xy = mutual_info_xy(m, params.p_tilde())?;
    let i_xe = sixstate_ixe(m, p, q, &bp)?;
    Ok(RateResult::assemble(i_xy, i_xe, m, params))
}

fn sixstate_ixe(m: u32, p: f64, q: f64, bp: &BlochPair) -> Result<f64> {
    let h2q = h2(q);
    let h2r = bp.state_entropy();
    let lnp = if p > 0.0 { fp::ln(p) } else { 0.0 }; // only reached with u > 0 when p > 0
    let ln1p = fp::ln(1.0 - p);
    let weights: Vec<(u32, f64)> = (0..=m)
        .filter_map(|u| {
            if p == 0.0 && u > 0 {
                return None;
            }
            let ln_w = log_binomial(m, u as i64) + u as f64 * lnp + (m - u) as f64 * ln1p;
            if ln_w < WEIGHT_CUTOFF_LN {
                return None;
            }
            Some((u, fp::exp(ln_w)))
        })
        .collect();

    let term = |&(u, w): &(u32, f64)| -> Result<f64> { Ok(w * sixstate_u_bracket(m, u, q, h2q, h2r, bp)?) };

    #[cfg(feature = "parallel")]
    let terms = weights.par_iter().map(term).collect::<Result<Vec<f64>>>()?;
    #[cfg(not(feature = "parallel"))]
    let terms = weights.iter().map(term).collect::<Result<Vec<f64>>>()?;

    // fixed accumulation order keeps results identical across thread counts
    let mut acc = KahanSum::new();
    for t in terms {
        acc.add(t);
    }
    Ok(acc.value())
}

/// Eve's information contribution conditioned on u phase-marked positions:
/// Σ_k C(u,k) S_k − u H₂(q) − (m−u) S(ρ̂), where S_k is the entropy of the
/// subnormalized pair mixture with weights q^k(1−q)^{u−k}/2 and its mirror.
fn sixstate_u_bracket(m: u32, u: u32, q: f64, h2q: f64, h2r: f64, bp: &BlochPair) -> Result<f64> {
    let rest = m - u;
    let engine = if rest > 0 { Some(MixEngine::new(rest, bp)?) } else { None };
    let mut inner = KahanSum::new();
    #[cfg(debug_assertions)]
    let mut mass = KahanSum::new();
    // k and u−k give the same entropy (the two weights just swap), fold them
    for k in 0..=u / 2 {
        let w1 = 0.5 * fp::powi(q, k) * fp::powi(1.0 - q, u - k);
        let w2 = 0.5 * fp::powi(q, u - k) * fp::powi(1.0 - q, k);
        let fold = if 2 * k < u { 2.0 } else { 1.0 };
        let ln_c = log_binomial(u, k as i64);
        let s_k = match &engine {
            Some(e) => e.entropy(w1, w2)?,
            None => {
                let c = w1 + w2;
                if c > 0.0 {
                    -c * fp::log2(c)
                } else {
                    0.0
                }
            }
        };
        // C(u,k) up to ~e³⁴⁵ and S_k down to ~e⁻³⁰⁰ cancel; pair them in logs
        if s_k > 0.0 {
            inner.add(fold * fp::exp(ln_c + fp::ln(s_k)));
        }
        #[cfg(debug_assertions)]
        if w1 + w2 > 0.0 {
            mass.add(fold * fp::exp(ln_c + fp::ln(w1 + w2)));
        }
    }
    #[cfg(debug_assertions)]
    debug_assert!(
        fp::abs(mass.value() - 1.0) < 1e-9,
        "pair-mixture weights for u={u} sum to {} rather than 1",
        mass.value()
    );
    Ok(inner.value() - u as f64 * h2q - rest as f64 * h2r)
}

/// Rate of the q = 0 protocols through the syndrome-conditioned joint
/// bit/phase uncertainty: (1 − H(both logical errors | syndrome class)) / m
/// at the protocol's effective Pauli distribution.
///
/// For BB84 (worst case, independent bit and phase errors) this equals
/// `bb84_rate(m, p, 0)` exactly. For six-state the two formulas differ away
/// from their common zero crossing, so use this one for thresholds only.
pub fn rate_q0(kind: ProtocolKind, m: u32, p: f64) -> Result<f64> {
    require_block(m, "m")?;
    let dist = effective_dist(kind, p, None)?;
    conc_rate(m, 1, &dist)
}

/// Number of syndrome-weight classes [`mutual_info_xy_iter`] would sum over.
fn iter_class_count(m1: u32, m2: u32) -> u128 {
    let mut total: u128 = 0;
    for s in 0..m2 {
        let a = binomial_saturating(m2 - s + m1 - 1, m1 - 1);
        let b = binomial_saturating(s + m1 - 1, m1 - 1);
        total = total.saturating_add(a.saturating_mul(b));
    }
    total
}

fn binomial_saturating(n: u32, k: u32) -> u128 {
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc = C(n−k+i−1, i−1); the product is divisible by i
        match acc.checked_mul(n - k + i) {
            Some(v) => acc = v / i,
            None => return u128::MAX,
        }
    }
    acc
}

/// Mutual information between the iterated key bit and Bob's data plus both
/// announced syndrome levels, per outer block of m1·m2 sifted bits.
///
/// Inner blocks are interchangeable within the outer-syndrome groups, so the
/// sum runs over joint weight classes: S outer positions carry a flipped
/// logical, and compositions c (respectively a) count how many unflipped
/// (flipped) blocks hold each inner weight. Multiplicities are multinomials
/// over blocks times per-block syndrome counts, carried in logs; the two
/// joint masses of a class again only need their ratio.
pub fn mutual_info_xy_iter(m1: u32, m2: u32, p_tilde: f64, big_q: f64) -> Result<f64> {
    require_block(m1, "m1")?;
    require_block(m2, "m2")?;
    require_prob(p_tilde, "p_tilde")?;
    require_prob(big_q, "Q")?;
    let classes = iter_class_count(m1, m2);
    if classes > DEFAULT_CLASS_BUDGET {
        return Err(Error::Budget { needed: classes, budget: DEFAULT_CLASS_BUDGET });
    }

    let bins = m1 as usize;
    // inner-block masses by error weight w: a keeps the inner logical, b flips it
    let mut g0 = vec![0.0; bins];
    let mut g1 = vec![0.0; bins];
    let mut ln_cw = vec![0.0; bins];
    for w in 0..bins {
        let a = fp::powi(p_tilde, w as u32) * fp::powi(1.0 - p_tilde, m1 - w as u32);
        let b = fp::powi(p_tilde, m1 - w as u32) * fp::powi(1.0 - p_tilde, w as u32);
        g0[w] = a * (1.0 - big_q) + b * big_q;
        g1[w] = a * big_q + b * (1.0 - big_q);
        ln_cw[w] = log_binomial(m1 - 1, w as i64);
    }

    let lf = LnFactorials::up_to(m2 as usize);
    let mut cond = KahanSum::new();
    #[cfg(debug_assertions)]
    let mut mass = KahanSum::new();
    for s in 0..m2 {
        let ln_outer = lf.ln_binomial((m2 - 1) as usize, s as usize);
        for_each_composition(m2 - s, bins, &mut |c| {
            let mut ln_c_mult = lf.ln_multinomial(c);
            let mut p0c = 1.0;
            let mut p1c = 1.0;
            for (j, &cj) in c.iter().enumerate() {
                if cj == 0 {
                    continue;
                }
                ln_c_mult += cj as f64 * ln_cw[j];
                p0c *= fp::powi(g0[j], cj);
                p1c *= fp::powi(g1[j], cj);
            }
            for_each_composition(s, bins, &mut |a| {
                let mut ln_mult = ln_outer + ln_c_mult + lf.ln_multinomial(a);
                let mut p0 = p0c;
                let mut p1 = p1c;
                for (j, &aj) in a.iter().enumerate() {
                    if aj == 0 {
                        continue;
                    }
                    ln_mult += aj as f64 * ln_cw[j];
                    p0 *= fp::powi(g1[j], aj);
                    p1 *= fp::powi(g0[j], aj);
                }
                let (hi, lo) = if p0 >= p1 { (p0, p1) } else { (p1, p0) };
                if hi > 0.0 {
                    let t = lo / hi;
                    if t > 0.0 {
                        let g = ((1.0 + t) * fp::ln(1.0 + t) - t * fp::ln(t)) / LN_2;
                        cond.add(fp::exp(ln_mult + fp::ln(hi)) * g);
                    }
                    #[cfg(debug_assertions)]
                    mass.add(fp::exp(ln_mult + fp::ln(hi)) * (1.0 + lo / hi));
                }
            });
        });
    }
    #[cfg(debug_assertions)]
    debug_assert!(
        fp::abs(mass.value() - 1.0) < 1e-9,
        "iterated class masses sum to {} rather than 1",
        mass.value()
    );
    Ok(1.0 - cond.value())
}

/// Key rate of the two-round iterated BB84 protocol: inner blocks of length
/// `m1` with flip probability `q`, then outer blocks of length `m2` over the
/// inner key bits with flip probability `big_q`.
///
/// Eve's side needs the entropy of ½A^⊗m2 + ½B^⊗m2 where A is the
/// Q-mixture of the two inner-block states and B its Z-conjugate. Small
/// systems (2^{m1·m2} ≤ 4096) are diagonalized densely; larger ones go
/// through the permuting-block decomposition over the 2^{m1}-letter alphabet.
pub fn bb84_iter_rate(m1: u32, m2: u32, p: f64, q: f64, big_q: f64) -> Result<RateResult> {
    require_block(m1, "m1")?;
    require_block(m2, "m2")?;
    let params = PreprocParams::iterated(p, q, big_q)?;
    let block = m1
        .checked_mul(m2)
        .ok_or_else(|| Error::Domain(format!("block size {m1}*{m2} overflows")))?;
    let bp = BlochPair::new(p, q)?;
    let i_xy = mutual_info_xy_iter(m1, m2, params.p_tilde(), big_q)?;
    let s_inner = mix_entropy_z_pair(m1, 1.0 - big_q, big_q, &bp)?;
    let s_big = iter_mix_entropy(m1, m2, &bp, big_q, false)?;
    let i_xe = s_big - m2 as f64 * s_inner;
    Ok(RateResult::assemble(i_xy, i_xe, block, params))
}

/// The inner-block state A = (1−Q) ρ^⊗m1 + Q (ZρZ)^⊗m1 and its Z-conjugate
/// B, as dense real matrices.
fn iter_block_matrices(m1: u32, bp: &BlochPair, big_q: f64) -> (Vec<f64>, Vec<f64>, usize) {
    let rho = rho_pair_matrix(bp);
    let zrz = [rho[0], -rho[1], -rho[2], rho[3]];
    let (r1, dim) = kron_power(&rho, 2, m1);
    let (r2, _) = kron_power(&zrz, 2, m1);
    let mut a = vec![0.0; dim * dim];
    for (slot, (x, y)) in a.iter_mut().zip(r1.iter().zip(r2.iter())) {
        *slot = (1.0 - big_q) * x + big_q * y;
    }
    let mut b = vec![0.0; dim * dim];
    for i in 0..dim {
        let pi = (i as u32).count_ones();
        for j in 0..dim {
            let sign = if (pi + (j as u32).count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
            b[i * dim + j] = sign * a[i * dim + j];
        }
    }
    (a, b, dim)
}

/// The qubit behind a [`BlochPair`], explicitly: diag(1−p, p) with coherence
/// (1−2q)√(p(1−p)). Its Z-conjugate negates the off-diagonal.
fn rho_pair_matrix(bp: &BlochPair) -> [f64; 4] {
    let p = bp.p_eff();
    let c = (1.0 - 2.0 * bp.q()) * fp::sqrt(p * (1.0 - p));
    [1.0 - p, c, c, p]
}

fn kron_real(a: &[f64], da: usize, b: &[f64], db: usize) -> Vec<f64> {
    let d = da * db;
    let mut out = vec![0.0; d * d];
    for i in 0..da {
        for j in 0..da {
            let aij = a[i * da + j];
            if aij == 0.0 {
                continue;
            }
            for r in 0..db {
                for c in 0..db {
                    out[(i * db + r) * d + (j * db + c)] = aij * b[r * db + c];
                }
            }
        }
    }
    out
}

fn kron_power(a: &[f64], dim: usize, k: u32) -> (Vec<f64>, usize) {
    let mut acc = a.to_vec();
    let mut d = dim;
    for _ in 1..k {
        acc = kron_real(&acc, d, a, dim);
        d *= dim;
    }
    (acc, d)
}

/// S(½ A^⊗m2 + ½ B^⊗m2) for the inner-block states of the iterated
/// protocol. `force_schur` exists for cross-testing the two routes against
/// each other on systems small enough for both.
fn iter_mix_entropy(m1: u32, m2: u32, bp: &BlochPair, big_q: f64, force_schur: bool) -> Result<f64> {
    let bits = m1 as u64 * m2 as u64;
    if !force_schur && bits <= 12 {
        let (a, b, dim) = iter_block_matrices(m1, bp, big_q);
        let (am, big_dim) = kron_power(&a, dim, m2);
        let (bm, _) = kron_power(&b, dim, m2);
        let full: Vec<f64> = am.iter().zip(bm.iter()).map(|(x, y)| 0.5 * x + 0.5 * y).collect();
        let h = HermitianMatrix::from_real(big_dim, &full)?;
        return entropy_of_spectrum(eigenvalues_hermitian(&h)?.values());
    }
    if m1 > 7 {
        return Err(Error::Unsupported(format!(
            "iterated Eve entropy beyond the dense cutoff needs an alphabet of 2^{m1} > 255 letters"
        )));
    }
    let qdim = 1u32 << m1;
    let basis = schur_efm::schur_basis_with_budget(m2, qdim, 1u128 << bits)?;
    let (a, b, dim) = iter_block_matrices(m1, bp, big_q);
    let ah = HermitianMatrix::from_real(dim, &a)?;
    let bh = HermitianMatrix::from_real(dim, &b)?;
    schur_efm::mixed_power_entropy(&basis, &[(0.5, &ah), (0.5, &bh)])
}
