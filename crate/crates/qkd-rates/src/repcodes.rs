//! Joint probabilities of logical errors and syndrome classes for the
//! [[m,1]] cat code and the [[m1·m2,1]] concatenated cat code on a memoryless
//! Pauli channel.
//!
//! Syndrome strings are compressed into frequency classes: a per-string
//! probability depends only on the inner-syndrome weight of each block and
//! the block's phase-parity offset, so the sums run over classes weighted by
//! their multiplicity. Multiplicities are carried as logs; per-string
//! probabilities stay in the linear domain because the signed F0−F1 products
//! must keep their sign (double precision covers m2 ≤ 32 at |F| ≤ 1).

use crate::channels::PauliDist;
use crate::core_math::{KahanSum, LnFactorials};
use crate::fp;
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

/// Default cap on the number of enumerated concatenated-code classes.
pub const DEFAULT_CLASS_BUDGET: u128 = 100_000_000;

/// Logical error bits (lx, lz) of an encoded qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogicalError {
    pub lx: bool,
    pub lz: bool,
}

impl LogicalError {
    pub const ALL: [LogicalError; 4] = [
        LogicalError { lx: false, lz: false },
        LogicalError { lx: true, lz: false },
        LogicalError { lx: true, lz: true },
        LogicalError { lx: false, lz: true },
    ];
}

/// Syndrome class of the [[m,1]] cat code: all syndromes whose sign-canonical
/// bit pattern has the same weight share one probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatSyndromeClass {
    pub m: u32,
    pub weight: u32,
}

impl CatSyndromeClass {
    pub fn new(m: u32, weight: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("cat block size must be at least 1".into()));
        }
        if weight + 1 > m {
            return Err(Error::Domain(format!(
                "syndrome weight {weight} outside [0, {}]",
                m - 1
            )));
        }
        Ok(CatSyndromeClass { m, weight })
    }

    /// ln of the number of syndrome strings in the class, ln C(m−1, weight).
    pub fn log_multiplicity(&self) -> f64 {
        crate::core_math::log_binomial(self.m - 1, self.weight as i64)
    }

    pub fn multiplicity(&self) -> f64 {
        fp::exp(self.log_multiplicity())
    }
}

/// Syndrome class of the concatenated code: the first block's inner weight
/// plus the frequency table of (phase-parity offset, inner weight) pairs over
/// the remaining m2−1 blocks. `freq` is indexed `alpha * m1 + beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcSyndromeClass {
    pub m1: u32,
    pub m2: u32,
    pub beta1: u32,
    pub freq: Vec<u32>,
}

impl ConcSyndromeClass {
    pub fn new(m1: u32, m2: u32, beta1: u32, freq: Vec<u32>) -> Result<Self> {
        if m1 < 1 || m2 < 1 {
            return Err(Error::Domain("block sizes must be at least 1".into()));
        }
        if beta1 >= m1 {
            return Err(Error::Domain(format!("beta1 {beta1} outside [0, {}]", m1 - 1)));
        }
        if freq.len() != 2 * m1 as usize {
            return Err(Error::Shape(format!(
                "frequency vector length {} != 2*m1 = {}",
                freq.len(),
                2 * m1
            )));
        }
        let total: u32 = freq.iter().sum();
        if total != m2 - 1 {
            return Err(Error::Domain(format!(
                "frequency vector sums to {total}, expected m2-1 = {}",
                m2 - 1
            )));
        }
        Ok(ConcSyndromeClass { m1, m2, beta1, freq })
    }

    /// ln of the class multiplicity:
    /// C(m1−1, beta1) · multinomial(m2−1; freq) · Π_j C(m1−1, β(j))^freq[j].
    pub fn log_multiplicity(&self) -> f64 {
        let table = LnFactorials::up_to((self.m1.max(self.m2)) as usize);
        self.log_multiplicity_with(&table)
    }

    pub(crate) fn log_multiplicity_with(&self, table: &LnFactorials) -> f64 {
        let m1 = self.m1 as usize;
        let mut v = table.ln_binomial(m1 - 1, self.beta1 as usize);
        v += table.ln_multinomial(&self.freq);
        for (j, &count) in self.freq.iter().enumerate() {
            if count > 0 {
                let beta = j % m1;
                v += count as f64 * table.ln_binomial(m1 - 1, beta);
            }
        }
        v
    }
}

/// The two block weights (F0, F1): the probability weight of an inner cat
/// block carrying logical bit 0 (resp. 1) given phase parity lz ⊕ alpha and
/// sign-canonical syndrome weight beta. All base powers use 0^0 = 1.
pub fn f0_f1(lz: bool, alpha: bool, beta: u32, m1: u32, dist: &PauliDist) -> (f64, f64) {
    debug_assert!(beta <= m1);
    let bit = dist.p_x + dist.p_y;
    let no_bit = dist.p_i + dist.p_z;
    let bit_d = dist.p_x - dist.p_y;
    let no_bit_d = dist.p_i - dist.p_z;
    let sign = if lz ^ alpha { -1.0 } else { 1.0 };
    let f0 = 0.5
        * (fp::powi(bit, beta) * fp::powi(no_bit, m1 - beta)
            + sign * fp::powi(bit_d, beta) * fp::powi(no_bit_d, m1 - beta));
    let f1 = 0.5
        * (fp::powi(bit, m1 - beta) * fp::powi(no_bit, beta)
            + sign * fp::powi(bit_d, m1 - beta) * fp::powi(no_bit_d, beta));
    (f0, f1)
}

/// Joint probability P(l, s) of a logical error and one cat-code syndrome
/// string in the given weight class.
pub fn cat_joint(l: LogicalError, cls: CatSyndromeClass, dist: &PauliDist) -> f64 {
    let m = cls.m;
    let s = cls.weight;
    let (a, b) = if l.lx { (m - s, s) } else { (s, m - s) };
    let bit = dist.p_x + dist.p_y;
    let no_bit = dist.p_i + dist.p_z;
    let bit_d = dist.p_x - dist.p_y;
    let no_bit_d = dist.p_i - dist.p_z;
    let sign = if l.lz { -1.0 } else { 1.0 };
    0.5 * (fp::powi(bit, a) * fp::powi(no_bit, b) + sign * fp::powi(bit_d, a) * fp::powi(no_bit_d, b))
}

/// Joint probability P(l, s) of a logical error and one concatenated-code
/// syndrome string in the given class (before multiplicity).
pub fn conccat_joint(l: LogicalError, cls: &ConcSyndromeClass, dist: &PauliDist) -> f64 {
    let mut prod_sum = 1.0;
    let mut prod_diff = 1.0;
    let (f0, f1) = f0_f1(l.lz, false, cls.beta1, cls.m1, dist);
    prod_sum *= f0 + f1;
    prod_diff *= f0 - f1;
    for (j, &count) in cls.freq.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let alpha = j >= cls.m1 as usize;
        let beta = (j % cls.m1 as usize) as u32;
        let (f0, f1) = f0_f1(l.lz, alpha, beta, cls.m1, dist);
        prod_sum *= fp::powi(f0 + f1, count);
        prod_diff *= fp::powi(f0 - f1, count);
    }
    let sign = if l.lx { -1.0 } else { 1.0 };
    0.5 * (prod_sum + sign * prod_diff)
}

/// Number of concatenated-code syndrome classes, m1 · C(m2−1 + 2·m1−1, m2−1).
pub fn conc_class_count(m1: u32, m2: u32) -> u128 {
    let n = (m2 - 1 + 2 * m1 - 1) as u128;
    let k = (m2 - 1) as u128;
    m1 as u128 * binomial_u128(n, k)
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

/// Calls `f` for every composition of `total` into `bins` parts, in
/// lexicographic order over the part vector. The slice passed to `f` is
/// reused between calls.
pub(crate) fn for_each_composition<F: FnMut(&[u32])>(total: u32, bins: usize, f: &mut F) {
    let mut parts = alloc::vec![0u32; bins];
    fn recurse<F: FnMut(&[u32])>(parts: &mut [u32], idx: usize, remaining: u32, f: &mut F) {
        if idx + 1 == parts.len() {
            parts[idx] = remaining;
            f(parts);
            return;
        }
        for v in 0..=remaining {
            parts[idx] = v;
            recurse(parts, idx + 1, remaining - v, f);
        }
        parts[idx] = 0;
    }
    if bins == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    recurse(&mut parts, 0, total, f);
}

/// All syndrome classes for block sizes (m1, m2), in lexicographic order over
/// (beta1, frequency vector).
pub fn conc_classes(m1: u32, m2: u32) -> Vec<ConcSyndromeClass> {
    let mut out = Vec::new();
    for beta1 in 0..m1 {
        for_each_composition(m2 - 1, 2 * m1 as usize, &mut |freq| {
            out.push(ConcSyndromeClass {
                m1,
                m2,
                beta1,
                freq: freq.to_vec(),
            });
        });
    }
    out
}

/// Conditional entropy H(L | S) in bits of the logical-error pair given the
/// syndrome, summed over all syndrome classes with their multiplicities.
pub fn conccat_conditional_entropy(m1: u32, m2: u32, dist: &PauliDist) -> Result<f64> {
    conccat_conditional_entropy_with_budget(m1, m2, dist, DEFAULT_CLASS_BUDGET)
}

/// Per-class contribution P(s)·H(L|s), written so the outer accumulation can
/// stay compensated: Σ_l −P(l,s)log₂P(l,s) + P(s)log₂P(s), scaled by the
/// class multiplicity.
fn class_term(cls: &ConcSyndromeClass, dist: &PauliDist, table: &LnFactorials) -> f64 {
    let mut joints = [0.0f64; 4];
    for (slot, &l) in joints.iter_mut().zip(LogicalError::ALL.iter()) {
        *slot = conccat_joint(l, cls, dist).max(0.0);
    }
    let ps: f64 = joints.iter().sum();
    if ps <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &j in &joints {
        if j > 0.0 {
            h -= j * fp::log2(j);
        }
    }
    h += ps * fp::log2(ps);
    fp::exp(cls.log_multiplicity_with(table)) * h
}

pub fn conccat_conditional_entropy_with_budget(
    m1: u32,
    m2: u32,
    dist: &PauliDist,
    budget: u128,
) -> Result<f64> {
    if m1 < 1 || m2 < 1 {
        return Err(Error::Domain("block sizes must be at least 1".into()));
    }
    if m2 > 32 {
        return Err(Error::Unsupported(
            "m2 > 32 exceeds the documented precision range of the linear-domain products".into(),
        ));
    }
    let count = conc_class_count(m1, m2);
    if count > budget {
        return Err(Error::Budget { needed: count, budget });
    }
    let table = LnFactorials::up_to((m1 * m2) as usize);

    #[cfg(feature = "parallel")]
    {
        // one task per (beta1, first frequency slot); each streams its
        // sub-tree sequentially, and the ordered per-task sums are combined
        // pairwise so the result is independent of thread count
        use rayon::prelude::*;
        let mut tasks = Vec::new();
        for beta1 in 0..m1 {
            for first in 0..=(m2 - 1) {
                tasks.push((beta1, first));
            }
        }
        let partials: Vec<f64> = tasks
            .par_iter()
            .map(|&(beta1, first)| {
                let mut acc = KahanSum::new();
                let bins = 2 * m1 as usize;
                for_each_composition(m2 - 1 - first, bins - 1, &mut |rest| {
                    let mut freq = Vec::with_capacity(bins);
                    freq.push(first);
                    freq.extend_from_slice(rest);
                    let cls = ConcSyndromeClass { m1, m2, beta1, freq };
                    acc.add(class_term(&cls, dist, &table));
                });
                acc.value()
            })
            .collect();
        Ok(pairwise_sum(&partials))
    }

    #[cfg(not(feature = "parallel"))]
    {
        let mut acc = KahanSum::new();
        for beta1 in 0..m1 {
            for_each_composition(m2 - 1, 2 * m1 as usize, &mut |freq| {
                let cls = ConcSyndromeClass {
                    m1,
                    m2,
                    beta1,
                    freq: freq.to_vec(),
                };
                acc.add(class_term(&cls, dist, &table));
            });
        }
        Ok(acc.value())
    }
}

#[cfg(feature = "parallel")]
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}
