//! Schur bases for n qudits, built as the common eigenbasis of commuting
//! symmetric-group class operators.
//!
//! The computational basis of (C^q)^⊗n splits into configuration subspaces
//! (fixed letter multiset). On each subspace the two-sided class operators of
//! the subgroup chain S_n ⊃ S_{n-1} ⊃ … ⊃ S_2 commute pairwise, and their
//! joint spectrum separates a complete orthonormal basis labeled by a
//! partition ν of n, a Weyl tableau (the GL_q side) and a Young tableau (the
//! S_n side). Each vector's sign is pinned by requiring a positive
//! coefficient on its principal basis state, the state that places the Weyl
//! letter of every box at the position the Young tableau assigns to it.
//!
//! The payoff is [`block_project`]: in this basis any n-fold tensor power
//! ρ^⊗n is block diagonal with one block per ν of dimension h_ν(GL_q),
//! repeated h_ν(S_n) times, which reduces 2^{m1·m2}-dimensional entropies to
//! a handful of small eigenproblems. [`mixed_power_entropy`] wraps that for
//! mixtures Σ w_t ρ_t^⊗n.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::core_math::eigen::symmetric_eigen;
use crate::core_math::{entropy_of_spectrum, eigenvalues_hermitian, HermitianMatrix, KahanSum};
use crate::fp;
use crate::repcodes::for_each_composition;
use crate::schur_qubit::binomial_u128;
use crate::{Error, Result};

/// Joint eigenvalues are snapped to the nearest integer; a residual above
/// this means the generic combination failed to separate the spectrum.
const SNAP_TOL: f64 = 1e-6;
/// A principal coefficient smaller than this cannot fix the sign reliably.
const PRINCIPAL_MIN: f64 = 1e-10;
/// Coefficients below this are eigensolver noise on exact zeros.
const COEFF_DROP: f64 = 1e-12;
/// Hermiticity contract for projected blocks.
const BLOCK_HERM_TOL: f64 = 1e-10;
/// Largest total integer weight for which the mixed-radix combination keeps
/// a guaranteed spectral gap well above eigensolver resolution.
const GUARANTEED_WEIGHT_LIMIT: u128 = 1 << 40;
/// Fallback bases for irrational-ratio weights when the guaranteed scheme
/// would overflow; each is retried in turn and verified by the snap check.
const LADDER_BASES: [f64; 4] = [
    core::f64::consts::PI,
    core::f64::consts::E,
    1.0 + core::f64::consts::SQRT_2,
    1.618_033_988_749_895,
];

/// Letter multiset of a configuration subspace: `counts[l]` copies of letter
/// `l`, with `q = counts.len()` and `n = Σ counts`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    counts: Vec<u32>,
}

impl Configuration {
    /// Requires at least one letter slot, a positive total, and q ≤ 255 so
    /// states fit in byte strings.
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Domain("configuration needs at least one letter".into()));
        }
        if counts.len() > 255 {
            return Err(Error::Domain(format!(
                "local dimension {} exceeds 255",
                counts.len()
            )));
        }
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        if n == 0 {
            return Err(Error::Domain("configuration is empty".into()));
        }
        Ok(Configuration { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn q(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Subspace dimension n!/Π counts_l!.
    pub fn dimension(&self) -> u128 {
        let mut rem = self.n();
        let mut dim: u128 = 1;
        for &c in &self.counts {
            dim *= binomial_u128(rem, c);
            rem -= c;
        }
        dim
    }

    /// All states of the configuration as letter strings, lexicographically
    /// ascending; index 0 is the sorted string.
    pub fn states(&self) -> Vec<Vec<u8>> {
        multiset_states(&self.counts)
    }
}

/// One labeled basis vector, supported on a single configuration.
#[derive(Clone, Debug)]
pub struct SchurVector {
    /// Partition of n, no trailing zeros.
    pub nu: Vec<u32>,
    /// Weyl tableau rows (letter indices; rows nondecrease, columns increase).
    pub weyl: Vec<Vec<u8>>,
    /// Young tableau rows (numbers 1..=n; rows and columns increase).
    pub tableau: Vec<Vec<u32>>,
    /// Flattened Gel'fand symbol of `weyl`: for each letter cut q, q-1, …, 1
    /// the row lengths of the tableau restricted to the first `cut` letters,
    /// padded to `cut` entries.
    pub gelfand: Vec<u32>,
    /// Nonzero amplitudes as (state string, coefficient), states ascending.
    pub coeffs: Vec<(Vec<u8>, f64)>,
}

/// Complete orthonormal Schur basis of (C^q)^⊗n, sorted by
/// (ν, Gel'fand symbol, tableau eigenvalue list), each descending.
#[derive(Clone, Debug)]
pub struct SchurBasis {
    pub n: u32,
    pub q: u32,
    pub vectors: Vec<SchurVector>,
}

/// One diagonal block of a projected tensor power: ρ^⊗n restricted to the
/// vectors of one ν at a fixed Young tableau, repeated `multiplicity` times
/// in the full spectrum.
#[derive(Clone, Debug)]
pub struct ProjectedBlock {
    pub nu: Vec<u32>,
    pub block: HermitianMatrix,
    pub multiplicity: u64,
}

/// Matrix of the 2- or 3-cycle class sum of S_k (first k tensor factors) on
/// the configuration subspace.
///
/// `n < 15` bounds the range where the joint (2,3)-cycle spectra stay
/// injective on partitions; beyond it the labeling scheme breaks down.
pub fn class_operator(
    n: u32,
    cycle_len: u32,
    subgroup_size: u32,
    config: &Configuration,
) -> Result<HermitianMatrix> {
    check_operator_args(n, cycle_len, config)?;
    if subgroup_size < 1 || subgroup_size > n {
        return Err(Error::Domain(format!(
            "subgroup size {subgroup_size} outside 1..={n}"
        )));
    }
    let states = config.states();
    let index = state_index(&states);
    let m = ordinary_matrix(&states, &index, subgroup_size as usize, cycle_len);
    HermitianMatrix::from_real(states.len(), &m)
}

/// Matrix of the right-action (intrinsic) 2- or 3-cycle class sum at one
/// level of the configuration's intrinsic subgroup chain.
///
/// The chain runs over the partial sums n(1) < n(2) < … of the nonzero
/// letter counts; only at those sizes does the right action descend to the
/// configuration subspace. `subgroup_chain_index` is 1-based into that list.
pub fn intrinsic_class_operator(
    n: u32,
    cycle_len: u32,
    subgroup_chain_index: u32,
    config: &Configuration,
) -> Result<HermitianMatrix> {
    check_operator_args(n, cycle_len, config)?;
    let sums = nonzero_partial_sums(config.counts());
    if subgroup_chain_index < 1 || subgroup_chain_index as usize > sums.len() {
        return Err(Error::Domain(format!(
            "chain index {subgroup_chain_index} not in 1..={} for this configuration",
            sums.len()
        )));
    }
    let level = sums[subgroup_chain_index as usize - 1];
    let states = config.states();
    let index = state_index(&states);
    let m = intrinsic_matrix(&states, &index, level as usize, cycle_len);
    HermitianMatrix::from_real(states.len(), &m)
}

/// Schur basis with the default work budget of 4096 states.
pub fn schur_basis(n: u32, q: u32) -> Result<SchurBasis> {
    schur_basis_with_budget(n, q, 4096)
}

/// Schur basis of (C^q)^⊗n; fails with a budget error when qⁿ exceeds
/// `budget` and an unsupported-range error when n ≥ 15 or q > 255.
pub fn schur_basis_with_budget(n: u32, q: u32, budget: u128) -> Result<SchurBasis> {
    if n == 0 || q == 0 {
        return Err(Error::Domain(format!("need n ≥ 1 and q ≥ 1, got n={n}, q={q}")));
    }
    if n >= 15 {
        return Err(Error::Unsupported(format!(
            "n = {n} is outside the validity range of the 2,3-cycle labeling (n < 15)"
        )));
    }
    if q > 255 {
        return Err(Error::Unsupported(format!("local dimension {q} exceeds 255")));
    }
    let needed = (q as u128).checked_pow(n).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }

    let mut configs: Vec<Vec<u32>> = Vec::new();
    for_each_composition(n, q as usize, &mut |c: &[u32]| configs.push(c.to_vec()));

    let build = |counts: &Vec<u32>| build_config(n, q, counts);
    #[cfg(feature = "parallel")]
    let per_config: Vec<Vec<(Vec<i64>, SchurVector)>> = {
        use rayon::prelude::*;
        configs.par_iter().map(build).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_config: Vec<Vec<(Vec<i64>, SchurVector)>> =
        configs.iter().map(build).collect::<Result<_>>()?;

    let mut keyed: Vec<(Vec<i64>, SchurVector)> = per_config.into_iter().flatten().collect();
    if keyed.len() as u128 != needed {
        return Err(Error::Labeling(format!(
            "basis incomplete: {} vectors for dimension {needed}",
            keyed.len()
        )));
    }
    keyed.sort_by(|a, b| b.0.cmp(&a.0));
    let vectors = keyed.into_iter().map(|(_, v)| v).collect();
    Ok(SchurBasis { n, q, vectors })
}

/// Diagonal blocks of ρ^⊗n in the Schur basis, one per ν in basis order.
///
/// Eigenvalues of ρ^⊗n = union over blocks of the block spectra, each
/// repeated `multiplicity` times.
pub fn block_project(basis: &SchurBasis, rho: &HermitianMatrix) -> Result<Vec<ProjectedBlock>> {
    project_terms(basis, &[(1.0, rho)])
}

/// Entropy S(Σ_t w_t ρ_t^⊗n) in bits, evaluated block by block.
///
/// The mixture must be a valid subnormalized state: eigenvalues below the
/// clamp band are a hard error.
pub fn mixed_power_entropy(basis: &SchurBasis, terms: &[(f64, &HermitianMatrix)]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::Domain("mixture needs at least one term".into()));
    }
    let blocks = project_terms(basis, terms)?;
    let mut acc = KahanSum::new();
    for b in blocks {
        let spectrum = eigenvalues_hermitian(&b.block)?;
        let s = entropy_of_spectrum(spectrum.values())?;
        acc.add(b.multiplicity as f64 * s);
    }
    Ok(acc.value())
}

fn check_operator_args(n: u32, cycle_len: u32, config: &Configuration) -> Result<()> {
    if n >= 15 {
        return Err(Error::Unsupported(format!(
            "n = {n} is outside the validity range of the 2,3-cycle labeling (n < 15)"
        )));
    }
    if config.n() != n {
        return Err(Error::Domain(format!(
            "configuration totals {} letters, expected {n}",
            config.n()
        )));
    }
    if cycle_len != 2 && cycle_len != 3 {
        return Err(Error::Domain(format!("cycle length {cycle_len} not in {{2, 3}}")));
    }
    Ok(())
}

/// Partial sums of the nonzero letter counts, in letter order.
fn nonzero_partial_sums(counts: &[u32]) -> Vec<u32> {
    let mut sums = Vec::new();
    let mut acc = 0u32;
    for &c in counts {
        if c > 0 {
            acc += c;
            sums.push(acc);
        }
    }
    sums
}

fn multiset_states(counts: &[u32]) -> Vec<Vec<u8>> {
    fn rec(rem: &mut [u32], cur: &mut Vec<u8>, n: usize, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..rem.len() {
            if rem[l] > 0 {
                rem[l] -= 1;
                cur.push(l as u8);
                rec(rem, cur, n, out);
                cur.pop();
                rem[l] += 1;
            }
        }
    }
    let n: u32 = counts.iter().sum();
    let mut rem = counts.to_vec();
    let mut cur = Vec::with_capacity(n as usize);
    let mut out = Vec::new();
    rec(&mut rem, &mut cur, n as usize, &mut out);
    out
}

fn state_index(states: &[Vec<u8>]) -> BTreeMap<Vec<u8>, usize> {
    states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}

/// Class sum of 2- or 3-cycles of S_k (first k positions) as a permutation
/// matrix sum; classes are inverse-closed so the result is symmetric.
fn ordinary_matrix(
    states: &[Vec<u8>],
    index: &BTreeMap<Vec<u8>, usize>,
    k: usize,
    cycle_len: u32,
) -> Vec<f64> {
    let d = states.len();
    let mut m = vec![0.0; d * d];
    let mut t = Vec::new();
    for (a, s) in states.iter().enumerate() {
        if cycle_len == 2 {
            for i in 0..k {
                for j in i + 1..k {
                    t.clone_from(s);
                    t.swap(i, j);
                    m[index[&t] * d + a] += 1.0;
                }
            }
        } else {
            for i in 0..k {
                for j in i + 1..k {
                    for l in j + 1..k {
                        t.clone_from(s);
                        t[j] = s[i];
                        t[l] = s[j];
                        t[i] = s[l];
                        m[index[&t] * d + a] += 1.0;
                        t.clone_from(s);
                        t[l] = s[i];
                        t[i] = s[j];
                        t[j] = s[l];
                        m[index[&t] * d + a] += 1.0;
                    }
                }
            }
        }
    }
    m
}

/// Right-action class sum at a chain level: state a maps through its coset
/// representative p_a (sorted string → a, letter blocks in order), composed
/// with each cycle of S_level, applied back to the sorted string.
fn intrinsic_matrix(
    states: &[Vec<u8>],
    index: &BTreeMap<Vec<u8>, usize>,
    level: usize,
    cycle_len: u32,
) -> Vec<f64> {
    let d = states.len();
    let n = states[0].len();
    let q = states[0].iter().copied().max().unwrap() as usize + 1;
    let s0 = &states[0];
    let mut m = vec![0.0; d * d];

    let apply = |p: &[usize], a: usize, m: &mut Vec<f64>| {
        let mut t = vec![0u8; n];
        for (x, &px) in p.iter().enumerate() {
            t[px] = s0[x];
        }
        m[index[&t] * d + a] += 1.0;
    };

    for (a, s) in states.iter().enumerate() {
        // p_a sends the r-th occurrence of each letter in s0 to its r-th
        // occurrence in s; s0 is sorted so its letter blocks are contiguous.
        let mut positions: Vec<Vec<usize>> = vec![Vec::new(); q];
        for (x, &l) in s.iter().enumerate() {
            positions[l as usize].push(x);
        }
        let mut pa = vec![0usize; n];
        let mut x = 0;
        for pos in &positions {
            for &y in pos {
                pa[x] = y;
                x += 1;
            }
        }

        let mut u = vec![0usize; n];
        if cycle_len == 2 {
            for i in 0..level {
                for j in i + 1..level {
                    u.clone_from(&pa);
                    u.swap(i, j);
                    apply(&u, a, &mut m);
                }
            }
        } else {
            for i in 0..level {
                for j in i + 1..level {
                    for l in j + 1..level {
                        u.clone_from(&pa);
                        u[i] = pa[j];
                        u[j] = pa[l];
                        u[l] = pa[i];
                        apply(&u, a, &mut m);
                        u.clone_from(&pa);
                        u[i] = pa[l];
                        u[l] = pa[j];
                        u[j] = pa[i];
                        apply(&u, a, &mut m);
                    }
                }
            }
        }
    }
    m
}

/// Sum of box contents (column − row) of a shape: the 2-cycle class
/// eigenvalue on the irrep of that shape.
fn shape_c2(parts: &[u32]) -> i64 {
    let mut v = 0i64;
    for (i, &p) in parts.iter().enumerate() {
        let p = p as i64;
        v += p * (p - 1) / 2 - i as i64 * p;
    }
    v
}

/// Sum of squared contents minus C(m, 2): the 3-cycle class eigenvalue,
/// zero on shapes with fewer than three boxes (empty class).
fn shape_c3(parts: &[u32]) -> i64 {
    let mut boxes = 0i64;
    let mut sq = 0i64;
    for (i, &p) in parts.iter().enumerate() {
        boxes += p as i64;
        for c in 0..p as i64 {
            let content = c - i as i64;
            sq += content * content;
        }
    }
    sq - boxes * (boxes - 1) / 2
}

fn y_prefix_shape(tableau: &[Vec<u32>], k: u32) -> Vec<u32> {
    tableau
        .iter()
        .map(|row| row.iter().filter(|&&x| x <= k).count() as u32)
        .collect()
}

fn w_prefix_shape(weyl: &[Vec<u8>], cut: u8) -> Vec<u32> {
    weyl.iter()
        .map(|row| row.iter().filter(|&&x| x < cut).count() as u32)
        .collect()
}

/// Descending chain of 2-cycle eigenvalues (k = n, n−1, …, 2) read off a
/// Young tableau; the sort key that orders same-shape tableaux.
fn y_eigenlist(tableau: &[Vec<u32>], n: u32) -> Vec<i64> {
    (2..=n).rev().map(|k| shape_c2(&y_prefix_shape(tableau, k))).collect()
}

fn gelfand_symbol(weyl: &[Vec<u8>], q: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity((q * (q + 1) / 2) as usize);
    for keep in (1..=q).rev() {
        for r in 0..keep as usize {
            let len = weyl
                .get(r)
                .map_or(0, |row| row.iter().filter(|&&x| (x as u32) < keep).count() as u32);
            out.push(len);
        }
    }
    out
}

/// State whose position i carries the Weyl letter in the box the Young
/// tableau numbers i: the principal state, whose coefficient is pinned > 0.
fn principal_state(n: u32, weyl: &[Vec<u8>], tableau: &[Vec<u32>]) -> Vec<u8> {
    let mut p = vec![0u8; n as usize];
    for (r, row) in tableau.iter().enumerate() {
        for (c, &num) in row.iter().enumerate() {
            p[(num - 1) as usize] = weyl[r][c];
        }
    }
    p
}

fn partitions_max_rows(n: u32, max_rows: u32) -> Vec<Vec<u32>> {
    fn rec(rem: u32, max_part: u32, rows_left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        if rows_left == 0 {
            return;
        }
        let hi = max_part.min(rem);
        for part in (1..=hi).rev() {
            if (part as u64) * (rows_left as u64) < rem as u64 {
                break;
            }
            cur.push(part);
            rec(rem - part, part, rows_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut cur = Vec::new();
    let mut out = Vec::new();
    rec(n, n, max_rows, &mut cur, &mut out);
    out
}

fn standard_tableaux(shape: &[u32]) -> Vec<Vec<Vec<u32>>> {
    fn rec(
        t: u32,
        n: u32,
        shape: &[u32],
        fill: &mut [u32],
        tab: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        if t > n {
            out.push(tab.clone());
            return;
        }
        for r in 0..shape.len() {
            if fill[r] < shape[r] && (r == 0 || fill[r - 1] > fill[r]) {
                fill[r] += 1;
                tab[r].push(t);
                rec(t + 1, n, shape, fill, tab, out);
                tab[r].pop();
                fill[r] -= 1;
            }
        }
    }
    let n: u32 = shape.iter().sum();
    let mut fill = vec![0u32; shape.len()];
    let mut tab = vec![Vec::new(); shape.len()];
    let mut out = Vec::new();
    rec(1, n, shape, &mut fill, &mut tab, &mut out);
    out
}

/// Weyl tableaux of a shape with prescribed letter content, built letter by
/// letter as horizontal strips.
fn semistandard_tableaux(shape: &[u32], counts: &[u32]) -> Vec<Vec<Vec<u8>>> {
    struct Ctx<'a> {
        shape: &'a [u32],
        counts: &'a [u32],
        cur: Vec<u32>,
        tab: Vec<Vec<u8>>,
        out: Vec<Vec<Vec<u8>>>,
    }
    fn letter(ctx: &mut Ctx, l: usize) {
        if l == ctx.counts.len() {
            if ctx.cur == ctx.shape {
                ctx.out.push(ctx.tab.clone());
            }
            return;
        }
        strip(ctx, l, 0, ctx.counts[l], u32::MAX);
    }
    // `above` is the length of the previous row before this letter's strip,
    // the ceiling that keeps the new cells a horizontal strip.
    fn strip(ctx: &mut Ctx, l: usize, row: usize, remaining: u32, above: u32) {
        if row == ctx.shape.len() {
            if remaining == 0 {
                letter(ctx, l + 1);
            }
            return;
        }
        let old = ctx.cur[row];
        let cap = (ctx.shape[row] - old).min(remaining).min(above.saturating_sub(old));
        for add in 0..=cap {
            ctx.cur[row] = old + add;
            for _ in 0..add {
                ctx.tab[row].push(l as u8);
            }
            strip(ctx, l, row + 1, remaining - add, old);
            for _ in 0..add {
                ctx.tab[row].pop();
            }
            ctx.cur[row] = old;
        }
    }
    let mut ctx = Ctx {
        shape,
        counts,
        cur: vec![0; shape.len()],
        tab: vec![Vec::new(); shape.len()],
        out: Vec::new(),
    };
    letter(&mut ctx, 0);
    ctx.out
}

#[derive(Clone, Copy)]
enum OpKind {
    /// 2-cycle class of S_k; eigenvalue = content sum of the tableau prefix.
    Ordinary { k: u32 },
    /// Intrinsic class at a chain level; eigenvalue read off the Weyl
    /// tableau restricted to letters below `letter_cut`.
    Intrinsic { letter_cut: u8, cycle: u32 },
}

struct OpSpec {
    kind: OpKind,
    class_size: u128,
    matrix: Vec<f64>,
}

/// Operators that jointly separate every (ν, Weyl, Young) label on one
/// configuration: the ordinary 2-cycle chain plus intrinsic (2, 3)-cycle
/// pairs at the interior levels of the letter-block chain. The endpoints
/// are redundant: the first level is a single row and the last is ν itself.
fn build_ops(
    n: u32,
    counts: &[u32],
    states: &[Vec<u8>],
    index: &BTreeMap<Vec<u8>, usize>,
) -> Vec<OpSpec> {
    let mut ops = Vec::new();
    for k in (2..=n).rev() {
        ops.push(OpSpec {
            kind: OpKind::Ordinary { k },
            class_size: binomial_u128(k, 2),
            matrix: ordinary_matrix(states, index, k as usize, 2),
        });
    }
    let nonzero: Vec<(usize, u32)> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(l, &c)| (l, c))
        .collect();
    let l = nonzero.len();
    if l >= 3 {
        let mut acc = 0u32;
        let sums: Vec<u32> = nonzero
            .iter()
            .map(|&(_, c)| {
                acc += c;
                acc
            })
            .collect();
        for j in (2..l).rev() {
            let level = sums[j - 1];
            let cut = nonzero[j - 1].0 as u8 + 1;
            ops.push(OpSpec {
                kind: OpKind::Intrinsic { letter_cut: cut, cycle: 2 },
                class_size: binomial_u128(level, 2),
                matrix: intrinsic_matrix(states, index, level as usize, 2),
            });
            if level >= 3 {
                ops.push(OpSpec {
                    kind: OpKind::Intrinsic { letter_cut: cut, cycle: 3 },
                    class_size: 2 * binomial_u128(level, 3),
                    matrix: intrinsic_matrix(states, index, level as usize, 3),
                });
            }
        }
    }
    ops
}

fn predicted_tuple(ops: &[OpSpec], weyl: &[Vec<u8>], tableau: &[Vec<u32>]) -> Vec<i64> {
    ops.iter()
        .map(|op| match op.kind {
            OpKind::Ordinary { k } => shape_c2(&y_prefix_shape(tableau, k)),
            OpKind::Intrinsic { letter_cut, cycle } => {
                let shape = w_prefix_shape(weyl, letter_cut);
                if cycle == 2 {
                    shape_c2(&shape)
                } else {
                    shape_c3(&shape)
                }
            }
        })
        .collect()
}

struct Labeled {
    shape: Vec<u32>,
    weyl: Vec<Vec<u8>>,
    tableau: Vec<Vec<u32>>,
}

fn build_predictions(
    n: u32,
    q: u32,
    counts: &[u32],
    ops: &[OpSpec],
) -> Result<BTreeMap<Vec<i64>, Labeled>> {
    let mut map = BTreeMap::new();
    for shape in partitions_max_rows(n, q) {
        let weyls = semistandard_tableaux(&shape, counts);
        if weyls.is_empty() {
            continue;
        }
        let youngs = standard_tableaux(&shape);
        for weyl in &weyls {
            for tableau in &youngs {
                let tuple = predicted_tuple(ops, weyl, tableau);
                let prev = map.insert(
                    tuple,
                    Labeled {
                        shape: shape.clone(),
                        weyl: weyl.clone(),
                        tableau: tableau.clone(),
                    },
                );
                if prev.is_some() {
                    return Err(Error::Labeling(format!(
                        "two labels share one predicted eigenvalue tuple on configuration {counts:?}"
                    )));
                }
            }
        }
    }
    Ok(map)
}

/// Mixed-radix weights: op i gets an integer weight exceeding the largest
/// possible contribution of all later ops, so distinct integer tuples keep
/// a combination gap of at least one before rescaling. Returns the weights
/// scaled by the total magnitude, or nothing when that would erase the gap.
fn guaranteed_weights(ranges: &[u128]) -> Option<Vec<f64>> {
    let mut order: Vec<usize> = (0..ranges.len()).collect();
    order.sort_by_key(|&i| ranges[i]);
    let mut w = vec![0u128; ranges.len()];
    let mut tail = 0u128;
    for &i in order.iter().rev() {
        let wi = tail + 1;
        if wi > GUARANTEED_WEIGHT_LIMIT {
            return None;
        }
        w[i] = wi;
        tail += wi * 2 * ranges[i];
    }
    let total: u128 = w.iter().zip(ranges).map(|(&wi, &r)| wi * r).sum();
    if total > GUARANTEED_WEIGHT_LIMIT {
        return None;
    }
    let scale = 1.0 / (total.max(1) as f64);
    Some(w.iter().map(|&wi| wi as f64 * scale).collect())
}

/// Irrational-ratio fallback: geometric weights in the given base, largest
/// eigenvalue range first so later terms decay against earlier gaps.
fn ladder_weights(ranges: &[u128], base: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..ranges.len()).collect();
    order.sort_by_key(|&i| core::cmp::Reverse(ranges[i]));
    let mut w = vec![0.0; ranges.len()];
    for (pos, &i) in order.iter().enumerate() {
        w[i] = fp::powf(base, -((pos + 1) as f64));
    }
    w
}

/// Diagonalize a generic combination of the ops and recover each vector's
/// integer eigenvalue tuple by Rayleigh quotients.
fn simultaneous_tuples(d: usize, ops: &[OpSpec]) -> Result<Vec<(Vec<i64>, Vec<f64>)>> {
    let ranges: Vec<u128> = ops.iter().map(|o| o.class_size).collect();
    let mut attempts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = guaranteed_weights(&ranges) {
        attempts.push(w);
    }
    for &base in &LADDER_BASES {
        attempts.push(ladder_weights(&ranges, base));
    }

    'attempt: for weights in &attempts {
        let mut x = vec![0.0; d * d];
        for (op, &w) in ops.iter().zip(weights) {
            for (xe, &me) in x.iter_mut().zip(&op.matrix) {
                *xe += w * me;
            }
        }
        let (_, vecs) = symmetric_eigen(d, &x)?;
        let mut result = Vec::with_capacity(d);
        for col in 0..d {
            let v: Vec<f64> = (0..d).map(|r| vecs[r * d + col]).collect();
            let mut tuple = Vec::with_capacity(ops.len());
            for op in ops {
                let mut rq = KahanSum::new();
                for r in 0..d {
                    let mut row = 0.0;
                    for (x, vc) in op.matrix[r * d..(r + 1) * d].iter().zip(&v) {
                        row += x * vc;
                    }
                    rq.add(v[r] * row);
                }
                let rq = rq.value();
                let snapped = fp::round(rq);
                if fp::abs(rq - snapped) > SNAP_TOL {
                    continue 'attempt;
                }
                tuple.push(snapped as i64);
            }
            result.push((tuple, v));
        }
        return Ok(result);
    }
    Err(Error::Labeling(format!(
        "no weight combination separated the joint spectrum (dimension {d})"
    )))
}

/// Build and label every basis vector of one configuration, returned with
/// the (ν, Gel'fand, tableau-chain) sort key.
fn build_config(n: u32, q: u32, counts: &[u32]) -> Result<Vec<(Vec<i64>, SchurVector)>> {
    let states = multiset_states(counts);
    let d = states.len();
    let index = state_index(&states);
    let ops = build_ops(n, counts, &states, &index);
    let mut predictions = build_predictions(n, q, counts, &ops)?;
    if predictions.len() != d {
        return Err(Error::Labeling(format!(
            "{} predicted labels for a {d}-dimensional configuration {counts:?}",
            predictions.len()
        )));
    }

    let resolved = simultaneous_tuples(d, &ops)?;
    let mut out = Vec::with_capacity(d);
    for (tuple, mut v) in resolved {
        let labeled = predictions.remove(&tuple).ok_or_else(|| {
            Error::Labeling(format!(
                "eigenvalue tuple {tuple:?} matches no label on configuration {counts:?}"
            ))
        })?;
        let principal = principal_state(n, &labeled.weyl, &labeled.tableau);
        let pc = v[index[&principal]];
        if fp::abs(pc) < PRINCIPAL_MIN {
            return Err(Error::Labeling(format!(
                "principal coefficient {pc:e} too small to fix the sign"
            )));
        }
        if pc < 0.0 {
            for c in v.iter_mut() {
                *c = -*c;
            }
        }
        let coeffs: Vec<(Vec<u8>, f64)> = states
            .iter()
            .zip(&v)
            .filter(|&(_, &c)| fp::abs(c) > COEFF_DROP)
            .map(|(s, &c)| (s.clone(), c))
            .collect();
        let gelfand = gelfand_symbol(&labeled.weyl, q);
        let mut key: Vec<i64> = Vec::with_capacity((q + q * (q + 1) / 2 + n) as usize);
        for r in 0..q as usize {
            key.push(labeled.shape.get(r).copied().unwrap_or(0) as i64);
        }
        key.extend(gelfand.iter().map(|&g| g as i64));
        key.extend(y_eigenlist(&labeled.tableau, n));
        out.push((
            key,
            SchurVector {
                nu: labeled.shape,
                weyl: labeled.weyl,
                tableau: labeled.tableau,
                gelfand,
                coeffs,
            },
        ));
    }
    Ok(out)
}

/// Contiguous ranges of equal ν in the sorted vector list.
fn nu_group_ranges(basis: &SchurBasis) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..=basis.vectors.len() {
        if i == basis.vectors.len() || basis.vectors[i].nu != basis.vectors[start].nu {
            ranges.push((start, i));
            start = i;
        }
    }
    ranges
}

fn project_terms(
    basis: &SchurBasis,
    terms: &[(f64, &HermitianMatrix)],
) -> Result<Vec<ProjectedBlock>> {
    for &(_, rho) in terms {
        if rho.dim() != basis.q as usize {
            return Err(Error::Shape(format!(
                "state dimension {} does not match local dimension {}",
                rho.dim(),
                basis.q
            )));
        }
    }
    let ranges = nu_group_ranges(basis);
    let project = |&(start, end): &(usize, usize)| project_group(basis, start, end, terms);
    #[cfg(feature = "parallel")]
    let blocks: Vec<ProjectedBlock> = {
        use rayon::prelude::*;
        ranges.par_iter().map(project).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<ProjectedBlock> = ranges.iter().map(project).collect::<Result<_>>()?;
    Ok(blocks)
}

/// One ν block of Σ_t w_t ρ_t^⊗n: matrix elements between the vectors that
/// share the group's first Young tableau, one per Weyl label.
fn project_group(
    basis: &SchurBasis,
    start: usize,
    end: usize,
    terms: &[(f64, &HermitianMatrix)],
) -> Result<ProjectedBlock> {
    let n = basis.n;
    let y0 = y_eigenlist(&basis.vectors[start].tableau, n);
    let kappa: Vec<&SchurVector> = basis.vectors[start..end]
        .iter()
        .filter(|v| y_eigenlist(&v.tableau, n) == y0)
        .collect();
    let dim = kappa.len();
    if dim == 0 || !(end - start).is_multiple_of(dim) {
        return Err(Error::Labeling(format!(
            "tableau multiplet sizes inconsistent in block ν = {:?}",
            basis.vectors[start].nu
        )));
    }
    let multiplicity = ((end - start) / dim) as u64;

    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (i, vi) in kappa.iter().enumerate() {
        for (j, vj) in kappa.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, a) in &vi.coeffs {
                for (t, b) in &vj.coeffs {
                    let mut mixed = Complex64::new(0.0, 0.0);
                    for &(w, rho) in terms {
                        let mut prod = Complex64::new(w, 0.0);
                        for (&sx, &tx) in s.iter().zip(t) {
                            prod *= rho.entry(sx as usize, tx as usize);
                        }
                        mixed += prod;
                    }
                    acc += a * b * mixed;
                }
            }
            data[i * dim + j] = acc;
        }
    }

    let mut maxabs = 1.0f64;
    for e in &data {
        maxabs = maxabs.max(fp::abs(e.re)).max(fp::abs(e.im));
    }
    let mut sym = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let e = data[i * dim + j];
            let f = data[j * dim + i].conj();
            if fp::hypot(e.re - f.re, e.im - f.im) > BLOCK_HERM_TOL * maxabs {
                return Err(Error::Shape(format!(
                    "projected block ν = {:?} lost Hermiticity",
                    basis.vectors[start].nu
                )));
            }
            sym[i * dim + j] = 0.5 * (e + f);
        }
    }
    Ok(ProjectedBlock {
        nu: basis.vectors[start].nu.clone(),
        block: HermitianMatrix::new(dim, sym)?,
        multiplicity,
    })
}
