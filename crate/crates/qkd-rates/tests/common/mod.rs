//! Brute-force references shared by the integration test targets.
//!
//! Everything here diagonalizes explicitly constructed matrices with
//! nalgebra, independently of the crate's own eigensolvers and class
//! sums, so agreement is a genuine cross-check rather than a tautology.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qkd_rates::PauliDist;

/// -sum x log2 x over the strictly positive entries.
pub fn ent_bits<I: IntoIterator<Item = f64>>(vals: I) -> f64 {
    vals.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum()
}

/// Net flip probability of two independent flips.
pub fn compose_flip(a: f64, b: f64) -> f64 {
    a + b - 2.0 * a * b
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Key-bit qubit after a flip channel: diag (1-p, p) with coherence
/// damped by 1-2q.
pub fn rho_qubit(p: f64, q: f64) -> DMatrix<f64> {
    let c = (1.0 - 2.0 * q) * (p * (1.0 - p)).sqrt();
    DMatrix::from_row_slice(2, 2, &[1.0 - p, c, c, p])
}

/// Conjugation by Z on every qubit: entry (i, j) picks up
/// (-1)^(popcount i + popcount j).
pub fn z_conjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    DMatrix::from_fn(d, d, |i, j| {
        if ((i as u32).count_ones() + (j as u32).count_ones()).is_multiple_of(2) {
            m[(i, j)]
        } else {
            -m[(i, j)]
        }
    })
}

pub fn kron_pow(a: &DMatrix<f64>, n: u32) -> DMatrix<f64> {
    let mut acc = a.clone();
    for _ in 1..n {
        acc = acc.kronecker(a);
    }
    acc
}

/// S(alpha rho^(x)n + beta (ZrhoZ)^(x)n) in bits by direct 2^n x 2^n
/// diagonalization.
pub fn dense_mix_entropy(n: u32, alpha: f64, beta: f64, p_eff: f64, q: f64) -> f64 {
    let r = rho_qubit(p_eff, q);
    let rz = z_conjugate(&r);
    let m = kron_pow(&r, n) * alpha + kron_pow(&rz, n) * beta;
    ent_bits(sym_eigenvalues(&m))
}

/// (I_XY, I_XE) for one round of flip-q plus length-m repetition
/// preprocessing against a collective attack with Pauli error
/// distribution `dist`, computed from Eve's explicit conditional states.
///
/// A Pauli string e = (x vec, z vec) is indexed as ez * 2^m + ex with the
/// low bit of each word acting on the first position. Eve purifies the
/// noise, so conditioned on Alice measuring the raw string a and the
/// protocol announcing the repetition syndrome of a xor f (f the flip
/// pattern), Eve holds a rank-one state whose Gram matrix over strings
/// sharing the x word is sqrt(P(e) P(e')) (-1)^((z xor z') . a).
/// Accumulating those branches by announced (key bit, syndrome) and
/// diagonalizing gives I_XE exactly; the key-versus-decode table gives
/// I_XY.
pub fn dense_rate_components(dist: &PauliDist, m: u32, q: f64) -> (f64, f64) {
    let arr = dist.as_array();
    let mm = m as usize;
    let n = 1usize << mm;
    let e_dim = n * n;
    let site = |x: usize, z: usize| -> f64 {
        match (x, z) {
            (0, 0) => arr[0],
            (1, 0) => arr[1],
            (1, 1) => arr[2],
            _ => arr[3],
        }
    };
    let mut sqrt_pe = vec![0.0f64; e_dim];
    for ex in 0..n {
        for ez in 0..n {
            let mut p = 1.0;
            for i in 0..mm {
                p *= site(ex >> i & 1, ez >> i & 1);
            }
            sqrt_pe[ez * n + ex] = p.sqrt();
        }
    }
    let rel_syndrome = |v: usize| -> usize {
        let mut s = 0usize;
        for i in 1..mm {
            s |= ((v ^ (v >> i)) & 1) << (i - 1);
        }
        s
    };

    let pt = compose_flip(arr[1] + arr[2], q);
    let syn_count = n / 2;
    let mut joint = vec![0.0f64; 2 * syn_count];
    for d in 0..n {
        let mut prob = 1.0;
        for i in 0..mm {
            prob *= if d >> i & 1 == 1 { pt } else { 1.0 - pt };
        }
        joint[(d & 1) * syn_count + rel_syndrome(d)] += prob;
    }
    let mut syn_marg = vec![0.0f64; syn_count];
    for l in 0..2 {
        for s in 0..syn_count {
            syn_marg[s] += joint[l * syn_count + s];
        }
    }
    let i_xy = 1.0 - ent_bits(joint.iter().copied()) + ent_bits(syn_marg.iter().copied());

    let mut mats = vec![DMatrix::<f64>::zeros(e_dim, e_dim); 2 * syn_count];
    for a in 0..n {
        for f in 0..n {
            let mut w = 1.0 / n as f64;
            for i in 0..mm {
                w *= if f >> i & 1 == 1 { q } else { 1.0 - q };
            }
            if w == 0.0 {
                continue;
            }
            let announced = a ^ f;
            let mat = &mut mats[(announced & 1) * syn_count + rel_syndrome(announced)];
            for ex in 0..n {
                for ez in 0..n {
                    let row = ez * n + ex;
                    let se_row = sqrt_pe[row];
                    if se_row == 0.0 {
                        continue;
                    }
                    for ez2 in 0..n {
                        let col = ez2 * n + ex;
                        let se = se_row * sqrt_pe[col];
                        if se == 0.0 {
                            continue;
                        }
                        let signed = if (((ez ^ ez2) & a) as u32).count_ones().is_multiple_of(2) {
                            w
                        } else {
                            -w
                        };
                        mat[(row, col)] += signed * se;
                    }
                }
            }
        }
    }
    let mut avg = Vec::new();
    let mut cond0 = Vec::new();
    let mut cond1 = Vec::new();
    for s in 0..syn_count {
        let m0 = &mats[s];
        let m1 = &mats[syn_count + s];
        avg.extend(sym_eigenvalues(&(m0 + m1)));
        cond0.extend(sym_eigenvalues(&(m0 * 2.0)));
        cond1.extend(sym_eigenvalues(&(m1 * 2.0)));
    }
    let i_xe = ent_bits(avg) - 0.5 * ent_bits(cond0) - 0.5 * ent_bits(cond1);
    (i_xy, i_xe)
}

/// In-place Walsh-Hadamard transform: v[u] becomes
/// sum_a v[a] (-1)^(popcount(u & a)).
fn fwht(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (v[i], v[i + h]);
                v[i] = x + y;
                v[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

fn rel_syndrome(v: usize, m: usize) -> usize {
    let mut s = 0usize;
    for i in 1..m {
        s |= ((v ^ (v >> i)) & 1) << (i - 1);
    }
    s
}

/// I_XE of the two-round protocol (inner blocks of m1 with flip q, outer
/// block of m2 first-round key bits with flip Q) from Eve's explicit
/// conditional states.
///
/// The branch Gram matrix for raw string a has entries
/// sqrt(P(e) P(e')) (-1)^((z xor z') . a) delta_{x,x'}; summing branch
/// weights by announced (key bit, syndromes) and transforming over a
/// turns the bucket accumulation into one Walsh-Hadamard pass, after
/// which entry (e, e') of a bucket reads off the transform at z xor z'.
pub fn dense_iter_ixe(dist: &PauliDist, m1: u32, m2: u32, q: f64, big_q: f64) -> f64 {
    let (m1u, m2u) = (m1 as usize, m2 as usize);
    let sites = m1u * m2u;
    let n = 1usize << sites;
    let block_mask = (1usize << m1u) - 1;
    let syn_bits = (m1u - 1) * m2u + (m2u - 1);
    let nb = 1usize << syn_bits;

    let arr = dist.as_array();
    let site = |x: usize, z: usize| -> f64 {
        match (x, z) {
            (0, 0) => arr[0],
            (1, 0) => arr[1],
            (1, 1) => arr[2],
            _ => arr[3],
        }
    };
    let mut sqrt_pe = vec![0.0f64; n * n];
    for ex in 0..n {
        for ez in 0..n {
            let mut p = 1.0;
            for i in 0..sites {
                p *= site(ex >> i & 1, ez >> i & 1);
            }
            sqrt_pe[ez * n + ex] = p.sqrt();
        }
    }

    let mut weights = vec![vec![0.0f64; n]; 2 * nb];
    #[allow(clippy::needless_range_loop)] // a is the announced bit pattern
    for a in 0..n {
        for f in 0..n {
            let mut wf = 1.0 / n as f64;
            for i in 0..sites {
                wf *= if f >> i & 1 == 1 { q } else { 1.0 - q };
            }
            if wf == 0.0 {
                continue;
            }
            let af = a ^ f;
            let mut leaders = 0usize;
            let mut inner = 0usize;
            for j in 0..m2u {
                let blk = (af >> (j * m1u)) & block_mask;
                leaders |= (blk & 1) << j;
                inner |= rel_syndrome(blk, m1u) << (j * (m1u - 1));
            }
            for g in 0..1usize << m2u {
                let mut wg = wf;
                for j in 0..m2u {
                    wg *= if g >> j & 1 == 1 { big_q } else { 1.0 - big_q };
                }
                if wg == 0.0 {
                    continue;
                }
                let lg = leaders ^ g;
                let sigma = inner | (rel_syndrome(lg, m2u) << ((m1u - 1) * m2u));
                weights[(lg & 1) * nb + sigma][a] += wg;
            }
        }
    }
    for row in &mut weights {
        fwht(row);
    }

    let bucket_spectra = |bucket: &[f64], scale: f64| -> Vec<f64> {
        let mut mat = DMatrix::<f64>::zeros(n * n, n * n);
        for ex in 0..n {
            for ez in 0..n {
                let row = ez * n + ex;
                let se_row = sqrt_pe[row];
                if se_row == 0.0 {
                    continue;
                }
                for ez2 in 0..n {
                    let col = ez2 * n + ex;
                    let se = se_row * sqrt_pe[col];
                    if se == 0.0 {
                        continue;
                    }
                    mat[(row, col)] = scale * bucket[ez ^ ez2] * se;
                }
            }
        }
        sym_eigenvalues(&mat)
    };

    let mut avg = Vec::new();
    let mut cond0 = Vec::new();
    let mut cond1 = Vec::new();
    for s in 0..nb {
        let w0 = &weights[s];
        let w1 = &weights[nb + s];
        let any0 = w0.iter().any(|&x| x != 0.0);
        let any1 = w1.iter().any(|&x| x != 0.0);
        if any0 || any1 {
            let sum: Vec<f64> = w0.iter().zip(w1).map(|(a, b)| a + b).collect();
            avg.extend(bucket_spectra(&sum, 1.0));
        }
        if any0 {
            cond0.extend(bucket_spectra(w0, 2.0));
        }
        if any1 {
            cond1.extend(bucket_spectra(w1, 2.0));
        }
    }
    ent_bits(avg) - 0.5 * ent_bits(cond0) - 0.5 * ent_bits(cond1)
}
