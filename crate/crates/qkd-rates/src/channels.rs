//! Pauli-channel probability models: the depolarizing channel and the
//! effective single-qubit error distributions the two protocols induce after
//! parameter estimation.

use crate::core_math::PROB_NEG_TOL;
use crate::{Error, Result};
use alloc::format;

/// Which protocol's effective error model to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolKind {
    Bb84,
    SixState,
}

/// Probability distribution over the single-qubit Pauli group {I, X, Y, Z}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliDist {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl PauliDist {
    /// Validates non-negativity (up to 1e-12 roundoff, clamped) and
    /// normalization within 1e-12.
    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let mut entries = [p_i, p_x, p_y, p_z];
        for e in &mut entries {
            if *e < -PROB_NEG_TOL {
                return Err(Error::Domain(format!("Pauli probability {e:e} below -1e-12")));
            }
            if *e < 0.0 {
                *e = 0.0;
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("Pauli probabilities sum to {sum}, not 1")));
        }
        let [p_i, p_x, p_y, p_z] = entries;
        Ok(PauliDist { p_i, p_x, p_y, p_z })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_y, self.p_z]
    }

    /// Marginal probability of a bit flip (X or Y component).
    pub fn bit_error(&self) -> f64 {
        self.p_x + self.p_y
    }

    /// Marginal probability of a phase flip (Z or Y component).
    pub fn phase_error(&self) -> f64 {
        self.p_z + self.p_y
    }
}

/// Depolarizing channel with total error weight p: (1−p, p/3, p/3, p/3).
pub fn depolarizing(p: f64) -> Result<PauliDist> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("depolarizing parameter {p} outside [0, 1]")));
    }
    PauliDist::new(1.0 - p, p / 3.0, p / 3.0, p / 3.0)
}

/// Effective single-qubit Pauli distribution at observed error rate p.
///
/// BB84 leaves one parameter t (the joint bit-and-phase error weight) free in
/// `[max(0, 2p−1), p]`; `None` selects the worst case t = p², where errors
/// are independent. The six-state distribution is fully determined and t must
/// be absent.
pub fn effective_dist(kind: ProtocolKind, p: f64, t: Option<f64>) -> Result<PauliDist> {
    match kind {
        ProtocolKind::Bb84 => {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::Domain(format!("BB84 error rate {p} outside [0, 1/2]")));
            }
            let t = t.unwrap_or(p * p);
            let lo = (2.0 * p - 1.0).max(0.0);
            if !(lo - PROB_NEG_TOL..=p + PROB_NEG_TOL).contains(&t) {
                return Err(Error::Domain(format!(
                    "BB84 parameter t={t} outside feasible interval [{lo}, {p}]"
                )));
            }
            PauliDist::new(1.0 - 2.0 * p + t, p - t, t, p - t)
        }
        ProtocolKind::SixState => {
            if t.is_some() {
                return Err(Error::Domain(
                    "six-state effective distribution has no free parameter t".into(),
                ));
            }
            if !(0.0..=2.0 / 3.0).contains(&p) {
                return Err(Error::Domain(format!("six-state error rate {p} outside [0, 2/3]")));
            }
            PauliDist::new(1.0 - 1.5 * p, 0.5 * p, 0.5 * p, 0.5 * p)
        }
    }
}
