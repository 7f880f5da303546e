//! Secret-key rates for one-way postprocessed QKD and repetition-code lower
//! bounds on the quantum capacity of the qubit depolarizing channel.
//!
//! The crate has two halves that share their numerical core:
//!
//! * [`keyrates`] computes asymptotic secret-key rates of the BB84 and
//!   six-state protocols under local randomization (bit flips with
//!   probability `q`) followed by repetition-code blocks of length `m`,
//!   including the two-level iterated variant. Eve's information is evaluated
//!   exactly through the permutation-symmetric block decomposition of
//!   [`schur_qubit`], so blocklengths in the hundreds stay tractable.
//! * [`capacity`] computes hashing and concatenated-repetition-code lower
//!   bounds on the depolarizing channel's quantum capacity, with the class
//!   sums of [`repcodes`] doing the combinatorial work.
//!
//! [`schur_efm`] constructs full Schur bases for small qudit systems from
//! eigenfunctions of symmetric-group class operators; [`keyrates`] uses it
//! for the iterated protocol, and the CLI can emit the bases directly.
//!
//! All entropies are in bits. Conventions shared across modules: `0 log 0 = 0`,
//! spectra are reported in descending order, and eigenvalues in
//! `[-1e-9, 0)` are clamped to zero before entropies are taken while anything
//! below that band is a hard error.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod capacity;
pub mod channels;
pub mod core_math;
pub mod keyrates;
pub mod optimize;
pub mod repcodes;
pub mod schur_efm;
pub mod schur_qubit;

mod error;
pub(crate) mod fp;

pub use channels::{depolarizing, effective_dist, PauliDist, ProtocolKind};
pub use error::Error;
pub use keyrates::{PreprocParams, RateResult};

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
