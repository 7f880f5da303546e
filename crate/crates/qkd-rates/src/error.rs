use alloc::string::String;

/// Error type shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside its documented domain.
    Domain(String),
    /// A matrix argument had the wrong shape or failed the Hermiticity check.
    Shape(String),
    /// A nominally positive semidefinite operator had an eigenvalue below the
    /// clamp band `[-1e-9, 0)`.
    NotPositive { min_eigenvalue: f64 },
    /// An enumeration would exceed its configured work budget.
    Budget { needed: u128, budget: u128 },
    /// A root bracket could not be established: the objective has the same
    /// sign at both ends.
    NoBracket { lo: f64, hi: f64 },
    /// An iteration failed to converge.
    NotConverged(String),
    /// Schur-basis label assignment failed (eigenvalue snap or ambiguity).
    Labeling(String),
    /// The request is outside the supported parameter range.
    Unsupported(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::Shape(what) => write!(f, "shape error: {what}"),
            Error::NotPositive { min_eigenvalue } => {
                write!(f, "operator not positive semidefinite: eigenvalue {min_eigenvalue:e} below -1e-9")
            }
            Error::Budget { needed, budget } => {
                write!(f, "work budget exceeded: need {needed}, budget {budget}")
            }
            Error::NoBracket { lo, hi } => {
                write!(f, "no sign change on bracket [{lo}, {hi}]")
            }
            Error::NotConverged(what) => write!(f, "iteration did not converge: {what}"),
            Error::Labeling(what) => write!(f, "basis labeling failed: {what}"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
