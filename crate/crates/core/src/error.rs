use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("stretch must be positive and finite, got {0}")]
    InvalidStretch(f64),

    #[error("Green-Lagrange strain {0} is outside the physical domain (2E + 1 <= 0)")]
    StrainOutOfDomain(f64),

    #[error("invalid network weights: {0}")]
    InvalidWeights(String),

    /// Exponential argument of a catalog term exceeded the overflow guard.
    #[error("exponential overflow in term {term}: argument {argument:.6e} exceeds {limit}")]
    Overflow { term: usize, argument: f64, limit: f64 },

    #[error("training diverged at epoch {epoch}{}: {reason}", term.map(|t| format!(" (term {t})")).unwrap_or_default())]
    Divergence {
        epoch: usize,
        term: Option<usize>,
        reason: String,
    },

    #[error("dataset is empty")]
    EmptyData,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("protocol {label} is infeasible: {reason}")]
    InfeasibleProtocol { label: String, reason: String },

    #[error("root finding failed for protocol {label} at controlled stretch {stretch}: {reason}")]
    NoConvergence {
        label: String,
        stretch: f64,
        reason: String,
    },
}

impl Error {
    /// Term index (1-based) responsible for a numerical failure, if known.
    pub fn term(&self) -> Option<usize> {
        match self {
            Error::Overflow { term, .. } => Some(*term),
            Error::Divergence { term, .. } => *term,
            _ => None,
        }
    }
}
