use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The membership oracle disagrees with the certified radii or with itself.
    #[error("oracle integrity error: {0}")]
    OracleIntegrity(String),

    #[error("margin error: {0}")]
    Margin(String),

    /// The requested graph is infinite for the body's case tag.
    #[error("case error: {0}")]
    Case(String),

    #[error("direction error: {0}")]
    Direction(String),

    #[error("mass error: estimated gaussian mass {mass:.3e} is below {threshold:.1e}; translate the body or enlarge it")]
    Mass { mass: f64, threshold: f64 },

    #[error("unsupported subspace dimension {0} (1..=3 supported)")]
    UnsupportedOrder(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("classification error: {0}")]
    Classification(String),

    #[error("degenerate denominator {0:.3e} in gauge gradient formula")]
    Degeneracy(f64),

    #[error("invalid body specification at `{path}`: {message}")]
    Spec { path: String, message: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
