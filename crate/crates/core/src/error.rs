use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input lies outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The energy sits on (or within 1e-12 of) the spectrum.
    #[error("resolvent blow-up: distance {distance:e} from the spectrum")]
    ResolventBlowUp { distance: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("incompatible scales L = {big}, ell = {small}; nearest compatible L is {nearest}")]
    IncompatibleScales { big: f64, small: f64, nearest: f64 },

    #[error("internal consistency violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
