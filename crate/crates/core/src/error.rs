use thiserror::Error;

/// Errors raised by the geometry, theory and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GilbertError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("integral diverges: exponent {alpha} must exceed {min}")]
    NonIntegrable { alpha: f64, min: f64 },

    #[error("covariance is infinite for alpha = {alpha}, beta = {beta} in dimension {dim}")]
    DivergentCovariance { alpha: f64, beta: f64, dim: usize },

    #[error("variance lower bound {0} is not positive (delta too large for the window)")]
    DegenerateVariance(f64),

    #[error("degenerate deviation input: {0}")]
    DegenerateInput(String),

    #[error("need at least 2 replications, got {0}")]
    TooFewReplications(usize),

    #[error("quadrature did not converge: estimate {estimate:e} with error {error:e} after {evals} evaluations")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        evals: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GilbertError {
    fn from(e: std::io::Error) -> Self {
        GilbertError::Io(e.to_string())
    }
}

pub type Result<T, E = GilbertError> = std::result::Result<T, E>;
