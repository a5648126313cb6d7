use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("cannot fit a logistic curve: {0}")]
    UnfittableCurve(String),

    #[error("fitted slope a = {slope} is not positive; the curve does not percolate")]
    NonPercolatingFit { slope: f64 },

    #[error("no root of the Bernoulli threshold equation in (0, {upper})")]
    NoRoot { upper: f64 },

    #[error("no device pairs farther apart than {min_dist} km (largest separation seen: {max_separation} km)")]
    InsufficientPairs { min_dist: f64, max_separation: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
