use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `h_w(x) = w(x)/(1−x)` has no finite value or limit at `x`.
    #[error("h_w is singular at x = {x}: {detail}")]
    Singularity { x: f64, detail: String },

    /// A regularity condition required by the operation does not hold.
    #[error("{condition} does not hold: {detail}")]
    Condition {
        condition: &'static str,
        detail: String,
    },

    /// The exponential tilt makes some spacing rate non-positive.
    #[error("tilt θ = {theta} violates θ·h_w(k/n) < λ at spacing index k = {k} (rate {rate})")]
    TiltDomain { k: usize, theta: f64, rate: f64 },

    #[error("h_w is not positive at x = {x} (value {value}); the relative-entropy bound needs h_w > 0")]
    Positivity { x: f64, value: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
