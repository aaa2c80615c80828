use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular jet: divisor has zero constant term")]
    SingularJet,

    #[error("domain error: {0}")]
    Domain(String),

    /// Cholesky broke down; the point lies outside the region where the
    /// matrix is a metric.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("degenerate flag or plane (Gram determinant {gram:e})")]
    DegenerateFlag { gram: f64 },

    #[error("point outside the navigation domain (|W|^2 = {wind_norm_sq})")]
    OutsideDomain { wind_norm_sq: f64 },

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
