use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model or integrator configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation received an argument outside its domain.
    #[error("input outside domain: {0}")]
    InputDomain(String),

    /// The integrator produced a non-finite state.
    #[error("integration failed at t = {time}: state is not finite")]
    IntegrationFailure { time: f64 },

    /// Certificates require strictly positive extrema (`0 < m`); translate
    /// the trajectory to positive coordinates first.
    #[error("certificate requires 0 < m, got m = {m}; apply translate_positive first")]
    NonPositiveExtrema { m: f64 },

    /// No lower weight bound is available for the normalized-with-self
    /// scheme, so no certificate can be issued for it.
    #[error("certificates are not supported for the normalized-with-self scheme")]
    UnsupportedCertificate,

    /// A query or window lies outside the recorded time range.
    #[error("time range [{lo}, {hi}] not covered by the record [{rec_lo}, {rec_hi}]")]
    OutOfRange {
        lo: f64,
        hi: f64,
        rec_lo: f64,
        rec_hi: f64,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sample sets must have equal size: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
}
