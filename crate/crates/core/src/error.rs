use num_traits::ToPrimitive;
use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The arrival rate reaches or exceeds the service rate, so the queue
    /// has no steady state.
    #[error("UnstableSystem: arrival rate {lambda} >= service rate {mu}")]
    UnstableSystem { lambda: f64, mu: f64 },

    /// An input lies outside the domain of the requested curve or region.
    #[error("OutOfDomain: {name} = {value} is outside {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A configuration or argument value is invalid on its own.
    #[error("InvalidParameter: {name} = {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A load trace file or literal failed validation.
    #[error("MalformedTrace: {0}")]
    MalformedTrace(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Lossy cast used only for error reporting on generic scalars.
pub(crate) fn lossy<F: ToPrimitive>(value: F) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
