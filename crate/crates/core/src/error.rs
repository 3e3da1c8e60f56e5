use thiserror::Error;

/// Errors raised by model evaluation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for the given channel family.
    #[error("{operation} is not supported for the {model} model")]
    UnsupportedModel {
        operation: &'static str,
        model: &'static str,
    },

    /// A time-local rate diverges (the decoherence factor vanishes) at `t`.
    #[error("decay rate is singular at t = {t}")]
    SingularRate { t: f64 },

    /// The map at time `s` cannot be inverted to build an intermediate map.
    #[error("intermediate map undefined: T({s}) has condition number {condition:e}")]
    SingularIntermediate { s: f64, condition: f64 },

    /// The ODE integrator could not advance past `t`.
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// A numerical consistency check on an intermediate result failed.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
