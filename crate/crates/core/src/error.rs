use thiserror::Error;

use crate::quantale::{QuantaleId, QuantaleValue};

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value:?} is not an element of the {quantale} quantale")]
    NotInCarrier {
        quantale: QuantaleId,
        value: QuantaleValue,
    },

    #[error("operation requires quantale {expected}, got {found}")]
    QuantaleMismatch {
        expected: QuantaleId,
        found: QuantaleId,
    },

    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    #[error("functor mismatch: {0}")]
    FunctorMismatch(String),

    #[error("distribution is not normalized (total mass {0})")]
    NotNormalized(f64),

    #[error("enumeration cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
