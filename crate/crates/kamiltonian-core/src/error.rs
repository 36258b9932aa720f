//! Error type shared by the symbolic core.

use alloc::string::String;
use core::fmt;

use crate::freq::FrequencyVector;
use crate::symbol::Sym;

/// Failure modes of the symbolic core.
#[derive(Clone, Debug, PartialEq)]
pub enum CoreError {
    /// Two operands live over different mode/frequency bases.
    BasisMismatch(String),
    /// A propagator or inverse frequency vanishes (an unabsorbed resonance).
    VanishingDenominator(FrequencyVector),
    /// A symbol has no numeric value in an evaluation.
    Unassigned(Sym),
    /// A static `Γ` is not the conjugate-derivative of a single real function.
    NotIntegrable(String),
    /// A quantity that must be hermitian/real is not.
    NonHermitian(String),
    /// Invalid argument (negative power, bad ratio, …).
    InvalidInput(String),
    /// Operation outside the supported subset.
    Unsupported(&'static str),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::BasisMismatch(s) => write!(f, "basis mismatch: {s}"),
            CoreError::VanishingDenominator(v) => {
                write!(f, "vanishing denominator: frequency form `{v}` is resonant")
            }
            CoreError::Unassigned(s) => write!(f, "no numeric value assigned to `{s}`"),
            CoreError::NotIntegrable(s) => write!(f, "static part not integrable to a real K: {s}"),
            CoreError::NonHermitian(s) => write!(f, "non-hermitian result: {s}"),
            CoreError::InvalidInput(s) => write!(f, "invalid input: {s}"),
            CoreError::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

/// Shorthand result type.
pub type Result<T> = core::result::Result<T, CoreError>;

impl core::error::Error for CoreError {}
