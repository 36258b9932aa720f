//! Exact symbolic engine for effective Hamiltonians of driven nonlinear oscillators.
//!
//! The crate is `no_std` + `alloc`. It provides
//!
//! * the normal-ordered phase-space algebra (Husimi star product and bracket,
//!   static/rotating splitting, conjugate integration) over exact coefficients,
//! * construction of framed systems from circuit and oscillator parameters,
//! * a direct order-by-order harmonic-balance solver ([`qhb`]),
//! * a diagrammatic engine that enumerates and evaluates mixing diagrams
//!   ([`diagram`], [`engine`]),
//! * assembly of the canonical effective Hamiltonian ([`effective`]).
//!
//! Numeric work (Floquet propagation, ODE integration, IO) lives in the
//! companion `kamiltonian` crate.

#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod coeff;
pub mod diagram;
pub mod effective;
pub mod engine;
pub mod error;
pub mod freq;
pub mod graded;
pub mod poly;
pub mod qhb;
pub mod rational;
pub mod scalar;
pub mod starpower;
pub mod symbol;
pub mod system;

pub use coeff::Coefficient;
pub use error::{CoreError, Result};
pub use freq::FrequencyVector;
pub use poly::{MonoKey, NumPoly, PhasePolynomial, SymPoly};
pub use rational::{Q, GQ};
pub use scalar::{Ctx, NumericCtx, Scalar, SymbolicCtx};
pub use symbol::Sym;
