//! Numerics, IO and command-line front end built on `kamiltonian-core`.
//!
//! * [`numeric`]: numeric effective Hamiltonians, reduced matrices and
//!   resonance landscapes.
//! * [`floquet`]: exact Floquet quasienergies of truncated driven oscillators.
//! * [`duffing`]: classical Duffing steady states, Fourier reconstruction,
//!   basins, domain diagrams and metapotential quantisation.
//! * [`config`], [`io`], [`app`]: configuration, output files and the
//!   commands of the `kamiltonian` binary.

pub mod app;
pub mod config;
pub mod duffing;
pub mod error;
pub mod floquet;
pub mod golden;
pub mod io;
pub mod numeric;
pub mod ode;

pub use error::{Error, Result};
