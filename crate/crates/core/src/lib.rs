//! Dynamic-depth QAOA for the constrained shortest path problem.
//!
//! The pipeline: [`cspp`] instances are compiled by [`qubo`] into diagonal
//! Ising Hamiltonians, simulated exactly by [`statevector`], optimized by the
//! runners in [`driver`] with the [`adam`] optimizer, and compared by the
//! [`bench`] harness.

pub mod adam;
pub mod bench;
pub mod cspp;
pub mod driver;
mod error;
pub mod qubo;
pub mod statevector;

pub use error::{Error, Result};
