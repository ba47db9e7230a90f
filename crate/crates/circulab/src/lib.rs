//! Numerical laboratory for sparse non-Hermitian random matrices: sampling,
//! singular-value processes with an acceptance schedule, quasi-randomness
//! certificates, anti-concentration estimates, and empirical circular-law
//! convergence checks.

pub mod anticonc;
pub mod config;
pub mod driver;
pub mod ensemble;
pub mod error;
pub mod lawcheck;
pub mod linalg;
pub mod potential;
pub mod process;
pub mod quasirandom;
pub mod report;
pub mod rng;
pub mod selftest;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
