//! Extremal subsets of `{1, …, N}` in which no product of distinct elements
//! is a perfect d-th power.
//!
//! The largest such subset has size ρ_d(N). This crate evaluates the closed
//! form bounds on ρ_d(N), builds explicit extremal sets with certificates,
//! and computes ρ_d(N) exactly for small N by branch and bound over exponent
//! vectors mod d.

pub mod bounds;
pub mod construction;
pub mod davenport;
pub mod error;
pub mod expvec;
pub(crate) mod group;
pub mod intcheck;
pub mod primes;
pub mod solver;

pub use bounds::BoundReport;
pub use construction::ConstructionCertificate;
pub use davenport::GroupSpec;
pub use error::{Error, Result};
pub use expvec::{ExponentVector, VectorMultiset, ZeroSumReport};
pub use primes::{Factorization, PrimeTable};
pub use solver::{SolveOptions, SolveResult};
