//! Heaviest paths in Bernoulli-weighted transitive tournaments.
//!
//! A transitive tournament on nodes `1..n` has an edge `(i, j)` for every
//! `i < j`; give each edge an independent Bernoulli(p) weight and let `X_n`
//! be the weight of the heaviest path from node 1 to node `n`. This crate
//! computes the law of `X_n` exactly (recurrence, generating functions,
//! composition sums), evaluates the limit constants of `X_n / (n-1)` and of
//! the associated central limit theorem, and validates all of it against a
//! brute-force oracle and a reproducible Monte Carlo sampler.
//!
//! Modules:
//! - [`numerics`]: exact rationals, q-power utilities, q-series evaluation
//! - [`recurrence`]: exact moments, probability generating function, full law
//! - [`series`]: truncated power-series algebra and composition sums
//! - [`percolation`]: sampling, dynamic programming, exhaustive oracle
//! - [`asymptotics`]: limit constants and CLT diagnostics
//! - [`cli`]: command-line front end (used by the `lpp` binary)

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod percolation;
pub mod recurrence;
pub mod series;

pub use error::{Error, Result};
pub use numerics::Rational;
