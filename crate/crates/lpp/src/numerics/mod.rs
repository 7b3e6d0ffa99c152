//! Exact rational arithmetic, triangular-exponent q-powers, and
//! high-precision evaluation of the convergent series `B(1)`, `B'(1)`,
//! `B''(1)`.
//!
//! Everything exact stays rational; floats appear only inside
//! [`HighPrecisionValue`] outputs together with an error bound.

mod bsum;
mod highprec;
mod qpowers;
mod rational;

pub use bsum::b_series_at_one;
pub use highprec::{HighPrecisionValue, MAX_REPORTED_FRACTION_DIGITS};
pub use qpowers::{binomial2, q_triangular_power, QPowers};
pub use rational::{check_probability, parse_probability, Rational};
