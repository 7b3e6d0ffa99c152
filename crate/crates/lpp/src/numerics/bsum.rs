//! High-precision evaluation of `B(1)` and its first two derivatives,
//! where `B(x) = sum_{n>=0} q^C(n+1,2) x^n`.
//!
//! The order-`d` derivative at `x = 1` is `sum_{n} n(n-1)...(n-d+1) q^C(n+1,2)`.
//! Terms decay super-geometrically, so the partial sum is computed in exact
//! rational arithmetic and truncated once the next term drops below the
//! requested tolerance *and* the term ratio has fallen below `q`; the tail
//! is then bounded by the geometric series `t_next / (1 - q)`.
//!
//! The ratio condition matters: for derivative orders >= 1 the polynomial
//! weight makes early terms grow when `q` is close to 1, and the leading
//! terms are structurally zero, so "first term below tol" alone would
//! truncate far too early.

use crate::error::{Error, Result};
use crate::numerics::{HighPrecisionValue, Rational};

/// Hard cap on summed terms; only reachable for q pathologically close to 1.
const MAX_TERMS: u64 = 100_000;

/// `sum_{n>=0} w_d(n) q^C(n+1,2)` with `w_0 = 1`, `w_1 = n`, `w_2 = n(n-1)`,
/// i.e. the order-`derivative_order` derivative of `B` at `x = 1`.
pub fn b_series_at_one(q: &Rational, derivative_order: u8, tol: f64) -> Result<HighPrecisionValue> {
    if derivative_order > 2 {
        return Err(Error::BadDerivativeOrder(derivative_order));
    }
    if q.is_negative() || *q >= Rational::one() {
        return Err(Error::QOutOfRange(q.to_string()));
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::BadTolerance(tol));
    }
    let tol = Rational::from_f64_exact(tol).ok_or(Error::BadTolerance(f64::NAN))?;
    let d = u64::from(derivative_order);

    let weight = |n: u64| -> Rational {
        match d {
            0 => Rational::one(),
            1 => Rational::from_integer(n),
            _ => Rational::from_integer(n) * Rational::from_integer(n.saturating_sub(1)),
        }
    };

    // Running powers: qpow = q^C(n+1,2), qstep = q^(n+1).
    let mut qpow = Rational::one();
    let mut qstep = q.clone();
    let mut sum = Rational::zero();
    let mut n: u64 = 0;
    loop {
        let term = weight(n) * &qpow;
        sum = sum + term;

        let qpow_next = &qpow * &qstep;
        let qstep_next = &qstep * q;
        let t_next = weight(n + 1) * &qpow_next;
        if n >= d && t_next < tol {
            let t_after = weight(n + 2) * &qpow_next * &qstep_next;
            if t_after <= q * &t_next {
                // ratios only shrink from here, so the tail is geometric
                let tail = &t_next / &(Rational::one() - q);
                return Ok(HighPrecisionValue::new(sum, tail));
            }
        }
        qpow = qpow_next;
        qstep = qstep_next;
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::BadTolerance(0.0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(b_series_at_one(&r("1"), 0, 1e-10).is_err());
        assert!(b_series_at_one(&r("3/2"), 1, 1e-10).is_err());
        assert!(b_series_at_one(&r("1/2"), 3, 1e-10).is_err());
        assert!(b_series_at_one(&r("1/2"), 0, 0.0).is_err());
        assert!(b_series_at_one(&r("1/2"), 0, -1.0).is_err());
    }

    #[test]
    fn degenerate_q_zero() {
        let b = b_series_at_one(&Rational::zero(), 0, 1e-12).unwrap();
        assert_eq!(b.estimate(), &Rational::one());
        assert!(b.error_bound().is_zero());
        let b1 = b_series_at_one(&Rational::zero(), 1, 1e-12).unwrap();
        assert!(b1.estimate().is_zero());
        let b2 = b_series_at_one(&Rational::zero(), 2, 1e-12).unwrap();
        assert!(b2.estimate().is_zero());
    }

    #[test]
    fn half_matches_hand_prefix() {
        // 1 + 1/2 + 1/8 + 1/64 + 1/1024 + ...
        let b = b_series_at_one(&r("1/2"), 0, 1e-15).unwrap();
        let prefix = r("1") + r("1/2") + r("1/8") + r("1/64") + r("1/1024");
        assert!(b.estimate() >= &prefix);
        assert!((b.to_f64() - 1.6416325606551538).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_of_b_half_has_eleven_known_digits() {
        let b = b_series_at_one(&r("1/2"), 0, 1e-15).unwrap();
        let beta = b.recip().unwrap();
        assert!((beta.to_f64() - 0.60914971106).abs() < 1e-11);
    }

    #[test]
    fn error_bound_covers_refinement() {
        for q in [r("1/2"), r("1/3"), r("9/10")] {
            for d in 0..=2u8 {
                let coarse = b_series_at_one(&q, d, 1e-8).unwrap();
                let fine = b_series_at_one(&q, d, 1e-10).unwrap();
                // partial sums of a nonnegative series only grow
                assert!(fine.estimate() >= coarse.estimate(), "q={q} d={d}");
                let gap = fine.estimate() - coarse.estimate();
                assert!(gap <= *coarse.error_bound(), "q={q} d={d}");
            }
        }
    }

    #[test]
    fn derivative_weights_are_falling_factorials() {
        // At q = 1/10 the first few terms dominate; check against direct sums.
        let q = r("1/10");
        let direct_b1: Rational = (1..30u64)
            .map(|n| Rational::from_integer(n) * q.pow(crate::numerics::binomial2(n + 1) as u32))
            .fold(Rational::zero(), |a, b| a + b);
        let b1 = b_series_at_one(&q, 1, 1e-30).unwrap();
        let diff = (b1.estimate() - &direct_b1).abs();
        assert!(diff <= *b1.error_bound() || diff.is_zero());
    }
}
