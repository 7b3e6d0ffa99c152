//! Numeric results carrying a rigorous error bound.
//!
//! The estimate is stored as an exact rational (truncated series partial
//! sums are rational when `q` is), so precision is limited only by the
//! attached truncation/rounding bound, never by a float format. Interval
//! propagation through the arithmetic here is exact, not first-order:
//! the bound always contains the image of the input intervals.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::Rational;

/// Default number of fractional digits offered when the error bound
/// justifies more than anyone asked for.
pub const MAX_REPORTED_FRACTION_DIGITS: usize = 24;

/// A value known to lie within `estimate ± error_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct HighPrecisionValue {
    estimate: Rational,
    error_bound: Rational,
}

impl HighPrecisionValue {
    pub fn new(estimate: Rational, error_bound: Rational) -> Self {
        assert!(
            !error_bound.is_negative(),
            "error bound must be nonnegative"
        );
        HighPrecisionValue {
            estimate,
            error_bound,
        }
    }

    pub fn exact(estimate: Rational) -> Self {
        HighPrecisionValue::new(estimate, Rational::zero())
    }

    pub fn estimate(&self) -> &Rational {
        &self.estimate
    }

    pub fn error_bound(&self) -> &Rational {
        &self.error_bound
    }

    pub fn to_f64(&self) -> f64 {
        self.estimate.to_f64()
    }

    /// Error bound as a double, rounded away from zero.
    pub fn error_f64(&self) -> f64 {
        let e = self.error_bound.to_f64();
        if e == 0.0 && !self.error_bound.is_zero() {
            f64::MIN_POSITIVE
        } else {
            next_up(e)
        }
    }

    pub fn lower(&self) -> Rational {
        &self.estimate - &self.error_bound
    }

    pub fn upper(&self) -> Rational {
        &self.estimate + &self.error_bound
    }

    pub fn add(&self, rhs: &Self) -> Self {
        HighPrecisionValue::new(
            &self.estimate + &rhs.estimate,
            &self.error_bound + &rhs.error_bound,
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        HighPrecisionValue::new(
            &self.estimate - &rhs.estimate,
            &self.error_bound + &rhs.error_bound,
        )
    }

    pub fn add_rational(&self, c: &Rational) -> Self {
        HighPrecisionValue::new(&self.estimate + c, self.error_bound.clone())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        HighPrecisionValue::new(&self.estimate * c, c.abs() * &self.error_bound)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let value = &self.estimate * &rhs.estimate;
        let err = self.estimate.abs() * &rhs.error_bound
            + rhs.estimate.abs() * &self.error_bound
            + &self.error_bound * &rhs.error_bound;
        HighPrecisionValue::new(value, err)
    }

    /// Reciprocal of an interval that excludes zero.
    pub fn recip(&self) -> Result<Self> {
        let mag = self.estimate.abs();
        if mag <= self.error_bound {
            return Err(Error::IntervalStraddlesZero);
        }
        let value = self.estimate.recip()?;
        // sup over the interval of |1/x - 1/v| is e / (|v| (|v| - e)).
        let err = &self.error_bound / &(&mag * &(&mag - &self.error_bound));
        Ok(HighPrecisionValue::new(value, err))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.recip()?))
    }

    /// Square root via double arithmetic with outward rounding.
    ///
    /// Fails if the whole interval is negative; an interval that merely dips
    /// below zero is clamped at zero (the true value is then known
    /// nonnegative only up to the bound).
    pub fn sqrt(&self) -> Result<Self> {
        if self.upper().is_negative() {
            return Err(Error::NegativeRadicand(format!(
                "{} ± {}",
                self.estimate, self.error_bound
            )));
        }
        let upper = self.upper();
        if upper.is_zero() {
            return Ok(HighPrecisionValue::exact(Rational::zero()));
        }
        let lo = self.lower().max(Rational::zero()).to_f64();
        let hi = upper.to_f64();
        let sqrt_lo = next_down(lo.max(0.0).sqrt()).max(0.0);
        let sqrt_hi = next_up(next_up(hi).sqrt());
        let mid = 0.5 * (sqrt_lo + sqrt_hi);
        let half_width = next_up(0.5 * (sqrt_hi - sqrt_lo)) + mid.abs() * f64::EPSILON;
        let value = Rational::from_f64_exact(mid).unwrap_or_else(Rational::zero);
        let err = Rational::from_f64_exact(half_width).unwrap_or_else(Rational::one);
        Ok(HighPrecisionValue::new(value, err))
    }

    /// Decimal rendering with only as many digits as the error bound
    /// justifies (never more than `max_frac` fractional digits).
    pub fn decimal(&self, max_frac: usize) -> String {
        let digits = self.justified_fraction_digits(max_frac);
        render_fixed(&self.estimate, digits)
    }

    /// Largest `k <= max_frac` with `2 * error_bound < 10^-k`.
    fn justified_fraction_digits(&self, max_frac: usize) -> usize {
        if self.error_bound.is_zero() {
            return max_frac;
        }
        let two_err = Rational::from_integer(2) * &self.error_bound;
        let mut scale = Rational::one();
        let tenth = Rational::new(1, 10).unwrap();
        for k in 0..=max_frac {
            if two_err >= scale {
                return k.saturating_sub(1);
            }
            scale = scale * &tenth;
        }
        max_frac
    }
}

impl fmt::Display for HighPrecisionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.error_bound.is_zero() {
            write!(f, "{}", self.decimal(MAX_REPORTED_FRACTION_DIGITS))
        } else {
            write!(
                f,
                "{} ± {:e}",
                self.decimal(MAX_REPORTED_FRACTION_DIGITS),
                self.error_f64()
            )
        }
    }
}

impl Serialize for HighPrecisionValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("HighPrecisionValue", 2)?;
        st.serialize_field("value", &self.decimal(MAX_REPORTED_FRACTION_DIGITS))?;
        st.serialize_field("err", &format!("{:e}", self.error_f64()))?;
        st.end()
    }
}

/// Fixed-point rendering of an exact rational with `frac` digits after the
/// point, rounded to nearest (ties away from zero).
fn render_fixed(value: &Rational, frac: usize) -> String {
    let ten = BigInt::from(10);
    let scale = ten.pow(frac as u32);
    // round(value * scale) = floor(|2 v s| + 1) / 2 with the original sign
    let scaled_num = value.numer() * &scale;
    let den = value.denom();
    let twice = BigInt::from(2) * scaled_num.abs();
    let rounded = (twice + den) / (BigInt::from(2) * den);
    let neg = value.is_negative() && rounded != BigInt::from(0);
    let digits = rounded.to_string();
    let (int_part, frac_part) = if digits.len() > frac {
        let split = digits.len() - frac;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        (
            "0".to_string(),
            format!("{:0>width$}", digits, width = frac),
        )
    };
    let sign = if neg { "-" } else { "" };
    if frac == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

fn next_up(x: f64) -> f64 {
    f64::next_up(x)
}

fn next_down(x: f64) -> f64 {
    f64::next_down(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn interval_contains_truth_through_arithmetic() {
        let a = HighPrecisionValue::new(r("3/2"), r("1/100"));
        let b = HighPrecisionValue::new(r("2/3"), r("1/200"));
        let prod = a.mul(&b);
        // true product of the centers
        assert_eq!(prod.estimate(), &Rational::one());
        // worst-case corner: (3/2 + 1/100)(2/3 + 1/200) - 1 must be <= err
        let corner = (r("3/2") + r("1/100")) * (r("2/3") + r("1/200")) - Rational::one();
        assert!(corner <= *prod.error_bound());
    }

    #[test]
    fn recip_error_is_exact_sup() {
        let a = HighPrecisionValue::new(r("2"), r("1/10"));
        let inv = a.recip().unwrap();
        assert_eq!(inv.estimate(), &r("1/2"));
        // sup deviation occurs at the left endpoint: 1/(2 - 1/10) - 1/2
        let worst = r("10/19") - r("1/2");
        assert_eq!(inv.error_bound(), &worst);
    }

    #[test]
    fn recip_rejects_straddling_zero() {
        let a = HighPrecisionValue::new(r("1/100"), r("1/10"));
        assert!(a.recip().is_err());
    }

    #[test]
    fn sqrt_brackets_truth() {
        let a = HighPrecisionValue::new(r("2"), r("1/1000000"));
        let s = a.sqrt().unwrap();
        let v = s.to_f64();
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-6);
        assert!(s.error_bound().to_f64() < 1e-5);
        // entirely negative interval is an error
        let neg = HighPrecisionValue::new(r("-1"), r("1/10"));
        assert!(neg.sqrt().is_err());
    }

    #[test]
    fn decimal_respects_error_bound() {
        // 1/3 known to +/- 1e-4: at most 3 fractional digits are justified
        let x = HighPrecisionValue::new(r("1/3"), r("1/10000"));
        assert_eq!(x.decimal(20), "0.333");
        let exact = HighPrecisionValue::exact(r("1/8"));
        assert_eq!(exact.decimal(6), "0.125000");
        let neg = HighPrecisionValue::exact(r("-9/8"));
        assert_eq!(neg.decimal(3), "-1.125");
    }

    #[test]
    fn rounding_is_nearest() {
        assert_eq!(render_fixed(&r("2/3"), 4), "0.6667");
        assert_eq!(render_fixed(&r("1/2"), 0), "1");
        assert_eq!(render_fixed(&r("-2/3"), 2), "-0.67");
    }
}
