//! Powers of `q = 1 - p` at triangular-number exponents.
//!
//! The series `A(x) = sum q^C(n,2) x^n` and `B(x) = sum q^C(n+1,2) x^n`
//! are built entirely from powers `q^C(k,2)`; this module centralizes the
//! exponent bookkeeping and caches the exact powers.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numerics::Rational;

/// `C(k, 2) = k(k-1)/2`.
pub fn binomial2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// `q^C(k,2)` exactly, with the `0^0 = 1` convention (so k = 0, 1 give 1
/// even at q = 0).
pub fn q_triangular_power(q: &Rational, k: u64) -> Rational {
    let e = binomial2(k);
    q.pow(u32::try_from(e).expect("triangular exponent fits u32"))
}

/// Cache of exact powers of a fixed `q` in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct QPowers {
    q: Rational,
    cache: HashMap<u64, Rational>,
}

impl QPowers {
    /// Requires `0 <= q < 1`.
    pub fn new(q: Rational) -> Result<Self> {
        if q.is_negative() || q >= Rational::one() {
            return Err(Error::QOutOfRange(q.to_string()));
        }
        Ok(QPowers {
            q,
            cache: HashMap::new(),
        })
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    /// `q^e`, cached.
    pub fn power(&mut self, e: u64) -> Rational {
        if let Some(v) = self.cache.get(&e) {
            return v.clone();
        }
        let v = self.q.pow(u32::try_from(e).expect("exponent fits u32"));
        self.cache.insert(e, v.clone());
        v
    }

    /// `q^C(k,2)`, cached.
    pub fn triangular(&mut self, k: u64) -> Rational {
        self.power(binomial2(k))
    }

    /// `q^C(k+1,2)`, cached.
    pub fn triangular_next(&mut self, k: u64) -> Rational {
        self.power(binomial2(k + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn triangular_exponents() {
        assert_eq!(binomial2(0), 0);
        assert_eq!(binomial2(1), 0);
        assert_eq!(binomial2(4), 6);
        assert_eq!(binomial2(64), 2016);
    }

    #[test]
    fn triangular_power_examples() {
        assert_eq!(q_triangular_power(&r("1/2"), 0), Rational::one());
        assert_eq!(q_triangular_power(&r("1/2"), 3), r("1/8"));
        assert_eq!(q_triangular_power(&r("2/3"), 4), r("64/729"));
        // 0^0 = 1 convention: k = 0 and k = 1 both have exponent 0.
        assert_eq!(q_triangular_power(&Rational::zero(), 0), Rational::one());
        assert_eq!(q_triangular_power(&Rational::zero(), 1), Rational::one());
        assert_eq!(q_triangular_power(&Rational::zero(), 2), Rational::zero());
    }

    #[test]
    fn rejects_q_outside_unit_interval() {
        assert!(QPowers::new(r("1")).is_err());
        assert!(QPowers::new(r("-1/2")).is_err());
        assert!(QPowers::new(r("9/10")).is_ok());
    }

    // q^C(k,2) * q^k = q^C(k+1,2), exhaustively for k <= 64.
    #[test]
    fn triangular_power_recurrence_exhaustive() {
        for q in [r("1/2"), r("2/3"), r("9/10")] {
            let mut pw = QPowers::new(q.clone()).unwrap();
            for k in 0..=64u64 {
                let lhs = pw.triangular(k) * q.pow(k as u32);
                let rhs = pw.triangular_next(k);
                assert_eq!(lhs, rhs, "k = {k}");
            }
        }
    }

    #[test]
    fn cache_matches_recomputation() {
        let mut pw = QPowers::new(r("3/7")).unwrap();
        let first = pw.triangular(9);
        let again = pw.triangular(9);
        assert_eq!(first, again);
        assert_eq!(first, r("3/7").pow(36));
    }
}
