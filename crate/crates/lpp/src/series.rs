//! Truncated power-series algebra over exact rationals.
//!
//! Realizes the q-series `A(x) = sum q^C(n,2) x^n`, `B(x) = sum q^C(n+1,2) x^n`,
//! the mean generating function `G(x) = 1 + x / ((1-x)^2 B(x))` whose `x^n`
//! coefficient is `1 + E[X_n]`, the reciprocal `H = 1/B`, and the bivariate
//! `Z(x, t) = 1 + x B(x) / (1 - t (A(x) - B(x)))` whose `x^n` coefficient is
//! the PGF of `X_n`. The composition sums re-derive `H` and `G` coefficients
//! by explicit enumeration, giving a third, independent route.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{binomial2, Rational};
use crate::recurrence::PolyInT;

/// Hard default on composition enumeration (2^(n-1) tuples).
pub const DEFAULT_COMPOSITION_LIMIT: usize = 24;

/// A power series known through order `N`: `coeffs[j] = [x^j]`, `j = 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs order >= 0");
        TruncatedSeries { coeffs }
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); order + 1];
        coeffs[0] = c;
        TruncatedSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Option<&Rational> {
        self.coeffs.get(j)
    }

    /// Sum; the result carries the smaller order.
    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=n).map(|j| &self.coeffs[j] + &rhs.coeffs[j]).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=n).map(|j| &self.coeffs[j] - &rhs.coeffs[j]).collect(),
        }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        let mut out = vec![Rational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        TruncatedSeries { coeffs: out }
    }

    /// Multiply by `x^k`; the order grows by `k` (all new content is known).
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        TruncatedSeries { coeffs }
    }

    /// Series inverse: the unique `H` with `self * H = 1 + O(x^{N+1})`.
    /// Requires a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let n = self.order();
        let c0_inv = self.coeffs[0].recip()?;
        let mut out = vec![Rational::zero(); n + 1];
        out[0] = c0_inv.clone();
        for j in 1..=n {
            let mut acc = Rational::zero();
            for k in 1..=j {
                if !self.coeffs[k].is_zero() {
                    acc = acc + &self.coeffs[k] * &out[j - k];
                }
            }
            out[j] = -(&c0_inv * &acc);
        }
        Ok(TruncatedSeries { coeffs: out })
    }
}

/// `A(x) = sum_n q^C(n,2) x^n` through order `N`.
pub fn series_a(q: &Rational, order: usize) -> TruncatedSeries {
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut tri = Rational::one(); // q^C(n,2)
    let mut step = Rational::one(); // q^(n-1) after the update below
    for n in 0..=order {
        if n >= 2 {
            tri = &tri * &step;
        }
        coeffs.push(tri.clone());
        if n >= 1 {
            step = &step * q;
        }
    }
    TruncatedSeries { coeffs }
}

/// `B(x) = sum_n q^C(n+1,2) x^n = A((1-p) x)` through order `N`.
pub fn series_b(q: &Rational, order: usize) -> TruncatedSeries {
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut tri = Rational::one(); // q^C(n+1,2)
    let mut step = q.clone(); // q^(n+1)
    for _n in 0..=order {
        coeffs.push(tri.clone());
        tri = &tri * &step;
        step = &step * q;
    }
    TruncatedSeries { coeffs }
}

/// `(1 - x)^{-2}` expanded directly: coefficient `j` is `j + 1`.
pub fn one_minus_x_inv_sq(order: usize) -> TruncatedSeries {
    TruncatedSeries {
        coeffs: (0..=order)
            .map(|j| Rational::from_integer((j + 1) as u64))
            .collect(),
    }
}

/// `H(x) = 1 / B(x)` through order `N`.
pub fn series_h(q: &Rational, order: usize) -> TruncatedSeries {
    series_b(q, order)
        .reciprocal()
        .expect("B has constant term 1")
}

/// `G(x) = 1 + x / ((1-x)^2 B(x))`; coefficient `n` equals `1 + E[X_n]`.
pub fn series_g(q: &Rational, order: usize) -> TruncatedSeries {
    if order == 0 {
        return TruncatedSeries::constant(Rational::one(), 0);
    }
    let inner = one_minus_x_inv_sq(order - 1).mul(&series_h(q, order - 1));
    let shifted = inner.shift_up(1);
    shifted.add(&TruncatedSeries::constant(Rational::one(), order))
}

/// Bivariate series in `x` whose coefficients are polynomials in `t`;
/// `coeffs[n] = [x^n] Z(x, t)` is the PGF of `X_n` for `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    coeffs: Vec<PolyInT>,
}

impl BivariateSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Option<&PolyInT> {
        self.coeffs.get(n)
    }

    pub fn coeffs(&self) -> &[PolyInT] {
        &self.coeffs
    }
}

/// Expand `Z(x,t) = 1 + x B(x) / (1 - t D(x))`, `D = A - B`, by the
/// geometric series in `t D`: the `t^m` part of `[x^n] Z` is
/// `[x^{n-1}] (B * D^m)`. Since `D` has no constant term, `D^m = O(x^m)`
/// and the polynomial degree at `x^n` is at most `n - 1`.
#[allow(clippy::needless_range_loop)] // m and n address both acc and polys[n][m]
pub fn series_z(q: &Rational, order: usize) -> BivariateSeries {
    let mut polys: Vec<Vec<Rational>> = (0..=order)
        .map(|n| vec![Rational::zero(); n.max(1)])
        .collect();
    polys[0][0] = Rational::one(); // [x^0] Z = 1

    if order >= 1 {
        let b = series_b(q, order - 1);
        let d = series_a(q, order - 1).sub(&series_b(q, order - 1));
        // acc = B * D^m
        let mut acc = b;
        for m in 0..order {
            for n in 1..=order {
                if let Some(c) = acc.coeff(n - 1) {
                    if !c.is_zero() {
                        polys[n][m] = c.clone();
                    }
                }
            }
            if m + 1 < order {
                acc = acc.mul(&d);
            }
        }
    }

    BivariateSeries {
        coeffs: polys.into_iter().map(PolyInT::new).collect(),
    }
}

/// An ordered tuple of positive integers with a fixed sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    pub fn new(parts: Vec<u32>) -> Self {
        assert!(!parts.is_empty() && parts.iter().all(|&a| a >= 1));
        Composition { parts }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn target(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false // parts are nonempty by construction
    }
}

/// Iterator over all `2^(n-1)` compositions of `n >= 1`, encoded by the
/// subset of the `n-1` interior gaps at which a cut is placed.
pub struct Compositions {
    n: u32,
    mask: u64,
    end: u64,
}

/// All compositions of `n`; empty iterator for `n = 0` (the empty
/// composition is handled by callers as the `j = 0` convention).
pub fn compositions(n: u32) -> Compositions {
    assert!(n <= 63, "composition enumeration limited to n <= 63");
    let end = if n == 0 { 0 } else { 1u64 << (n - 1) };
    Compositions { n, mask: 0, end }
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        if self.mask >= self.end {
            return None;
        }
        let mask = self.mask;
        self.mask += 1;
        let mut parts = Vec::new();
        let mut run = 1u32;
        for gap in 0..self.n - 1 {
            if mask >> gap & 1 == 1 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        Some(Composition { parts })
    }
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit || n > 63 {
        return Err(Error::CompositionLimit { n, limit });
    }
    Ok(())
}

/// `[x^n] (1/B)` by explicit enumeration:
/// `sum over compositions a of n of (-1)^len(a) q^(sum C(a_i + 1, 2))`.
///
/// Terms are bucketed by total exponent so only O(C(n+1,2)) big-rational
/// operations are needed despite the 2^(n-1) tuples.
pub fn h_by_compositions(n: usize, q: &Rational, limit: usize) -> Result<Rational> {
    check_limit(n, limit)?;
    if n == 0 {
        return Ok(Rational::one()); // empty composition
    }
    let max_exp = binomial2(n as u64 + 1) as usize;
    let mut counts = vec![0i64; max_exp + 1];
    for comp in compositions(n as u32) {
        let exp: u64 = comp.parts().iter().map(|&a| binomial2(a as u64 + 1)).sum();
        let sign = if comp.len() % 2 == 0 { 1 } else { -1 };
        counts[exp as usize] += sign;
    }
    let mut total = Rational::zero();
    let mut qe = Rational::one();
    for (e, &c) in counts.iter().enumerate() {
        if c != 0 {
            total = total + Rational::from_integer(c) * &qe;
        }
        if e < max_exp {
            qe = &qe * q;
        }
    }
    Ok(total)
}

/// `g(n) = sum_{m=0}^{n-1} (n - m) h_m` with `h_m` from the composition
/// enumeration; equals `[x^n] G` and `1 + E[X_n]`.
pub fn g_by_compositions(n: usize, q: &Rational, limit: usize) -> Result<Rational> {
    if n == 0 {
        return Ok(Rational::one());
    }
    check_limit(n - 1, limit)?;
    let mut total = Rational::zero();
    for m in 0..n {
        let h = h_by_compositions(m, q, limit)?;
        total = total + Rational::from_integer((n - m) as u64) * h;
    }
    Ok(total)
}

/// The triangular triple-sum form of `g(n)`:
/// `sum_{m=0}^{n-1} sum_{j=0}^{m} sum_{k} (-1)^k sum_{a in C_{j,k}} q^(...)`,
/// where the `j = 0` inner sum is the empty composition contributing 1.
/// Kept as an independent cross-check of [`g_by_compositions`].
pub fn g_by_compositions_triangular(n: usize, q: &Rational, limit: usize) -> Result<Rational> {
    if n == 0 {
        return Ok(Rational::one());
    }
    check_limit(n - 1, limit)?;
    let mut total = Rational::zero();
    for m in 0..n {
        for j in 0..=m {
            if j == 0 {
                total = total + Rational::one();
                continue;
            }
            for comp in compositions(j as u32) {
                let exp: u64 = comp.parts().iter().map(|&a| binomial2(a as u64 + 1)).sum();
                let term = q.pow(exp as u32);
                if comp.len() % 2 == 0 {
                    total = total + term;
                } else {
                    total = total - term;
                }
            }
        }
    }
    Ok(total)
}
