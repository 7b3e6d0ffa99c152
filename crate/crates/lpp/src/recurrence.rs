//! Exact law of the heaviest-path weight `X_n` via the gap recurrence.
//!
//! Conditioning on the first node at which the running maximum weight
//! increases from 0 to 1 splits `X_n` as `1 + X_{n-i}` where the "gap"
//! `i` is consumed with probability `gap(i) = q^C(i,2) - q^C(i+1,2)`
//! (`q = 1 - p`), and the all-zero remainder event has probability
//! `q^C(n,2)`. The same recurrence applies to the random variable itself,
//! so it yields the full probability generating function, not just moments:
//!
//! ```text
//! E[t^{X_n}] = sum_{i=1}^{n-1} gap(i) * t * E[t^{X_{n-i}}] + q^C(n,2)
//! ```
//!
//! Moments follow by differentiating at `t = 1`:
//!
//! ```text
//! m1[n] = sum_i gap(i) * (1 + m1[n-i])
//! m2[n] = sum_i gap(i) * (m2[n-i] + 2*m1[n-i] + 1)
//! ```
//!
//! All tables are filled bottom-up in one pass per requested size and kept
//! for reuse; completed values are immutable. Numerators and denominators
//! grow like `q^C(n,2)`, so an O(n^2) floating-point twin of the moment
//! recurrence ([`moments_float`]) covers the large-`n` regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_probability, Rational};

/// Polynomial in the PGF indeterminate `t`; `coeffs[k]` multiplies `t^k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyInT {
    coeffs: Vec<Rational>,
}

impl PolyInT {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "polynomial needs at least one coefficient"
        );
        PolyInT { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        PolyInT { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        PolyInT::constant(Rational::one())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `t^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> usize {
        let mut d = self.coeffs.len() - 1;
        while d > 0 && self.coeffs[d].is_zero() {
            d -= 1;
        }
        d
    }

    /// Value at `t = 1`: the total mass for a PGF.
    pub fn eval_one(&self) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, c| acc + c)
    }

    /// Formal derivative evaluated at `t = 1`: `sum k * c_k`.
    pub fn derivative_eval_one(&self) -> Rational {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (k, c)| {
                acc + Rational::from_integer(k as u64) * c
            })
    }

    /// Second factorial moment at `t = 1`: `sum k(k-1) * c_k`.
    pub fn second_factorial_eval_one(&self) -> Rational {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (k, c)| {
                acc + Rational::from_integer((k * k.saturating_sub(1)) as u64) * c
            })
    }
}

/// Equality up to trailing zero coefficients.
impl PartialEq for PolyInT {
    fn eq(&self, other: &Self) -> bool {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len).all(|k| self.coeff(k) == other.coeff(k))
    }
}

impl Eq for PolyInT {}

impl std::fmt::Display for PolyInT {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Exact law of `X_n` on its support `{0, ..., n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pub n: usize,
    pub probs: Vec<Rational>,
}

impl WeightDistribution {
    pub fn mean(&self) -> Rational {
        self.probs
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (k, p)| {
                acc + Rational::from_integer(k as u64) * p
            })
    }

    pub fn second_moment(&self) -> Rational {
        self.probs
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (k, p)| {
                acc + Rational::from_integer((k * k) as u64) * p
            })
    }

    pub fn variance(&self) -> Rational {
        let m = self.mean();
        self.second_moment() - &m * &m
    }

    /// Check every structural invariant against the generating `p`:
    /// support size `n`, nonnegativity, unit mass, and the closed-form
    /// endpoint probabilities `P(X=0) = q^C(n,2)`, `P(X=n-1) = p^(n-1)`.
    pub fn validate(&self, p: &Rational) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidDistribution(msg));
        if self.n == 0 || self.probs.len() != self.n {
            return fail(format!(
                "support has {} entries for n = {}",
                self.probs.len(),
                self.n
            ));
        }
        if self.probs.iter().any(Rational::is_negative) {
            return fail("negative probability".into());
        }
        let total = self.probs.iter().fold(Rational::zero(), |acc, p| acc + p);
        if !total.is_one() {
            return fail(format!("total mass {total} != 1"));
        }
        let q = Rational::one() - p;
        let c2 = crate::numerics::binomial2(self.n as u64);
        if self.probs[0] != q.pow(c2 as u32) {
            return fail("P(X=0) != q^C(n,2)".into());
        }
        if self.probs[self.n - 1] != p.pow((self.n - 1) as u32) {
            return fail("P(X=n-1) != p^(n-1)".into());
        }
        Ok(())
    }
}

/// First and second moments of `X_n` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub m1: Vec<Rational>,
    pub m2: Vec<Rational>,
}

impl MomentTable {
    pub fn n_max(&self) -> usize {
        self.m1.len() - 1
    }

    pub fn variance(&self, n: usize) -> Rational {
        &self.m2[n] - &(&self.m1[n] * &self.m1[n])
    }
}

/// Bottom-up tables for a fixed `p`, grown on demand and reusable across
/// all the operations below.
#[derive(Debug, Clone)]
pub struct Recurrence {
    p: Rational,
    q: Rational,
    /// `gap[i] = q^C(i,2) - q^C(i+1,2)`; `gap[0]` is an unused zero.
    gap: Vec<Rational>,
    /// `zero_prob[n] = q^C(n,2)`.
    zero_prob: Vec<Rational>,
    m1: Vec<Rational>,
    m2: Vec<Rational>,
    /// `pgfs[n] = E[t^{X_n}]`; index 0 is a placeholder.
    pgfs: Vec<PolyInT>,
}

impl Recurrence {
    pub fn new(p: &Rational) -> Result<Self> {
        check_probability(p)?;
        let q = Rational::one() - p;
        Ok(Recurrence {
            p: p.clone(),
            q,
            gap: vec![Rational::zero()],
            zero_prob: vec![Rational::one()],
            m1: vec![Rational::zero()],
            m2: vec![Rational::zero()],
            pgfs: vec![PolyInT::one()],
        })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    fn ensure_coeffs(&mut self, n_max: usize) {
        while self.zero_prob.len() <= n_max + 1 {
            let n = self.zero_prob.len() - 1;
            // q^C(n+1,2) = q^C(n,2) * q^n
            let next = &self.zero_prob[n] * &self.q.pow(n as u32);
            self.zero_prob.push(next);
        }
        while self.gap.len() <= n_max {
            let i = self.gap.len();
            self.gap.push(&self.zero_prob[i] - &self.zero_prob[i + 1]);
        }
    }

    fn ensure_moments(&mut self, n_max: usize) {
        self.ensure_coeffs(n_max);
        while self.m1.len() <= n_max {
            let n = self.m1.len();
            let mut m1 = Rational::zero();
            let mut m2 = Rational::zero();
            for i in 1..n {
                let prev1 = &self.m1[n - i];
                let prev2 = &self.m2[n - i];
                m1 = m1 + &self.gap[i] * &(Rational::one() + prev1);
                m2 = m2
                    + &self.gap[i]
                        * &(prev2 + &(Rational::from_integer(2) * prev1) + Rational::one());
            }
            self.m1.push(m1);
            self.m2.push(m2);
        }
    }

    fn ensure_pgfs(&mut self, n_max: usize) {
        self.ensure_coeffs(n_max);
        while self.pgfs.len() <= n_max {
            let n = self.pgfs.len();
            // degree of E[t^{X_n}] is at most n-1
            let mut acc = vec![Rational::zero(); n];
            acc[0] = self.zero_prob[n].clone();
            for i in 1..n {
                for (k, c) in self.pgfs[n - i].coeffs().iter().enumerate() {
                    if !c.is_zero() {
                        acc[k + 1] = &acc[k + 1] + &(&self.gap[i] * c);
                    }
                }
            }
            self.pgfs.push(PolyInT::new(acc));
        }
    }

    /// `E[X_n]` exactly; `E[X_0] = E[X_1] = 0`.
    pub fn expected_weight(&mut self, n: usize) -> Rational {
        self.ensure_moments(n);
        self.m1[n].clone()
    }

    /// `E[X_n^2]` exactly.
    pub fn second_moment(&mut self, n: usize) -> Rational {
        self.ensure_moments(n);
        self.m2[n].clone()
    }

    /// `E[t^{X_n}]` as an exact polynomial; requires `n >= 1`.
    pub fn pgf(&mut self, n: usize) -> Result<PolyInT> {
        if n == 0 {
            return Err(Error::NTooSmall { n, min: 1 });
        }
        self.ensure_pgfs(n);
        Ok(self.pgfs[n].clone())
    }

    /// Law of `X_n` read off the PGF coefficients; requires `n >= 1`.
    pub fn distribution(&mut self, n: usize) -> Result<WeightDistribution> {
        let pgf = self.pgf(n)?;
        let mut probs = pgf.coeffs().to_vec();
        probs.resize(n, Rational::zero());
        Ok(WeightDistribution { n, probs })
    }

    /// Moment tables for all `n <= n_max`.
    pub fn moments(&mut self, n_max: usize) -> MomentTable {
        self.ensure_moments(n_max);
        MomentTable {
            m1: self.m1[..=n_max].to_vec(),
            m2: self.m2[..=n_max].to_vec(),
        }
    }
}

/// `E[X_n]` for a one-off query; build a [`Recurrence`] to amortize.
pub fn expected_weight(n: usize, p: &Rational) -> Result<Rational> {
    Ok(Recurrence::new(p)?.expected_weight(n))
}

/// `E[t^{X_n}]` for a one-off query.
pub fn pgf(n: usize, p: &Rational) -> Result<PolyInT> {
    Recurrence::new(p)?.pgf(n)
}

/// Exact law of `X_n` for a one-off query.
pub fn distribution(n: usize, p: &Rational) -> Result<WeightDistribution> {
    Recurrence::new(p)?.distribution(n)
}

/// Exact moment tables for `n = 0..=n_max`; requires `n_max >= 1`.
pub fn moments(n_max: usize, p: &Rational) -> Result<MomentTable> {
    if n_max == 0 {
        return Err(Error::NTooSmall { n: n_max, min: 1 });
    }
    Ok(Recurrence::new(p)?.moments(n_max))
}

/// The moment recurrence in plain `f64`, for sizes where the exact
/// rationals blow up. Agrees with [`moments`] to better than 1e-10
/// relative wherever both are computed.
pub fn moments_float(n_max: usize, p: &Rational) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_max == 0 {
        return Err(Error::NTooSmall { n: n_max, min: 1 });
    }
    check_probability(p)?;
    let q = (Rational::one() - p).to_f64();

    // gap[i] = q^C(i,2) * (1 - q^i), via running powers (underflow to 0 is fine)
    let mut gap = vec![0.0f64; n_max + 1];
    let mut tri = 1.0f64; // becomes q^C(i,2)
    let mut qpow = 1.0f64; // becomes q^i
    for (_i, g) in gap.iter_mut().enumerate().skip(1) {
        tri *= qpow; // q^C(i-1,2) * q^(i-1) = q^C(i,2)
        qpow *= q;
        *g = tri * (1.0 - qpow);
    }

    let mut m1 = vec![0.0f64; n_max + 1];
    let mut m2 = vec![0.0f64; n_max + 1];
    for n in 2..=n_max {
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 1..n {
            a += gap[i] * (1.0 + m1[n - i]);
            b += gap[i] * (m2[n - i] + 2.0 * m1[n - i] + 1.0);
        }
        m1[n] = a;
        m2[n] = b;
    }
    Ok((m1, m2))
}
