//! Limit constants of `X_n / (n-1)`, the CLT scaling constant, and
//! empirical diagnostics tying the two to data.
//!
//! With `B(x) = sum q^C(n+1,2) x^n` and `q = 1 - p`:
//!
//! - the normalized mean converges to `beta = 1 / B(1)`;
//! - the variance slope `var(X_n)/(n-1)` converges to a constant expressible
//!   in `B(1)` and `B'(1)`. Three closed forms for that constant circulate
//!   (see [`SlopeFormula`]); they disagree, so [`variance_slope`] computed
//!   from the exact moment recurrence is the adjudicator. The gap-moment
//!   form wins: the first-increase recurrence makes `X_n` a renewal count
//!   with i.i.d. gap law `P(G=k) = (1-q^k) q^C(k,2)`, whose moments are
//!   `E[G] = B(1)` and `var(G) = 2B'(1) + B(1) - B(1)^2`, and the renewal
//!   CLT gives slope `var(G)/E[G]^3`. [`sigma_w`] is its square root and is
//!   the constant under which the standardized marginal is asymptotically
//!   standard normal ([`clt_diagnostic`]).
//!
//! Weights are nonnegative, so `X_n` equals its positive part and the
//! L1 statement needs no separate normalization path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{b_series_at_one, check_probability, HighPrecisionValue, Rational};
use crate::percolation;
use crate::recurrence;

/// Default series tolerance; overridable per call and via the CLI.
pub const DEFAULT_TOL: f64 = 1e-15;

/// Largest `n` for which [`variance_slope`] uses the exact rational path.
pub const EXACT_SLOPE_LIMIT: usize = 64;

fn q_of(p: &Rational) -> Result<Rational> {
    check_probability(p)?;
    if p.is_zero() {
        return Err(Error::DegenerateProbability("0".into()));
    }
    Ok(Rational::one() - p)
}

/// `beta(p) = 1 / B(1)`, the almost-sure limit of `X_n / (n-1)`.
/// Rejects `p = 0`, where the series diverges.
pub fn beta_tr(p: &Rational, tol: f64) -> Result<HighPrecisionValue> {
    let q = q_of(p)?;
    b_series_at_one(&q, 0, tol)?.recip()
}

/// Candidate closed forms for the limiting variance slope
/// `lim var(X_n)/(n-1)`, all in terms of `B = B(1)` and `B' = B'(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeFormula {
    /// `(B + 2B' - B^2) / B^3`: renewal gap moments `var(G)/E[G]^3`.
    /// Matches the exact recurrence; used by [`sigma_w`].
    GapMoments,
    /// `B^-2 (1 + 6B'/B - B)`, an alternate form kept for comparison.
    AltSixBPrime,
    /// `B^-2 (1 - 2B'/B^3)`, another alternate form kept for comparison.
    AltTwoBPrimeCubed,
}

impl SlopeFormula {
    pub const ALL: [SlopeFormula; 3] = [
        SlopeFormula::GapMoments,
        SlopeFormula::AltSixBPrime,
        SlopeFormula::AltTwoBPrimeCubed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SlopeFormula::GapMoments => "gap-moments",
            SlopeFormula::AltSixBPrime => "alt-six-bprime",
            SlopeFormula::AltTwoBPrimeCubed => "alt-two-bprime-cubed",
        }
    }
}

/// Evaluate a [`SlopeFormula`] with rigorous error propagation.
pub fn variance_slope_constant(
    p: &Rational,
    tol: f64,
    formula: SlopeFormula,
) -> Result<HighPrecisionValue> {
    let q = q_of(p)?;
    let b0 = b_series_at_one(&q, 0, tol)?;
    let b1 = b_series_at_one(&q, 1, tol)?;
    let b0_sq = b0.mul(&b0);
    let b0_cube = b0_sq.mul(&b0);
    let two = Rational::from_integer(2);
    match formula {
        SlopeFormula::GapMoments => {
            let num = b0.add(&b1.scale(&two)).sub(&b0_sq);
            num.div(&b0_cube)
        }
        SlopeFormula::AltSixBPrime => {
            let middle = b1.div(&b0)?.scale(&Rational::from_integer(6));
            let num = middle.add_rational(&Rational::one()).sub(&b0);
            num.div(&b0_sq)
        }
        SlopeFormula::AltTwoBPrimeCubed => {
            let middle = b1.scale(&two).div(&b0_cube)?;
            let num = HighPrecisionValue::exact(Rational::one()).sub(&middle);
            num.div(&b0_sq)
        }
    }
}

/// The CLT scaling constant: square root of the gap-moment variance slope.
/// Zero exactly at `p = 1`; rejects `p = 0`.
pub fn sigma_w(p: &Rational, tol: f64) -> Result<HighPrecisionValue> {
    let radicand = variance_slope_constant(p, tol, SlopeFormula::GapMoments)?;
    if radicand.upper().is_negative() {
        return Err(Error::NegativeRadicand(format!(
            "{} ± {}",
            radicand.estimate(),
            radicand.error_bound()
        )));
    }
    radicand.sqrt()
}

/// Finite-n variance slope `var(X_n)/(n-1)`: exact rational arithmetic for
/// `n <= EXACT_SLOPE_LIMIT`, the floating recurrence beyond.
pub fn variance_slope(n: usize, p: &Rational) -> Result<f64> {
    variance_slope_with_limit(n, p, EXACT_SLOPE_LIMIT)
}

/// [`variance_slope`] with an explicit exact/float crossover point.
pub fn variance_slope_with_limit(n: usize, p: &Rational, exact_limit: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::NTooSmall { n, min: 2 });
    }
    if n <= exact_limit {
        let table = recurrence::moments(n, p)?;
        Ok(table.variance(n).to_f64() / (n as f64 - 1.0))
    } else {
        let (m1, m2) = recurrence::moments_float(n, p)?;
        Ok((m2[n] - m1[n] * m1[n]) / (n as f64 - 1.0))
    }
}

/// Exact finite-n variance slope for `n` within the rational regime.
pub fn variance_slope_exact(n: usize, p: &Rational) -> Result<Rational> {
    if n < 2 {
        return Err(Error::NTooSmall { n, min: 2 });
    }
    let table = recurrence::moments(n, p)?;
    let denom = Rational::from_integer(n as u64 - 1);
    Ok(table.variance(n) / denom)
}

/// Coefficients of the double pole at `x = 1` of `1 / ((1-x)^2 B(x))` and
/// of the triple pole of `1 / ((1-x)^3 B(x)^2)`, as rational functions of
/// `B(1)`, `B'(1)`, `B''(1)`. The linear growth of `E[X_n]` and the
/// variance slope are read off these.
#[derive(Debug, Clone, Serialize)]
pub struct PoleCoefficients {
    /// `1 / B(1)`: slope of `E[X_n]`.
    pub c2: HighPrecisionValue,
    /// `-B'(1) / B(1)^2`: constant offset of `E[X_n]`.
    pub c1: HighPrecisionValue,
    /// `-1 / B(1)^2`.
    pub d3: HighPrecisionValue,
    /// `2 B'(1) / B(1)^3`.
    pub d2: HighPrecisionValue,
    /// `-3 B'(1)^2 / B(1)^4 + B''(1) / B(1)^3`.
    pub d1: HighPrecisionValue,
}

/// All limit constants for a given `p`, with error bounds.
#[derive(Debug, Clone, Serialize)]
pub struct LimitConstants {
    pub p: Rational,
    pub beta: HighPrecisionValue,
    pub sigma_w: HighPrecisionValue,
    pub b1: HighPrecisionValue,
    pub b1_prime: HighPrecisionValue,
    pub b1_second: HighPrecisionValue,
    pub poles: PoleCoefficients,
}

pub fn limit_constants(p: &Rational, tol: f64) -> Result<LimitConstants> {
    let q = q_of(p)?;
    let b0 = b_series_at_one(&q, 0, tol)?;
    let b1 = b_series_at_one(&q, 1, tol)?;
    let b2 = b_series_at_one(&q, 2, tol)?;
    let beta = b0.recip()?;
    let sigma = sigma_w(p, tol)?;

    let b0_sq = b0.mul(&b0);
    let b0_cube = b0_sq.mul(&b0);
    let b0_fourth = b0_sq.mul(&b0_sq);
    let minus_one = Rational::from_integer(-1);
    let c2 = beta.clone();
    let c1 = b1.div(&b0_sq)?.scale(&minus_one);
    let d3 = b0_sq.recip()?.scale(&minus_one);
    let d2 = b1.scale(&Rational::from_integer(2)).div(&b0_cube)?;
    let d1 = b2.div(&b0_cube)?.sub(
        &b1.mul(&b1)
            .scale(&Rational::from_integer(3))
            .div(&b0_fourth)?,
    );

    Ok(LimitConstants {
        p: p.clone(),
        beta,
        sigma_w: sigma,
        b1: b0,
        b1_prime: b1,
        b1_second: b2,
        poles: PoleCoefficients { c2, c1, d3, d2, d1 },
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Two-sided Kolmogorov statistic of a sorted sample against a CDF.
pub fn kolmogorov_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    sup
}

/// Summary of standardized heaviest-path samples
/// `W = (X_n - beta (n-1)) / (sigma_w sqrt(n-1))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub p: Rational,
    pub sample_count: u64,
    pub seed: u64,
    /// Centering slope used (the limit of the normalized mean).
    pub beta: f64,
    /// Scaling constant used (see [`sigma_w`]).
    pub sigma: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// `max |empirical CDF - normal CDF|` over the standardized sample.
    pub kolmogorov: f64,
}

/// Draw `count` samples of `X_n`, standardize, and report how normal the
/// marginal looks. Rejects `p = 1` (zero variance) and `p = 0`.
pub fn clt_diagnostic(
    n: usize,
    p: &Rational,
    count: u64,
    seed: u64,
    workers: usize,
) -> Result<CltReport> {
    if p.is_zero() || p.is_one() {
        return Err(Error::DegenerateProbability(p.to_string()));
    }
    if count < 2 {
        return Err(Error::EmptySampleCount);
    }
    let beta = beta_tr(p, DEFAULT_TOL)?.to_f64();
    let sigma = sigma_w(p, DEFAULT_TOL)?.to_f64();
    let (_, values) = percolation::sample_with_values(n, p, count, seed, workers)?;

    // exact integer power sums, then central moments in f64
    let (mut s1, mut s2, mut s3) = (0u128, 0u128, 0u128);
    for &x in &values {
        let x = u128::from(x);
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
    }
    let c = count as f64;
    let mean_x = s1 as f64 / c;
    let var_x = ((s2 as f64 - c * mean_x * mean_x) / (c - 1.0)).max(0.0);
    let m3_x = s3 as f64 / c - 3.0 * mean_x * (s2 as f64 / c) + 2.0 * mean_x.powi(3);
    let skewness = if var_x > 0.0 {
        m3_x / (s2 as f64 / c - mean_x * mean_x).powf(1.5)
    } else {
        0.0
    };

    let scale = sigma * (n as f64 - 1.0).sqrt();
    let center = beta * (n as f64 - 1.0);
    let mut w: Vec<f64> = values
        .iter()
        .map(|&x| (f64::from(x) - center) / scale)
        .collect();
    w.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let kolmogorov = kolmogorov_statistic(&w, normal_cdf);

    Ok(CltReport {
        n,
        p: p.clone(),
        sample_count: count,
        seed,
        beta,
        sigma,
        mean: (mean_x - center) / scale,
        variance: var_x / (scale * scale),
        skewness,
        kolmogorov,
    })
}

/// Covariance estimate between the heaviest-path weights of the two halves
/// `[1, m]` and `[m, n]`; their edge sets are disjoint, so the increments
/// should be uncorrelated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoWindowReport {
    pub n: usize,
    pub split: usize,
    pub sample_count: u64,
    pub seed: u64,
    pub mean_first: f64,
    pub mean_second: f64,
    pub covariance: f64,
    pub correlation: f64,
}

pub fn two_window_covariance(
    n: usize,
    p: &Rational,
    count: u64,
    seed: u64,
) -> Result<TwoWindowReport> {
    if n < 4 {
        return Err(Error::NTooSmall { n, min: 4 });
    }
    if count < 2 {
        return Err(Error::EmptySampleCount);
    }
    let m = n / 2;
    let first_nodes = m; // window [1, m]
    let second_nodes = n - m + 1; // window [m, n]
    let (rep_a, values_a) = percolation::sample_with_values(first_nodes, p, count, seed, 1)?;
    let (rep_b, values_b) =
        percolation::sample_with_values(second_nodes, p, count, seed ^ 0x9e3779b97f4a7c15, 1)?;

    let c = count as f64;
    let mut s_ab = 0u128;
    for (&a, &b) in values_a.iter().zip(&values_b) {
        s_ab += u128::from(a) * u128::from(b);
    }
    let cov = (s_ab as f64 - c * rep_a.mean * rep_b.mean) / (c - 1.0);
    let denom = (rep_a.variance * rep_b.variance).sqrt();
    let corr = if denom > 0.0 { cov / denom } else { 0.0 };
    Ok(TwoWindowReport {
        n,
        split: m,
        sample_count: count,
        seed,
        mean_first: rep_a.mean,
        mean_second: rep_b.mean,
        covariance: cov,
        correlation: corr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn beta_at_one_half_has_eleven_digits() {
        let beta = beta_tr(&r("1/2"), 1e-15).unwrap();
        assert!((beta.to_f64() - 0.60914971106).abs() < 1e-11);
        assert!(beta.to_f64() > 0.595 && beta.to_f64() < 0.614);
        assert!(beta.error_bound().to_f64() < 1e-14);
    }

    #[test]
    fn beta_degenerate_endpoints() {
        let one = beta_tr(&r("1"), 1e-12).unwrap();
        assert!(one.estimate().is_one());
        assert!(one.error_bound().is_zero());
        assert!(beta_tr(&r("0"), 1e-12).is_err());
    }

    #[test]
    fn beta_is_monotone_and_dominates_p() {
        let mut prev = 0.0f64;
        for k in 1..=9u64 {
            let p = Rational::new(k, 10u64).unwrap();
            let beta = beta_tr(&p, 1e-15).unwrap().to_f64();
            assert!(beta > prev, "p = {k}/10");
            assert!(beta >= p.to_f64() && beta <= 1.0, "p = {k}/10");
            prev = beta;
        }
    }

    #[test]
    fn beta_times_b_is_one_within_bounds() {
        for p in [r("1/2"), r("1/3"), r("9/10")] {
            let lc = limit_constants(&p, 1e-15).unwrap();
            let prod = lc.beta.mul(&lc.b1);
            let gap = (prod.estimate() - &Rational::one()).abs();
            assert!(gap <= *prod.error_bound(), "p = {p}");
        }
    }

    #[test]
    fn sigma_at_p_one_is_zero() {
        let s = sigma_w(&r("1"), 1e-12).unwrap();
        assert_eq!(s.to_f64(), 0.0);
    }

    #[test]
    fn sigma_radicand_positive_inside_unit_interval() {
        for p in [r("1/10"), r("1/2"), r("3/4"), r("99/100")] {
            let rad = variance_slope_constant(&p, 1e-15, SlopeFormula::GapMoments).unwrap();
            assert!(!rad.lower().is_negative(), "p = {p}");
            assert!(sigma_w(&p, 1e-15).unwrap().to_f64() > 0.0, "p = {p}");
        }
    }

    #[test]
    fn slope_small_cases_are_exact() {
        assert_eq!(variance_slope_exact(3, &r("1/2")).unwrap(), r("23/128"));
        let p = r("2/5");
        assert_eq!(variance_slope_exact(2, &p).unwrap(), r("6/25")); // p(1-p)
        assert!(variance_slope(1, &p).is_err());
    }

    #[test]
    fn slope_paths_agree_at_the_crossover() {
        let p = r("1/2");
        let exact_side = variance_slope(EXACT_SLOPE_LIMIT, &p).unwrap();
        let float_side = variance_slope(EXACT_SLOPE_LIMIT + 1, &p).unwrap();
        assert!((exact_side - float_side).abs() < 1e-3);
        // and the float path at the same n agrees with the exact one
        let (m1, m2) = recurrence::moments_float(EXACT_SLOPE_LIMIT, &p).unwrap();
        let float_same = (m2[EXACT_SLOPE_LIMIT] - m1[EXACT_SLOPE_LIMIT].powi(2))
            / (EXACT_SLOPE_LIMIT - 1) as f64;
        assert!((exact_side - float_same).abs() < 1e-9);
    }

    #[test]
    fn gap_moment_constant_matches_exact_slope() {
        // the adjudication in miniature: exact slope at n=400 vs the three forms
        let p = r("1/2");
        let slope = variance_slope(400, &p).unwrap();
        let gap = variance_slope_constant(&p, 1e-15, SlopeFormula::GapMoments)
            .unwrap()
            .to_f64();
        assert!((slope - gap).abs() / gap < 0.01, "slope {slope} vs {gap}");
        let sigma = sigma_w(&p, 1e-15).unwrap().to_f64();
        assert!((sigma * sigma - slope).abs() < 1e-3);
        assert!((sigma - slope.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn normal_cdf_sanity() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-9);
        assert!(normal_cdf(-8.0) < 1e-14);
    }

    #[test]
    fn kolmogorov_statistic_detects_fit_and_misfit() {
        // perfect normal quantiles: tiny statistic
        let n = 1000;
        let quantiles: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                // crude inverse via bisection on normal_cdf
                let (mut lo, mut hi) = (-10.0f64, 10.0f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        assert!(kolmogorov_statistic(&quantiles, normal_cdf) < 0.002);
        // uniform[0,1] data against a normal: way off
        let uniform: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        assert!(kolmogorov_statistic(&uniform, normal_cdf) > 0.3);
    }

    #[test]
    fn clt_diagnostic_midsize() {
        let report = clt_diagnostic(120, &r("1/2"), 2000, 5, 1).unwrap();
        assert!(report.variance > 0.8 && report.variance < 1.2, "{report:?}");
        assert!(report.kolmogorov < 0.1, "{report:?}");
        assert!(report.mean.abs() < 0.2, "{report:?}");
    }

    #[test]
    fn clt_rejects_degenerate_p() {
        assert!(clt_diagnostic(10, &r("1"), 100, 0, 1).is_err());
        assert!(clt_diagnostic(10, &r("0"), 100, 0, 1).is_err());
    }

    #[test]
    fn half_windows_are_uncorrelated() {
        let report = two_window_covariance(60, &r("1/2"), 4000, 9).unwrap();
        assert!(report.correlation.abs() < 0.08, "{report:?}");
    }

    #[test]
    fn limit_constants_serialize() {
        let lc = limit_constants(&r("1/2"), 1e-15).unwrap();
        let json = serde_json::to_string(&lc).unwrap();
        assert!(json.contains("\"beta\""));
        assert!(json.contains("\"err\""));
        assert!(json.contains("\"d1\""));
    }
}
