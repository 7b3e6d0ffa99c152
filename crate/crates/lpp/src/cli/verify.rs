//! Cross-oracle verification: the same quantities computed along
//! independent routes must agree exactly.
//!
//! Routes compared:
//! - law of `X_n`: gap recurrence vs exhaustive enumeration;
//! - mean: series coefficient of `G` vs recurrence vs composition sums;
//! - PGF: bivariate series coefficient vs recurrence polynomial;
//! - q-series: the shift identity `1 + x B(x) = A(x)`;
//! - structure: PGF mass/derivative and closed-form endpoint probabilities.
//!
//! `defect` deliberately corrupts one computed coefficient on one side of
//! one comparison; it exists so tests can demonstrate the suite actually
//! bites. A correct build passes every check with `defect = None`.

use crate::error::Result;
use crate::numerics::{binomial2, Rational};
use crate::percolation::BruteForceCounts;
use crate::recurrence::Recurrence;
use crate::series;

/// Sites at which a deliberate single-coefficient corruption is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Defect {
    /// Scale one coefficient of the `B` series.
    SeriesBCoefficient,
    /// Shift one recurrence mean.
    GapProbability,
    /// Shift one composition-sum value.
    CompositionSign,
    /// Shift one endpoint probability.
    EndpointProbability,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Largest n compared against the exhaustive oracle (capped at 8).
    pub n_max: usize,
    /// Largest n for the series-vs-recurrence mean comparison.
    pub g_max: usize,
    /// Largest n for the bivariate-vs-PGF comparison.
    pub z_max: usize,
    /// Largest n re-derived through composition enumeration.
    pub comp_max: usize,
    /// Truncation order for the shift identity.
    pub order: usize,
    pub p_list: Vec<Rational>,
    pub defect: Option<Defect>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 6,
            g_max: 20,
            z_max: 20,
            comp_max: 12,
            order: 128,
            p_list: ["1/2", "1/3", "3/4"]
                .iter()
                .map(|s| s.parse().unwrap())
                .collect(),
            defect: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: &'static str, detail: String) -> Self {
        Check {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Check {
            name,
            passed: false,
            detail,
        }
    }
}

fn nudged(x: &Rational) -> Rational {
    x + Rational::new(1, 1_000_003u64).unwrap()
}

/// Run every cross-check; one [`Check`] per family.
pub fn run_verify(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    Ok(vec![
        identity_shift(cfg),
        oracle_brute_force(cfg)?,
        series_mean(cfg)?,
        composition_sums(cfg)?,
        bivariate_pgf(cfg)?,
        pgf_structure(cfg)?,
        endpoint_probabilities(cfg)?,
    ])
}

/// `1 + x B(x) = A(x)` coefficientwise.
fn identity_shift(cfg: &VerifyConfig) -> Check {
    const NAME: &str = "identity-shift";
    let order = cfg.order.max(1);
    for p in &cfg.p_list {
        let q = Rational::one() - p;
        let a = series::series_a(&q, order);
        let mut b = series::series_b(&q, order - 1);
        if cfg.defect == Some(Defect::SeriesBCoefficient) {
            let mut coeffs = b.coeffs().to_vec();
            coeffs[2] = nudged(&coeffs[2]);
            b = series::TruncatedSeries::from_coeffs(coeffs);
        }
        let lhs = b
            .shift_up(1)
            .add(&series::TruncatedSeries::constant(Rational::one(), order));
        if lhs != a {
            return Check::fail(NAME, format!("1 + x*B != A at order {order} for p={p}"));
        }
    }
    Check::pass(
        NAME,
        format!("order {order} x {} probabilities", cfg.p_list.len()),
    )
}

/// Recurrence law vs exhaustive enumeration.
fn oracle_brute_force(cfg: &VerifyConfig) -> Result<Check> {
    const NAME: &str = "oracle-brute-force";
    let top = cfg.n_max.min(crate::percolation::BRUTE_FORCE_MAX_NODES);
    for n in 2..=top {
        let counts = BruteForceCounts::enumerate(n)?;
        for p in &cfg.p_list {
            let exact = Recurrence::new(p)?.distribution(n)?;
            let brute = counts.distribution(p)?;
            if exact != brute {
                return Ok(Check::fail(NAME, format!("law mismatch at n={n}, p={p}")));
            }
        }
    }
    Ok(Check::pass(NAME, format!("n <= {top}")))
}

/// `[x^n] G = 1 + E[X_n]`.
fn series_mean(cfg: &VerifyConfig) -> Result<Check> {
    const NAME: &str = "series-mean";
    for p in &cfg.p_list {
        let q = Rational::one() - p;
        let g = series::series_g(&q, cfg.g_max);
        let mut rec = Recurrence::new(p)?;
        for n in 0..=cfg.g_max {
            let mut mean = rec.expected_weight(n);
            if cfg.defect == Some(Defect::GapProbability) && n == 3 {
                mean = nudged(&mean);
            }
            if g.coeffs()[n] != Rational::one() + &mean {
                return Ok(Check::fail(
                    NAME,
                    format!("[x^{n}] G != 1 + E[X_{n}] for p={p}"),
                ));
            }
        }
    }
    Ok(Check::pass(NAME, format!("n <= {}", cfg.g_max)))
}

/// Composition sums vs series coefficients, both `h` and `g` (both forms).
fn composition_sums(cfg: &VerifyConfig) -> Result<Check> {
    const NAME: &str = "composition-sums";
    let limit = cfg.comp_max.max(series::DEFAULT_COMPOSITION_LIMIT);
    for p in &cfg.p_list {
        let q = Rational::one() - p;
        let h = series::series_h(&q, cfg.comp_max);
        let g = series::series_g(&q, cfg.comp_max);
        for n in 0..=cfg.comp_max {
            let mut h_comp = series::h_by_compositions(n, &q, limit)?;
            if cfg.defect == Some(Defect::CompositionSign) && n == 3 {
                h_comp = nudged(&h_comp);
            }
            if h_comp != h.coeffs()[n] {
                return Ok(Check::fail(
                    NAME,
                    format!("h_{n} by compositions != [x^{n}] (1/B) for p={p}"),
                ));
            }
            let g_comp = series::g_by_compositions(n, &q, limit)?;
            let g_tri = series::g_by_compositions_triangular(n, &q, limit)?;
            if g_comp != g.coeffs()[n] || g_tri != g_comp {
                return Ok(Check::fail(
                    NAME,
                    format!("g({n}) composition forms disagree for p={p}"),
                ));
            }
        }
    }
    Ok(Check::pass(NAME, format!("n <= {}", cfg.comp_max)))
}

/// `[x^n] Z(x, t)` vs the recurrence PGF, as exact polynomials.
fn bivariate_pgf(cfg: &VerifyConfig) -> Result<Check> {
    const NAME: &str = "bivariate-pgf";
    for p in &cfg.p_list {
        let q = Rational::one() - p;
        let z = series::series_z(&q, cfg.z_max);
        let mut rec = Recurrence::new(p)?;
        for n in 1..=cfg.z_max {
            if z.coeff(n).unwrap() != &rec.pgf(n)? {
                return Ok(Check::fail(
                    NAME,
                    format!("[x^{n}] Z != PGF of X_{n} for p={p}"),
                ));
            }
        }
    }
    Ok(Check::pass(NAME, format!("n <= {}", cfg.z_max)))
}

/// PGF mass is 1 and its derivative at 1 is the mean.
fn pgf_structure(cfg: &VerifyConfig) -> Result<Check> {
    const NAME: &str = "pgf-structure";
    for p in &cfg.p_list {
        let mut rec = Recurrence::new(p)?;
        for n in 1..=cfg.g_max {
            let pgf = rec.pgf(n)?;
            if !pgf.eval_one().is_one() {
                return Ok(Check::fail(NAME, format!("mass != 1 at n={n}, p={p}")));
            }
            if pgf.derivative_eval_one() != rec.expected_weight(n) {
                return Ok(Check::fail(
                    NAME,
                    format!("PGF derivative != mean at n={n}, p={p}"),
                ));
            }
        }
    }
    Ok(Check::pass(NAME, format!("n <= {}", cfg.g_max)))
}

/// `P(X_n = 0) = q^C(n,2)` and `P(X_n = n-1) = p^(n-1)`.
fn endpoint_probabilities(cfg: &VerifyConfig) -> Result<Check> {
    const NAME: &str = "endpoint-probabilities";
    for p in &cfg.p_list {
        let q = Rational::one() - p;
        let mut rec = Recurrence::new(p)?;
        for n in 1..=cfg.g_max {
            let dist = rec.distribution(n)?;
            let mut zero_prob = dist.probs[0].clone();
            if cfg.defect == Some(Defect::EndpointProbability) && n == 4 {
                zero_prob = nudged(&zero_prob);
            }
            if zero_prob != q.pow(binomial2(n as u64) as u32) {
                return Ok(Check::fail(
                    NAME,
                    format!("P(X_{n}=0) != q^C(n,2) for p={p}"),
                ));
            }
            if dist.probs[n - 1] != p.pow(n as u32 - 1) {
                return Ok(Check::fail(
                    NAME,
                    format!("P(X_{n}={}) != p^{} for p={p}", n - 1, n - 1),
                ));
            }
        }
    }
    Ok(Check::pass(NAME, format!("n <= {}", cfg.g_max)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes_every_check() {
        let cfg = VerifyConfig {
            n_max: 5,
            g_max: 10,
            z_max: 10,
            comp_max: 8,
            order: 40,
            ..VerifyConfig::default()
        };
        let checks = run_verify(&cfg).unwrap();
        assert_eq!(checks.len(), 7);
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn every_defect_site_is_caught() {
        for defect in [
            Defect::SeriesBCoefficient,
            Defect::GapProbability,
            Defect::CompositionSign,
            Defect::EndpointProbability,
        ] {
            let cfg = VerifyConfig {
                n_max: 4,
                g_max: 8,
                z_max: 6,
                comp_max: 6,
                order: 24,
                defect: Some(defect),
                ..VerifyConfig::default()
            };
            let checks = run_verify(&cfg).unwrap();
            assert!(
                checks.iter().any(|c| !c.passed),
                "defect {defect:?} went undetected"
            );
        }
    }
}
