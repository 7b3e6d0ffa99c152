//! Cross-module invariant battery: the deeper comparisons that tie the
//! recurrence, series, composition, and sampling routes together beyond
//! the per-module unit tests.

use tournament_lpp::asymptotics::beta_tr;
use tournament_lpp::numerics::{binomial2, Rational};
use tournament_lpp::percolation::BruteForceCounts;
use tournament_lpp::recurrence::{self, Recurrence};
use tournament_lpp::series;

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

#[test]
fn pgf_battery_to_n64() {
    for p in [r("1/2"), r("1/3"), r("3/4")] {
        let mut rec = Recurrence::new(&p).unwrap();
        let table = rec.moments(64);
        for n in 1..=64usize {
            let pgf = rec.pgf(n).unwrap();
            assert!(pgf.eval_one().is_one(), "mass at n={n}, p={p}");
            assert_eq!(
                pgf.derivative_eval_one(),
                table.m1[n],
                "derivative at n={n}, p={p}"
            );
        }
    }
}

#[test]
fn endpoint_probabilities_to_n20() {
    for p in [r("1/2"), r("1/3"), r("3/4")] {
        let q = Rational::one() - &p;
        let mut rec = Recurrence::new(&p).unwrap();
        for n in 1..=20usize {
            let dist = rec.distribution(n).unwrap();
            assert_eq!(dist.probs[0], q.pow(binomial2(n as u64) as u32), "n={n}");
            assert_eq!(dist.probs[n - 1], p.pow(n as u32 - 1), "n={n}");
            dist.validate(&p).unwrap();
        }
    }
}

#[test]
fn brute_force_matches_recurrence_at_n7() {
    let counts = BruteForceCounts::enumerate(7).unwrap();
    for p in [r("1/2"), r("2/5")] {
        let brute = counts.distribution(&p).unwrap();
        let exact = recurrence::distribution(7, &p).unwrap();
        assert_eq!(brute, exact, "p = {p}");
    }
}

#[test]
fn mean_increments_to_n64_exact_and_n400_float() {
    for p in [r("1/2"), r("1/3")] {
        let table = recurrence::moments(64, &p).unwrap();
        for n in 0..64 {
            let inc = &table.m1[n + 1] - &table.m1[n];
            assert!(!inc.is_negative() && inc <= Rational::one(), "n={n}");
        }
        let (m1f, _) = recurrence::moments_float(400, &p).unwrap();
        for n in 2..400 {
            let inc = m1f[n + 1] - m1f[n];
            assert!((-1e-12..=1.0 + 1e-12).contains(&inc), "n={n}, inc={inc}");
        }
    }
}

#[test]
fn float_and_exact_moments_agree_to_n64() {
    for p in [r("1/2"), r("1/3"), r("3/4")] {
        let table = recurrence::moments(64, &p).unwrap();
        let (m1f, m2f) = recurrence::moments_float(64, &p).unwrap();
        for n in 2..=64usize {
            let e1 = table.m1[n].to_f64();
            let e2 = table.m2[n].to_f64();
            assert!((m1f[n] - e1).abs() / e1.max(1.0) < 1e-10, "m1 n={n} p={p}");
            assert!((m2f[n] - e2).abs() / e2.max(1.0) < 1e-10, "m2 n={n} p={p}");
        }
    }
}

#[test]
fn normalized_mean_error_shrinks_with_n() {
    for p in [r("1/2"), r("1/3")] {
        let beta = beta_tr(&p, 1e-15).unwrap().to_f64();
        let (m1f, _) = recurrence::moments_float(400, &p).unwrap();
        let mut prev = f64::INFINITY;
        for n in [50usize, 100, 200, 400] {
            let err = (m1f[n] / (n as f64 - 1.0) - beta).abs();
            assert!(err < prev, "error not decreasing at n={n}, p={p}");
            prev = err;
        }
    }
}

#[test]
fn h_series_and_compositions_to_n16() {
    for p in [r("1/2"), r("1/3")] {
        let q = Rational::one() - &p;
        let h = series::series_h(&q, 16);
        for n in 0..=16usize {
            assert_eq!(h_by_comp(n, &q), h.coeffs()[n].clone(), "n = {n}, p = {p}");
        }
    }
}

fn h_by_comp(n: usize, q: &Rational) -> Rational {
    series::h_by_compositions(n, q, 24).unwrap()
}

#[test]
fn sampled_mean_matches_exact_mean() {
    let p = r("1/3");
    let exact = recurrence::expected_weight(6, &p).unwrap().to_f64();
    let report = tournament_lpp::percolation::sample(6, &p, 200_000, 31, 1).unwrap();
    assert!(
        (report.mean - exact).abs() < 5.0 * report.stderr,
        "sampled {} vs exact {exact} (stderr {})",
        report.mean,
        report.stderr
    );
}

#[test]
fn series_g_equals_float_means_at_larger_order() {
    // the series route in exact arithmetic vs the float recurrence, n <= 80
    let q = r("1/2");
    let g = series::series_g(&q, 80);
    let (m1f, _) = recurrence::moments_float(80, &r("1/2")).unwrap();
    for (n, (coeff, float_mean)) in g.coeffs().iter().zip(&m1f).enumerate().skip(1) {
        let exact = coeff.to_f64() - 1.0;
        assert!(
            (exact - float_mean).abs() < 1e-9 * float_mean.max(1.0),
            "n = {n}: {exact} vs {float_mean}"
        );
    }
}
