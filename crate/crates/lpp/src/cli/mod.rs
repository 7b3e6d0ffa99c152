//! Command-line front end. Every library operation maps to a subcommand;
//! output is machine-readable (`--format json|csv|table`).
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.
//! Rationals cross this boundary as `a/b` strings; floats as shortest
//! round-trip decimals. `LPP_TOL` and `LPP_WORKERS` override the default
//! series tolerance and worker count.

pub mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{self, SlopeFormula};
use crate::error::Result;
use crate::numerics::{parse_probability, Rational, MAX_REPORTED_FRACTION_DIGITS};
use crate::percolation;
use crate::recurrence;
use crate::series;
use verify::{Defect, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "lpp",
    version,
    about = "Heaviest paths in Bernoulli-weighted transitive tournaments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesKind {
    A,
    B,
    G,
    H,
    Z,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormulaArg {
    /// var(G)/E[G]^3 in B-values; matches the exact variance slope.
    GapMoments,
    /// B^-2 (1 + 6B'/B - B), kept for comparison.
    AltSixBprime,
    /// B^-2 (1 - 2B'/B^3), kept for comparison.
    AltTwoBprimeCubed,
}

impl From<FormulaArg> for SlopeFormula {
    fn from(f: FormulaArg) -> SlopeFormula {
        match f {
            FormulaArg::GapMoments => SlopeFormula::GapMoments,
            FormulaArg::AltSixBprime => SlopeFormula::AltSixBPrime,
            FormulaArg::AltTwoBprimeCubed => SlopeFormula::AltTwoBPrimeCubed,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DefectArg {
    SeriesB,
    Gap,
    Composition,
    Endpoint,
}

impl From<DefectArg> for Defect {
    fn from(d: DefectArg) -> Defect {
        match d {
            DefectArg::SeriesB => Defect::SeriesBCoefficient,
            DefectArg::Gap => Defect::GapProbability,
            DefectArg::Composition => Defect::CompositionSign,
            DefectArg::Endpoint => Defect::EndpointProbability,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact expected heaviest-path weight E[X_n]
    Exact {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Exact law of X_n over {0, ..., n-1}
    Dist {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Probability generating function E[t^X_n] as an exact polynomial
    Pgf {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// First and second moments of X_n for n = 0..=n_max
    Moments {
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        /// Use the floating recurrence (for n_max beyond the exact regime)
        #[arg(long)]
        float: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Coefficients of a q-series (q = 1 - p) through a given order
    Series {
        #[arg(long, value_enum)]
        kind: SeriesKind,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// h_n and g(n) by explicit composition enumeration (2^(n-1) tuples)
    Compositions {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        /// Enumeration cap; raise deliberately for n > 24
        #[arg(long, default_value_t = series::DEFAULT_COMPOSITION_LIMIT)]
        limit: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Limit constant beta(p) of X_n / (n-1)
    Beta {
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long, env = "LPP_TOL")]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// CLT scaling constant sigma_w (and alternate closed forms)
    Sigma {
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long, env = "LPP_TOL")]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "gap-moments")]
        formula: FormulaArg,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Finite-n variance slope var(X_n)/(n-1) and the three closed forms
    Varslope {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long, env = "LPP_TOL")]
        tol: Option<f64>,
        /// Largest n computed with exact rationals (float recurrence beyond)
        #[arg(long, default_value_t = asymptotics::EXACT_SLOPE_LIMIT)]
        exact_limit: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Monte Carlo estimate of E[X_n] with deterministic substreams
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long)]
        count: u64,
        /// Omitted: drawn from entropy and reported for replay
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "LPP_WORKERS")]
        workers: Option<usize>,
        /// Also write per-sample values as CSV to this path
        #[arg(long)]
        samples_out: Option<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Exhaustive brute-force law of X_n (n <= 8)
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Standardized-sample normality diagnostics at t = 1
    Clt {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_probability)]
        p: Rational,
        #[arg(long)]
        count: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "LPP_WORKERS")]
        workers: Option<usize>,
        /// Also estimate the covariance of the two half-window weights
        #[arg(long)]
        two_window: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Cross-oracle verification suite; exits 1 on any mismatch
    Verify {
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 20)]
        g_max: usize,
        #[arg(long, default_value_t = 20)]
        z_max: usize,
        #[arg(long, default_value_t = 12)]
        comp_max: usize,
        #[arg(long, default_value_t = 128)]
        order: usize,
        /// Probabilities to verify at (repeatable)
        #[arg(long = "p", value_parser = parse_probability)]
        p_list: Vec<Rational>,
        /// Deliberately corrupt one coefficient (test hook)
        #[arg(long, value_enum, hide = true)]
        defect: Option<DefectArg>,
    },
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    let rendered = e.to_string();
                    eprintln!("{}", rendered.lines().next().unwrap_or("usage error"));
                    2
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn tol_or_default(tol: Option<f64>) -> f64 {
    tol.unwrap_or(asymptotics::DEFAULT_TOL)
}

fn workers_or_default(workers: Option<usize>) -> usize {
    workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string(v).expect("serializable"));
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Exact { n, p, format } => {
            let value = recurrence::expected_weight(n, &p)?;
            match format {
                Format::Table => println!("{value}"),
                Format::Json => print_json(&json!({
                    "n": n, "p": p, "expected_weight": value,
                })),
                Format::Csv => {
                    println!("n,p,expected_weight");
                    println!("{n},{p},{value}");
                }
            }
            Ok(0)
        }
        Command::Dist { n, p, format } => {
            emit_distribution(&recurrence::distribution(n, &p)?, format);
            Ok(0)
        }
        Command::Oracle { n, p, format } => {
            emit_distribution(&percolation::brute_force_distribution(n, &p)?, format);
            Ok(0)
        }
        Command::Pgf { n, p, format } => {
            let pgf = recurrence::pgf(n, &p)?;
            match format {
                Format::Table => println!("{pgf}"),
                Format::Json => print_json(&json!({
                    "n": n, "p": p, "coeffs": pgf.coeffs(),
                })),
                Format::Csv => {
                    println!("degree,coefficient");
                    for (k, c) in pgf.coeffs().iter().enumerate() {
                        println!("{k},{c}");
                    }
                }
            }
            Ok(0)
        }
        Command::Moments {
            n_max,
            p,
            float,
            format,
        } => {
            if float {
                let (m1, m2) = recurrence::moments_float(n_max, &p)?;
                emit_moment_rows(
                    format,
                    (0..=n_max).map(|n| {
                        let var = m2[n] - m1[n] * m1[n];
                        (n, m1[n].to_string(), m2[n].to_string(), var.to_string())
                    }),
                );
            } else {
                let table = recurrence::moments(n_max, &p)?;
                emit_moment_rows(
                    format,
                    (0..=n_max).map(|n| {
                        (
                            n,
                            table.m1[n].to_string(),
                            table.m2[n].to_string(),
                            table.variance(n).to_string(),
                        )
                    }),
                );
            }
            Ok(0)
        }
        Command::Series {
            kind,
            p,
            order,
            format,
        } => {
            let q = Rational::one() - &p;
            if kind == SeriesKind::Z {
                let z = series::series_z(&q, order);
                let coeffs: Vec<Vec<Rational>> = z
                    .coeffs()
                    .iter()
                    .map(|poly| poly.coeffs().to_vec())
                    .collect();
                match format {
                    Format::Json => print_json(&json!({ "order": order, "coeffs": coeffs })),
                    Format::Table => {
                        for (n, poly) in z.coeffs().iter().enumerate() {
                            println!("{n}: {poly}");
                        }
                    }
                    Format::Csv => {
                        println!("n,degree,coefficient");
                        for (n, poly) in coeffs.iter().enumerate() {
                            for (k, c) in poly.iter().enumerate() {
                                println!("{n},{k},{c}");
                            }
                        }
                    }
                }
                return Ok(0);
            }
            let s = match kind {
                SeriesKind::A => series::series_a(&q, order),
                SeriesKind::B => series::series_b(&q, order),
                SeriesKind::G => series::series_g(&q, order),
                SeriesKind::H => series::series_h(&q, order),
                SeriesKind::Z => unreachable!(),
            };
            match format {
                Format::Json => print_json(&json!({ "order": order, "coeffs": s.coeffs() })),
                Format::Table => {
                    for (n, c) in s.coeffs().iter().enumerate() {
                        println!("{n}: {c}");
                    }
                }
                Format::Csv => {
                    println!("n,coefficient");
                    for (n, c) in s.coeffs().iter().enumerate() {
                        println!("{n},{c}");
                    }
                }
            }
            Ok(0)
        }
        Command::Compositions {
            n,
            p,
            limit,
            format,
        } => {
            let q = Rational::one() - &p;
            let h = series::h_by_compositions(n, &q, limit)?;
            let g = series::g_by_compositions(n, &q, limit)?;
            let g_tri = series::g_by_compositions_triangular(n, &q, limit)?;
            let count: u64 = if n == 0 { 1 } else { 1 << (n - 1) };
            match format {
                Format::Table => {
                    println!("compositions of {n}: {count}");
                    println!("h_{n} = {h}");
                    println!("g({n}) = {g}");
                    println!("g({n}) (triangular form) = {g_tri}");
                }
                Format::Json => print_json(&json!({
                    "n": n, "p": p, "count": count,
                    "h": h, "g": g, "g_triangular": g_tri,
                })),
                Format::Csv => {
                    println!("n,count,h,g,g_triangular");
                    println!("{n},{count},{h},{g},{g_tri}");
                }
            }
            Ok(0)
        }
        Command::Beta { p, tol, format } => {
            let tol = tol_or_default(tol);
            let beta = asymptotics::beta_tr(&p, tol)?;
            match format {
                Format::Table => println!("{}", beta.decimal(MAX_REPORTED_FRACTION_DIGITS)),
                Format::Json => print_json(&json!({ "p": p, "tol": tol, "beta": beta })),
                Format::Csv => {
                    println!("p,tol,beta,err");
                    println!(
                        "{p},{tol},{},{:e}",
                        beta.decimal(MAX_REPORTED_FRACTION_DIGITS),
                        beta.error_f64()
                    );
                }
            }
            Ok(0)
        }
        Command::Sigma {
            p,
            tol,
            formula,
            format,
        } => {
            let tol = tol_or_default(tol);
            let slope_formula: SlopeFormula = formula.into();
            let constant = asymptotics::variance_slope_constant(&p, tol, slope_formula)?;
            let sigma = if slope_formula == SlopeFormula::GapMoments {
                Some(asymptotics::sigma_w(&p, tol)?)
            } else {
                constant.sqrt().ok()
            };
            match format {
                Format::Table => {
                    println!(
                        "variance constant ({}) = {}",
                        slope_formula.name(),
                        constant.decimal(MAX_REPORTED_FRACTION_DIGITS)
                    );
                    match &sigma {
                        Some(s) => {
                            println!("sigma = {}", s.decimal(MAX_REPORTED_FRACTION_DIGITS))
                        }
                        None => println!("sigma undefined (negative radicand)"),
                    }
                }
                Format::Json => print_json(&json!({
                    "p": p, "tol": tol, "formula": slope_formula.name(),
                    "variance_constant": constant, "sigma": sigma,
                })),
                Format::Csv => {
                    println!("p,formula,variance_constant,sigma");
                    println!(
                        "{p},{},{},{}",
                        slope_formula.name(),
                        constant.decimal(MAX_REPORTED_FRACTION_DIGITS),
                        sigma
                            .as_ref()
                            .map(|s| s.decimal(MAX_REPORTED_FRACTION_DIGITS))
                            .unwrap_or_default()
                    );
                }
            }
            Ok(0)
        }
        Command::Varslope {
            n,
            p,
            tol,
            exact_limit,
            format,
        } => {
            let tol = tol_or_default(tol);
            let slope = asymptotics::variance_slope_with_limit(n, &p, exact_limit)?;
            let rows: Vec<(String, f64, f64)> = SlopeFormula::ALL
                .iter()
                .map(|&f| {
                    let c = asymptotics::variance_slope_constant(&p, tol, f)
                        .map(|v| v.to_f64())
                        .unwrap_or(f64::NAN);
                    (f.name().to_string(), c, (slope - c).abs() / c.abs())
                })
                .collect();
            match format {
                Format::Table => {
                    println!("var(X_n)/(n-1) at n={n}: {slope}");
                    for (name, c, rel) in &rows {
                        println!("{name}: {c} (relative gap {rel:.4})");
                    }
                }
                Format::Json => print_json(&json!({
                    "n": n, "p": p, "slope": slope,
                    "formulas": rows.iter().map(|(name, c, rel)| json!({
                        "formula": name, "constant": c, "relative_gap": rel,
                    })).collect::<Vec<_>>(),
                })),
                Format::Csv => {
                    println!("n,p,slope,formula,constant,relative_gap");
                    for (name, c, rel) in &rows {
                        println!("{n},{p},{slope},{name},{c},{rel}");
                    }
                }
            }
            Ok(0)
        }
        Command::Simulate {
            n,
            p,
            count,
            seed,
            workers,
            samples_out,
            format,
        } => {
            let seed = seed.unwrap_or_else(rand::random);
            let workers = workers_or_default(workers);
            let report = if let Some(path) = samples_out {
                let (report, values) =
                    percolation::sample_with_values(n, &p, count, seed, workers)?;
                let mut file = File::create(&path)?;
                writeln!(file, "index,x")?;
                for (i, x) in values.iter().enumerate() {
                    writeln!(file, "{i},{x}")?;
                }
                report
            } else {
                percolation::sample(n, &p, count, seed, workers)?
            };
            match format {
                Format::Table => {
                    println!("n: {}", report.n);
                    println!("p: {}", report.p);
                    println!("samples: {}", report.sample_count);
                    println!("seed: {}", report.seed);
                    println!("substreams: {}", report.substreams);
                    println!("mean: {}", report.mean);
                    println!("variance: {}", report.variance);
                    println!("stderr: {}", report.stderr);
                    println!("normalized_mean: {}", report.normalized_mean);
                }
                Format::Json => print_json(&report),
                Format::Csv => {
                    println!("n,p,samples,seed,substreams,mean,variance,stderr,normalized_mean");
                    println!(
                        "{},{},{},{},{},{},{},{},{}",
                        report.n,
                        report.p,
                        report.sample_count,
                        report.seed,
                        report.substreams,
                        report.mean,
                        report.variance,
                        report.stderr,
                        report.normalized_mean
                    );
                }
            }
            Ok(0)
        }
        Command::Clt {
            n,
            p,
            count,
            seed,
            workers,
            two_window,
            format,
        } => {
            let seed = seed.unwrap_or_else(rand::random);
            let workers = workers_or_default(workers);
            let report = asymptotics::clt_diagnostic(n, &p, count, seed, workers)?;
            let window = if two_window {
                Some(asymptotics::two_window_covariance(n, &p, count, seed)?)
            } else {
                None
            };
            match format {
                Format::Table => {
                    println!("n: {}", report.n);
                    println!("p: {}", report.p);
                    println!("samples: {}", report.sample_count);
                    println!("seed: {}", report.seed);
                    println!("beta: {}", report.beta);
                    println!("sigma: {}", report.sigma);
                    println!("standardized mean: {}", report.mean);
                    println!("standardized variance: {}", report.variance);
                    println!("skewness: {}", report.skewness);
                    println!("kolmogorov: {}", report.kolmogorov);
                    if let Some(w) = &window {
                        println!("two-window covariance: {}", w.covariance);
                        println!("two-window correlation: {}", w.correlation);
                    }
                }
                Format::Json => print_json(&json!({
                    "clt": report, "two_window": window,
                })),
                Format::Csv => {
                    println!("n,p,samples,seed,mean,variance,skewness,kolmogorov");
                    println!(
                        "{},{},{},{},{},{},{},{}",
                        report.n,
                        report.p,
                        report.sample_count,
                        report.seed,
                        report.mean,
                        report.variance,
                        report.skewness,
                        report.kolmogorov
                    );
                }
            }
            Ok(0)
        }
        Command::Verify {
            n_max,
            g_max,
            z_max,
            comp_max,
            order,
            p_list,
            defect,
        } => {
            let mut cfg = VerifyConfig {
                n_max,
                g_max,
                z_max,
                comp_max,
                order,
                defect: defect.map(Into::into),
                ..VerifyConfig::default()
            };
            if !p_list.is_empty() {
                cfg.p_list = p_list;
            }
            let checks = verify::run_verify(&cfg)?;
            let mut failed = false;
            for check in &checks {
                if check.passed {
                    println!("ok   {} ({})", check.name, check.detail);
                } else {
                    failed = true;
                    println!("FAIL {}: {}", check.name, check.detail);
                }
            }
            Ok(if failed { 1 } else { 0 })
        }
    }
}

fn emit_distribution(dist: &crate::recurrence::WeightDistribution, format: Format) {
    match format {
        Format::Table => {
            let parts: Vec<String> = dist.probs.iter().map(|q| q.to_string()).collect();
            println!("{}", parts.join(", "));
        }
        Format::Json => print_json(dist),
        Format::Csv => {
            println!("weight,probability");
            for (k, q) in dist.probs.iter().enumerate() {
                println!("{k},{q}");
            }
        }
    }
}

fn emit_moment_rows(format: Format, rows: impl Iterator<Item = (usize, String, String, String)>) {
    match format {
        Format::Table => {
            println!("n\tm1\tm2\tvariance");
            for (n, m1, m2, var) in rows {
                println!("{n}\t{m1}\t{m2}\t{var}");
            }
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .map(|(n, m1, m2, var)| json!({ "n": n, "m1": m1, "m2": m2, "variance": var }))
                .collect();
            print_json(&rows);
        }
        Format::Csv => {
            println!("n,m1,m2,variance");
            for (n, m1, m2, var) in rows {
                println!("{n},{m1},{m2},{var}");
            }
        }
    }
}
