//! Probabilistic ground truth: weight sampling on transitive tournaments,
//! O(n^2) heaviest-path dynamic programming, exhaustive enumeration for
//! small n, and a reproducible Monte Carlo estimator.
//!
//! Reproducibility contract: the sampler splits the requested count into
//! fixed-size logical substreams of [`SAMPLES_PER_SUBSTREAM`] draws
//! (remainder on the last). Substream `s` uses a ChaCha8 generator seeded
//! with the user seed on ChaCha's documented independent stream `s`.
//! Worker threads only decide who executes which substream; per-substream
//! tallies are exact integers combined in substream order, so results are
//! bit-identical across runs *and* across worker counts.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_probability, Rational};
use crate::recurrence::WeightDistribution;

/// Largest node count accepted by the exhaustive oracle (2^C(n,2) masks;
/// n = 8 means 2^28 assignments and is allowed but slow).
pub const BRUTE_FORCE_MAX_NODES: usize = 8;

/// Samples per logical RNG substream; fixed so that the partition of a
/// request into substreams is independent of the worker count.
pub const SAMPLES_PER_SUBSTREAM: u64 = 256;

/// One Bernoulli weight per edge `(i, j)`, `1 <= i < j <= n`, packed into
/// bits. The pairing function is row-major over `i` then `j`:
/// `(1,2), (1,3), ..., (1,n), (2,3), ..., (n-1,n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightAssignment {
    n: usize,
    bits: Vec<u64>,
}

/// Number of edges `C(n,2)`.
pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Bit position of edge `(i, j)` under the row-major pairing, 1-based.
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n);
    (i - 1) * n - i * (i - 1) / 2 + (j - i - 1)
}

impl WeightAssignment {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        let words = edge_count(n).div_ceil(64);
        WeightAssignment {
            n,
            bits: vec![0; words.max(1)],
        }
    }

    /// Unpack the low `C(n,2)` bits of `mask` (for exhaustive enumeration).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(edge_count(n) <= 64);
        WeightAssignment {
            n,
            bits: vec![mask],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        let e = edge_index(self.n, i, j);
        self.bits[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, w: bool) {
        let e = edge_index(self.n, i, j);
        if w {
            self.bits[e / 64] |= 1 << (e % 64);
        } else {
            self.bits[e / 64] &= !(1 << (e % 64));
        }
    }

    pub fn ones(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    /// Draw all `C(n,2)` weights in pairing-function order.
    fn fill_random(&mut self, bern: &ExactBernoulli, rng: &mut ChaCha8Rng) {
        for w in &mut self.bits {
            *w = 0;
        }
        for e in 0..edge_count(self.n) {
            if bern.draw(rng) {
                self.bits[e / 64] |= 1 << (e % 64);
            }
        }
    }
}

/// `w[1, j]` for every `j`: `best[j] = max_{i<j} (best[i] + w(i,j))`,
/// `best[1] = 0`. Index 0 of the result is unused.
#[allow(clippy::needless_range_loop)] // i addresses both best[] and the edge (i, j)
pub fn heaviest_values(w: &WeightAssignment) -> Vec<u32> {
    let n = w.n;
    let mut best = vec![0u32; n + 1];
    for j in 2..=n {
        let mut m = 0;
        for i in 1..j {
            let cand = best[i] + u32::from(w.get(i, j));
            if cand > m {
                m = cand;
            }
        }
        best[j] = m;
    }
    best
}

/// The heaviest-path weight `X_n = w[1, n]`.
pub fn heaviest_path(w: &WeightAssignment) -> u32 {
    heaviest_values(w)[w.n]
}

/// Heaviest path from `a` to `b` using only nodes (and edges) in `[a, b]`.
pub fn heaviest_between(w: &WeightAssignment, a: usize, b: usize) -> u32 {
    assert!(1 <= a && a <= b && b <= w.n);
    let mut best = vec![0u32; b - a + 1];
    for j in a + 1..=b {
        let mut m = 0;
        for i in a..j {
            let cand = best[i - a] + u32::from(w.get(i, j));
            if cand > m {
                m = cand;
            }
        }
        best[j - a] = m;
    }
    best[b - a]
}

/// Exhaustive tallies: `counts[x][k]` is the number of weight assignments
/// with heaviest-path weight `x` and exactly `k` one-edges. One enumeration
/// serves every `p`, since `P(X=x) = sum_k counts[x][k] p^k q^(E-k)`.
#[derive(Debug, Clone)]
pub struct BruteForceCounts {
    n: usize,
    counts: Vec<Vec<u64>>,
}

impl BruteForceCounts {
    /// Enumerate all `2^C(n,2)` assignments; `n <= 8`.
    pub fn enumerate(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NTooSmall { n, min: 1 });
        }
        if n > BRUTE_FORCE_MAX_NODES {
            return Err(Error::BruteForceTooLarge {
                n,
                max: BRUTE_FORCE_MAX_NODES,
            });
        }
        let e = edge_count(n);
        let total: u64 = 1 << e;
        // split the mask space for rayon; tallies merge by addition
        let splits: u64 = if e >= 20 { 256 } else { 1 };
        let span = total / splits;
        let tallies: Vec<Vec<Vec<u64>>> = (0..splits)
            .into_par_iter()
            .map(|s| {
                let mut counts = vec![vec![0u64; e + 1]; n];
                for mask in s * span..(s + 1) * span {
                    let w = WeightAssignment::from_mask(n, mask);
                    let x = heaviest_path(&w) as usize;
                    counts[x][mask.count_ones() as usize] += 1;
                }
                counts
            })
            .collect();
        let mut counts = vec![vec![0u64; e + 1]; n];
        for t in tallies {
            for (x, row) in t.into_iter().enumerate() {
                for (k, c) in row.into_iter().enumerate() {
                    counts[x][k] += c;
                }
            }
        }
        Ok(BruteForceCounts { n, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Assemble the exact law for a given `p` from the tallies.
    pub fn distribution(&self, p: &Rational) -> Result<WeightDistribution> {
        check_probability(p)?;
        let e = edge_count(self.n);
        let q = Rational::one() - p;
        // power tables for p^k and q^(E-k)
        let mut p_pow = vec![Rational::one(); e + 1];
        let mut q_pow = vec![Rational::one(); e + 1];
        for k in 1..=e {
            p_pow[k] = &p_pow[k - 1] * p;
            q_pow[k] = &q_pow[k - 1] * &q;
        }
        let probs = self
            .counts
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (k, &c)| {
                        if c == 0 {
                            acc
                        } else {
                            acc + Rational::from_integer(c) * &p_pow[k] * &q_pow[e - k]
                        }
                    })
            })
            .collect();
        Ok(WeightDistribution { n: self.n, probs })
    }
}

/// Exhaustive law of `X_n`; independent of the recurrence route.
pub fn brute_force_distribution(n: usize, p: &Rational) -> Result<WeightDistribution> {
    BruteForceCounts::enumerate(n)?.distribution(p)
}

/// Exact Bernoulli(p) draws from a rational `p = a/b`: draw a uniform
/// integer in `[0, b)` and compare with `a`. No float thresholding.
#[derive(Debug, Clone, Copy)]
struct ExactBernoulli {
    num: u128,
    den: u128,
}

impl ExactBernoulli {
    fn new(p: &Rational) -> Result<Self> {
        check_probability(p)?;
        let num = p.numer().to_u128().ok_or(Error::DenominatorTooLarge)?;
        let den = p.denom().to_u128().ok_or(Error::DenominatorTooLarge)?;
        Ok(ExactBernoulli { num, den })
    }

    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> bool {
        if self.num == 0 {
            false
        } else if self.num == self.den {
            true
        } else if self.den <= u64::MAX as u128 {
            u128::from(rng.gen_range(0..self.den as u64)) < self.num
        } else {
            rng.gen_range(0..self.den) < self.num
        }
    }
}

/// The generator for logical substream `s` of a run seeded with `seed`.
fn substream_rng(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

/// One heaviest-path draw without materializing the edge matrix.
///
/// Only nodes currently attaining the running maximum `m` can lift a later
/// node to `m + 1`, so per node it suffices to scan the current argmax set
/// and stop at the first one-edge; unexamined edges stay unrevealed, which
/// leaves the law of the result unchanged.
fn draw_heaviest(n: usize, bern: &ExactBernoulli, rng: &mut ChaCha8Rng) -> u32 {
    let mut m = 0u32;
    let mut argmax = 1u32;
    for _j in 2..=n {
        let mut hit = false;
        for _ in 0..argmax {
            if bern.draw(rng) {
                hit = true;
                break;
            }
        }
        if hit {
            m += 1;
            argmax = 1;
        } else {
            argmax += 1;
        }
    }
    m
}

/// Monte Carlo summary of `X_n`. Equality of two reports is bitwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub n: usize,
    pub p: Rational,
    pub sample_count: u64,
    pub seed: u64,
    /// Number of logical RNG substreams the count was partitioned into.
    pub substreams: u64,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub normalized_mean: f64,
}

fn report_from_totals(
    n: usize,
    p: &Rational,
    count: u64,
    seed: u64,
    substreams: u64,
    sum_x: u128,
    sum_x2: u128,
) -> SampleReport {
    let cf = count as f64;
    let sx = sum_x as f64;
    let sx2 = sum_x2 as f64;
    let mean = sx / cf;
    let variance = if count >= 2 {
        ((sx2 - sx * sx / cf) / (cf - 1.0)).max(0.0)
    } else {
        0.0
    };
    SampleReport {
        n,
        p: p.clone(),
        sample_count: count,
        seed,
        substreams,
        mean,
        variance,
        stderr: (variance / cf).sqrt(),
        normalized_mean: mean / (n as f64 - 1.0),
    }
}

fn sample_impl(
    n: usize,
    p: &Rational,
    count: u64,
    seed: u64,
    workers: usize,
    collect_values: bool,
) -> Result<(SampleReport, Option<Vec<u32>>)> {
    if n < 2 {
        return Err(Error::NTooSmall { n, min: 2 });
    }
    if count == 0 {
        return Err(Error::EmptySampleCount);
    }
    if workers == 0 {
        return Err(Error::NoWorkers);
    }
    let bern = ExactBernoulli::new(p)?;
    let substreams = count.div_ceil(SAMPLES_PER_SUBSTREAM);

    let run_substream = |s: u64| -> (u64, u64, Option<Vec<u32>>) {
        let quota = SAMPLES_PER_SUBSTREAM.min(count - s * SAMPLES_PER_SUBSTREAM);
        let mut rng = substream_rng(seed, s);
        let mut sum_x = 0u64;
        let mut sum_x2 = 0u64;
        let mut values = collect_values.then(|| Vec::with_capacity(quota as usize));
        for _ in 0..quota {
            let x = draw_heaviest(n, &bern, &mut rng);
            sum_x += u64::from(x);
            sum_x2 += u64::from(x) * u64::from(x);
            if let Some(v) = values.as_mut() {
                v.push(x);
            }
        }
        (sum_x, sum_x2, values)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let per_stream: Vec<(u64, u64, Option<Vec<u32>>)> =
        pool.install(|| (0..substreams).into_par_iter().map(run_substream).collect());

    let mut sum_x = 0u128;
    let mut sum_x2 = 0u128;
    let mut values = collect_values.then(|| Vec::with_capacity(count as usize));
    for (sx, sx2, v) in per_stream {
        sum_x += u128::from(sx);
        sum_x2 += u128::from(sx2);
        if let (Some(all), Some(chunk)) = (values.as_mut(), v) {
            all.extend(chunk);
        }
    }
    let report = report_from_totals(n, p, count, seed, substreams, sum_x, sum_x2);
    Ok((report, values))
}

/// Deterministic Monte Carlo estimate of `E[X_n]` and `var(X_n)`.
pub fn sample(
    n: usize,
    p: &Rational,
    count: u64,
    seed: u64,
    workers: usize,
) -> Result<SampleReport> {
    Ok(sample_impl(n, p, count, seed, workers, false)?.0)
}

/// Like [`sample`] but also returns the per-draw values in substream order
/// (for CSV dumps and distribution diagnostics).
pub fn sample_with_values(
    n: usize,
    p: &Rational,
    count: u64,
    seed: u64,
    workers: usize,
) -> Result<(SampleReport, Vec<u32>)> {
    let (report, values) = sample_impl(n, p, count, seed, workers, true)?;
    Ok((report, values.expect("values collected")))
}

/// Per-realization increment check: draws assignments on `n + 1` nodes,
/// computes `X_n` and `X_{n+1}` on the *same* assignment, and returns the
/// fraction of draws with `X_{n+1} - X_n` outside `{0, 1}`. The bound holds
/// surely, so the contract is a return value of exactly 0.
pub fn coupled_increment_check(n: usize, p: &Rational, count: u64, seed: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::NTooSmall { n, min: 1 });
    }
    if count == 0 {
        return Err(Error::EmptySampleCount);
    }
    let bern = ExactBernoulli::new(p)?;
    let mut rng = substream_rng(seed, 0);
    let mut w = WeightAssignment::zeros(n + 1);
    let mut violations = 0u64;
    for _ in 0..count {
        w.fill_random(&bern, &mut rng);
        let best = heaviest_values(&w);
        let (x_n, x_next) = (best[n], best[n + 1]);
        if !(x_next == x_n || x_next == x_n + 1) {
            violations += 1;
        }
    }
    Ok(violations as f64 / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn pairing_function_is_a_bijection() {
        for n in 1..=10usize {
            let e = edge_count(n);
            let mut seen = vec![false; e];
            for i in 1..=n {
                for j in i + 1..=n {
                    let idx = edge_index(n, i, j);
                    assert!(idx < e && !seen[idx], "n={n} ({i},{j})");
                    seen[idx] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn heaviest_path_hand_cases() {
        let w = WeightAssignment::zeros(5);
        assert_eq!(heaviest_path(&w), 0);

        let mut all_one = WeightAssignment::zeros(5);
        for i in 1..=5 {
            for j in i + 1..=5 {
                all_one.set(i, j, true);
            }
        }
        assert_eq!(heaviest_path(&all_one), 4);

        // detour through node 2 beats the direct edge
        let mut w3 = WeightAssignment::zeros(3);
        w3.set(1, 2, true);
        w3.set(2, 3, true);
        w3.set(1, 3, true);
        assert_eq!(heaviest_path(&w3), 2);

        let single = WeightAssignment::zeros(1);
        assert_eq!(heaviest_path(&single), 0);
    }

    /// Test-only oracle: maximize over every subset of intermediate nodes.
    fn exhaustive_heaviest(w: &WeightAssignment) -> u32 {
        let n = w.n();
        if n == 1 {
            return 0;
        }
        let inner: Vec<usize> = (2..n).collect();
        let mut best = 0;
        for mask in 0u32..1 << inner.len() {
            let mut path = vec![1usize];
            for (b, &node) in inner.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    path.push(node);
                }
            }
            path.push(n);
            let weight: u32 = path
                .windows(2)
                .map(|uv| u32::from(w.get(uv[0], uv[1])))
                .sum();
            best = best.max(weight);
        }
        best
    }

    #[test]
    fn dp_matches_exhaustive_path_enumeration() {
        let mut rng = substream_rng(99, 0);
        let bern = ExactBernoulli::new(&r("1/2")).unwrap();
        for n in 2..=7usize {
            let mut w = WeightAssignment::zeros(n);
            for _ in 0..1000 {
                w.fill_random(&bern, &mut rng);
                assert_eq!(heaviest_path(&w), exhaustive_heaviest(&w));
            }
        }
    }

    #[test]
    fn brute_force_small_laws() {
        let d3 = brute_force_distribution(3, &r("1/2")).unwrap();
        assert_eq!(d3.probs, vec![r("1/8"), r("5/8"), r("1/4")]);

        let p = r("2/7");
        let d2 = brute_force_distribution(2, &p).unwrap();
        assert_eq!(d2.probs, vec![r("5/7"), r("2/7")]);

        let d4 = brute_force_distribution(4, &r("1/2")).unwrap();
        assert_eq!(d4.mean(), r("111/64"));
        d4.validate(&r("1/2")).unwrap();

        assert!(brute_force_distribution(9, &p).is_err());
        assert!(brute_force_distribution(0, &p).is_err());
    }

    #[test]
    fn tallies_cover_the_whole_cube() {
        for n in 1..=5usize {
            let counts = BruteForceCounts::enumerate(n).unwrap();
            let total: u64 = counts.counts.iter().flatten().sum();
            assert_eq!(total, 1 << edge_count(n));
            let d = counts.distribution(&r("1/3")).unwrap();
            d.validate(&r("1/3")).unwrap();
        }
    }

    /// Law of `w[a, b]` by full enumeration of all `C(n,2)` edges.
    fn window_law(n: usize, a: usize, b: usize, p: &Rational) -> Vec<Rational> {
        let e = edge_count(n);
        let q = Rational::one() - p;
        let mut probs = vec![Rational::zero(); b - a + 1];
        for mask in 0u64..1 << e {
            let w = WeightAssignment::from_mask(n, mask);
            let x = heaviest_between(&w, a, b) as usize;
            let ones = mask.count_ones();
            probs[x] = &probs[x] + &(p.pow(ones) * q.pow(e as u32 - ones));
        }
        probs
    }

    #[test]
    fn window_law_is_translation_invariant() {
        for p in [r("1/2"), r("1/3")] {
            for len in 1..=3usize {
                let reference = window_law(5, 1, 1 + len, &p);
                for a in 2..=5 - len {
                    assert_eq!(
                        window_law(5, a, a + len, &p),
                        reference,
                        "p={p} len={len} a={a}"
                    );
                }
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = r("1/2");
        let first = sample(40, &p, 3000, 7, 1).unwrap();
        let second = sample(40, &p, 3000, 7, 1).unwrap();
        assert_eq!(first, second);
        let wide = sample(40, &p, 3000, 7, 4).unwrap();
        assert_eq!(first, wide, "results must not depend on worker count");
        let other_seed = sample(40, &p, 3000, 8, 1).unwrap();
        assert_ne!(first.mean, other_seed.mean);
    }

    #[test]
    fn sampled_values_match_report() {
        let p = r("1/3");
        let (report, values) = sample_with_values(12, &p, 1000, 3, 2).unwrap();
        assert_eq!(values.len(), 1000);
        let mean = values.iter().map(|&x| f64::from(x)).sum::<f64>() / 1000.0;
        assert!((mean - report.mean).abs() < 1e-12);
        assert!(values.iter().all(|&x| x <= 11));
    }

    #[test]
    fn single_edge_mean_is_bernoulli() {
        let report = sample(2, &r("1/2"), 4096, 11, 1).unwrap();
        assert!((report.mean - 0.5).abs() < 4.0 * report.stderr + 1e-9);
        assert_eq!(report.normalized_mean, report.mean);
    }

    #[test]
    fn sampler_rejects_bad_arguments() {
        let p = r("1/2");
        assert!(sample(1, &p, 10, 0, 1).is_err());
        assert!(sample(5, &p, 0, 0, 1).is_err());
        assert!(sample(5, &p, 10, 0, 0).is_err());
        let huge_den = Rational::new(1u64, num_bigint::BigInt::from(2u8).pow(200)).unwrap();
        assert!(sample(5, &huge_den, 10, 0, 1).is_err());
    }

    #[test]
    fn degenerate_p_sampling() {
        let sure = sample(10, &r("1"), 100, 0, 1).unwrap();
        assert_eq!(sure.mean, 9.0);
        assert_eq!(sure.variance, 0.0);
        let never = sample(10, &r("0"), 100, 0, 1).unwrap();
        assert_eq!(never.mean, 0.0);
    }

    #[test]
    fn coupled_increments_never_violate() {
        assert_eq!(
            coupled_increment_check(5, &r("1/2"), 20_000, 1).unwrap(),
            0.0
        );
        assert_eq!(
            coupled_increment_check(2, &r("3/4"), 5_000, 2).unwrap(),
            0.0
        );
        assert_eq!(
            coupled_increment_check(12, &r("1/10"), 5_000, 3).unwrap(),
            0.0
        );
    }

    #[test]
    fn prefix_values_are_monotone() {
        let bern = ExactBernoulli::new(&r("2/5")).unwrap();
        let mut rng = substream_rng(17, 0);
        let mut w = WeightAssignment::zeros(9);
        for _ in 0..500 {
            w.fill_random(&bern, &mut rng);
            let best = heaviest_values(&w);
            for n in 1..9 {
                assert!(best[n + 1] >= best[n]);
                assert!(best[n + 1] <= best[n] + 1);
            }
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = sample(6, &r("1/3"), 500, 42, 2).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: SampleReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
