//! Shared statistical machinery: reproducible summation, confidence
//! intervals, goodness-of-fit tests, and least-squares tail fits.
//!
//! All verdict-producing routines are one-sided and CI-aware; the default
//! confidence level is 95% and is a knob, not a constant baked into call
//! sites.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Pairwise (cascade) summation. Deterministic for a fixed element order and
/// insensitive to chunked parallel accumulation as long as chunk boundaries
/// are fixed, which keeps floating-point totals reproducible across thread
/// counts.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let devs: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&devs) / (n - 1) as f64
}

pub fn z_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Two-sided z-value for a given confidence level, e.g. 0.95 -> 1.96.
pub fn z_two_sided(confidence: f64) -> f64 {
    z_quantile(0.5 + confidence / 2.0)
}

/// One-sided z-value, e.g. 0.95 -> 1.645.
pub fn z_one_sided(confidence: f64) -> f64 {
    z_quantile(confidence)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ci {
    pub lo: f64,
    pub hi: f64,
}

impl Ci {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
    pub fn overlaps(&self, other: &Ci) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// CLT interval for a sample mean.
pub fn mean_ci(xs: &[f64], confidence: f64) -> (f64, Ci) {
    let m = mean(xs);
    let se = (variance(xs) / xs.len() as f64).sqrt();
    let z = z_two_sided(confidence);
    (m, Ci { lo: m - z * se, hi: m + z * se })
}

/// CI for a sample variance via the delta method with the fourth central
/// moment; robust to non-normal data, unlike the chi-square interval.
pub fn variance_ci(xs: &[f64], confidence: f64) -> (f64, Ci) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let v = variance(xs);
    let m4s: Vec<f64> = xs.iter().map(|x| (x - m).powi(4)).collect();
    let m4 = mean(&m4s);
    let se = ((m4 - v * v).max(0.0) / n).sqrt();
    let z = z_two_sided(confidence);
    (v, Ci { lo: v - z * se, hi: v + z * se })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, trials: u64, confidence: f64) -> (f64, Ci) {
    assert!(trials > 0, "wilson_ci needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_two_sided(confidence);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
    (p, Ci { lo: (center - half).max(0.0), hi: (center + half).min(1.0) })
}

/// Pearson chi-square goodness-of-fit statistic against expected counts.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .filter(|(_, e)| **e > 0.0)
        .map(|(o, e)| {
            let d = *o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Upper quantile of the chi-square distribution with `dof` degrees of
/// freedom, e.g. `alpha = 0.001` gives the 99.9% point.
pub fn chi_square_critical(dof: usize, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(1.0 - alpha)
}

pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub pass: bool,
}

/// Chi-square GOF test of observed counts vs a pmf, pooling tail cells so
/// every expected count is at least `min_expected`.
pub fn chi_square_gof(
    observed: &[u64],
    pmf: &[f64],
    total: u64,
    alpha: f64,
    min_expected: f64,
) -> ChiSquareOutcome {
    assert_eq!(observed.len(), pmf.len());
    let mut obs: Vec<u64> = Vec::new();
    let mut exp: Vec<f64> = Vec::new();
    let mut o_acc = 0u64;
    let mut e_acc = 0.0f64;
    for (o, p) in observed.iter().zip(pmf) {
        o_acc += o;
        e_acc += p * total as f64;
        if e_acc >= min_expected {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0 {
        if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
            *lo += o_acc;
            *le += e_acc;
        } else {
            obs.push(o_acc);
            exp.push(e_acc);
        }
    }
    let statistic = chi_square_statistic(&obs, &exp);
    let dof = obs.len().saturating_sub(1).max(1);
    let critical = chi_square_critical(dof, alpha);
    ChiSquareOutcome { statistic, dof, critical, pass: statistic <= critical }
}

/// Kolmogorov-Smirnov statistic of a sample against the uniform law on [0,1).
pub fn ks_statistic_uniform(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    d
}

/// Asymptotic KS critical value at significance `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ((-0.5 * (alpha / 2.0).ln()).sqrt()) / (n as f64).sqrt()
}

/// Pearson correlation of paired samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let cov: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let c = pairwise_sum(&cov);
    (c / (variance(xs) * variance(ys)).sqrt()) / (xs.len() as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci: Ci,
}

/// Ordinary least squares with a normal-theory CI on the slope.
pub fn ols_fit(xs: &[f64], ys: &[f64], confidence: f64) -> Option<LineFit> {
    let n = xs.len();
    if n < 3 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let se = (ss_res / (nf - 2.0) / sxx).sqrt();
    let z = z_two_sided(confidence);
    Some(LineFit {
        slope,
        intercept,
        slope_ci: Ci { lo: slope - z * se, hi: slope + z * se },
    })
}

/// Total variation distance between two probability vectors on a shared
/// index set.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Empirical pmf of small-integer samples on 0..=max.
pub fn empirical_pmf(samples: &[u64], max: u64) -> Vec<f64> {
    let mut counts = vec![0u64; (max + 1) as usize];
    for &s in samples {
        counts[(s.min(max)) as usize] += 1;
    }
    counts.iter().map(|&c| c as f64 / samples.len() as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn pairwise_sum_is_chunk_stable() {
        // Summing fixed-size chunk partials must reproduce the full pairwise
        // sum bit-for-bit when the chunking matches the recursion split.
        let xs: Vec<f64> = (0..4096).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let whole = pairwise_sum(&xs);
        let halves = pairwise_sum(&xs[..2048]) + pairwise_sum(&xs[2048..]);
        assert_eq!(whole, halves);
    }

    #[test]
    fn z_values_match_tables() {
        assert!((z_two_sided(0.95) - 1.959964).abs() < 1e-5);
        assert!((z_one_sided(0.95) - 1.644854).abs() < 1e-5);
    }

    #[test]
    fn chi_square_critical_matches_tables() {
        // 99.9% points: dof=2 -> 13.8155, dof=10 -> 29.5883.
        assert!((chi_square_critical(2, 0.001) - 13.8155).abs() < 1e-3);
        assert!((chi_square_critical(10, 0.001) - 29.5883).abs() < 1e-3);
    }

    #[test]
    fn wilson_interval_covers_proportion() {
        let (p, ci) = wilson_ci(500, 1000, 0.95);
        assert!((p - 0.5).abs() < 1e-12);
        assert!(ci.contains(0.5));
        assert!(ci.width() < 0.07);
    }

    #[test]
    fn ks_critical_value_scale() {
        // c(0.001) = sqrt(-ln(0.0005)/2) = 1.94947...
        let c = ks_critical(100_000, 0.001) * (100_000f64).sqrt();
        assert!((c - 1.94947).abs() < 1e-4);
    }

    #[test]
    fn ols_recovers_exact_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let fit = ols_fit(&xs, &ys, 0.95).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.slope_ci.width() < 1e-9);
    }

    #[test]
    fn tv_of_identical_is_zero() {
        let p = [0.25, 0.25, 0.5];
        assert_eq!(total_variation(&p, &p), 0.0);
        let q = [0.5, 0.25, 0.25];
        assert!((total_variation(&p, &q) - 0.25).abs() < 1e-15);
    }
}
