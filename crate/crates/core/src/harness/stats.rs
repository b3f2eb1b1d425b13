use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{input_err, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub significance: f64,
    pub critical: f64,
    pub passed: bool,
}

/// Two-sample chi-square homogeneity test on histograms over the same bins.
/// Adjacent bins are pooled until each pooled bin has at least `min_count`
/// observations across both samples.
pub fn chi_square_homogeneity(
    a: &[u64],
    b: &[u64],
    significance: f64,
    min_count: u64,
) -> Result<ChiSquareResult> {
    if a.len() != b.len() {
        return input_err("histograms have different bin counts");
    }
    let (na, nb) = (a.iter().sum::<u64>(), b.iter().sum::<u64>());
    if na == 0 || nb == 0 {
        return input_err("empty sample");
    }
    let mut pooled: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0, 0);
    for (&x, &y) in a.iter().zip(b) {
        acc = (acc.0 + x, acc.1 + y);
        if acc.0 + acc.1 >= min_count {
            pooled.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        match pooled.last_mut() {
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1),
            None => pooled.push(acc),
        }
    }
    if pooled.len() < 2 {
        return input_err("fewer than two bins after pooling");
    }
    let total = (na + nb) as f64;
    let statistic = pooled
        .iter()
        .map(|&(x, y)| {
            let col = (x + y) as f64;
            let ea = col * na as f64 / total;
            let eb = col * nb as f64 / total;
            (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb
        })
        .sum();
    let df = pooled.len() - 1;
    let critical = ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - significance);
    Ok(ChiSquareResult {
        statistic,
        df,
        significance,
        critical,
        passed: statistic <= critical,
    })
}
