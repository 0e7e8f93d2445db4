//! Small statistics toolkit for the Monte Carlo reports.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_err(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile, `q` in `[0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    quantile_sorted(&sorted(xs), q)
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

/// Kolmogorov-Smirnov distance between the sample and a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Total variation between an empirical count table and a reference pmf.
///
/// Mass of the reference outside the table's keys is added in full, so the
/// caller passes the reference restricted to a truncation box together with
/// the box's missing mass.
pub fn tv_counts<K: Eq + Hash>(counts: &HashMap<K, usize>, reference: &HashMap<K, f64>, outside_mass: f64) -> f64 {
    let total: usize = counts.values().sum();
    let total = total as f64;
    let mut diff = outside_mass;
    for (k, &q) in reference {
        let e = counts.get(k).copied().unwrap_or(0) as f64 / total;
        diff += (e - q).abs();
    }
    for (k, &c) in counts {
        if !reference.contains_key(k) {
            diff += c as f64 / total;
        }
    }
    diff / 2.0
}

/// Pearson chi-square test; bins with expected count below 5 are merged into one.
pub fn chi_square_p_value(observed: &[usize], expected: &[f64]) -> f64 {
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut small_o, mut small_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e < 5.0 {
            small_o += o as f64;
            small_e += e;
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        bins += 1;
    }
    if small_e > 0.0 {
        stat += (small_o - small_e).powi(2) / small_e;
        bins += 1;
    }
    if bins < 2 {
        return 1.0;
    }
    let chi = ChiSquared::new((bins - 1) as f64).expect("positive degrees of freedom");
    1.0 - chi.cdf(stat)
}

/// Batch-means estimate of the long-run variance `σ²` of a stationary series,
/// with a jackknife standard error over batches.
pub fn batch_means_variance(xs: &[f64], batches: usize) -> (f64, f64) {
    let batches = batches.max(2);
    let len = xs.len() / batches;
    assert!(len > 0, "series shorter than the number of batches");
    let means: Vec<f64> = (0..batches).map(|b| mean(&xs[b * len..(b + 1) * len])).collect();
    let estimate = len as f64 * variance(&means);
    let total: f64 = means.iter().sum();
    let loo: Vec<f64> = (0..batches)
        .map(|i| {
            let m = (total - means[i]) / (batches - 1) as f64;
            let ss: f64 = means.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| (x - m).powi(2)).sum();
            len as f64 * ss / (batches - 2).max(1) as f64
        })
        .collect();
    let lm = mean(&loo);
    let b = batches as f64;
    let se = ((b - 1.0) / b * loo.iter().map(|x| (x - lm).powi(2)).sum::<f64>()).sqrt();
    (estimate, se)
}

/// Five-number style summary used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let v = sorted(xs);
        Self {
            mean: mean(xs),
            stderr: std_err(xs),
            median: quantile_sorted(&v, 0.5),
            q05: quantile_sorted(&v, 0.05),
            q95: quantile_sorted(&v, 0.95),
        }
    }
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
