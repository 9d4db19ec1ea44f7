//! Summary statistics with bootstrap confidence intervals.

use rand::Rng;
use serde::Serialize;

use crate::rng::StreamKey;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.low <= other.high && other.low <= self.high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    /// 95% percentile-bootstrap interval of the mean.
    pub ci: Interval,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample standard deviation (`n - 1`); zero for a single value.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// 95% percentile bootstrap interval of the mean, widened if needed so it
/// always brackets the sample mean.
pub fn bootstrap_mean_ci(xs: &[f64], key: StreamKey) -> Interval {
    assert!(!xs.is_empty(), "bootstrap of an empty sample");
    let m = mean(xs);
    let mut rng = key.rng();
    let n = xs.len();
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    Interval {
        low: quantile_sorted(&means, 0.025).min(m),
        high: quantile_sorted(&means, 0.975).max(m),
    }
}

/// Mean and bootstrap interval of the paired differences `a[i] - b[i]`.
pub fn paired_difference_ci(a: &[f64], b: &[f64], key: StreamKey) -> (f64, Interval) {
    assert_eq!(a.len(), b.len(), "paired samples differ in length");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (mean(&d), bootstrap_mean_ci(&d, key))
}

pub fn summarize(xs: &[f64], key: StreamKey) -> ErrorStats {
    ErrorStats {
        n: xs.len(),
        mean: mean(xs),
        median: median(xs),
        std: std_dev(xs),
        ci: bootstrap_mean_ci(xs, key),
    }
}
