//! Small statistics toolkit: Kolmogorov–Smirnov distances, sample means and
//! log-binned histograms.

use serde::{Deserialize, Serialize};

/// One-sample KS distance `sup |F_n(x) - F(x)|`. `samples` need not be sorted.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance between empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
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

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// `None` for an empty slice. The standard error is 0 for a single value.
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std_err, n })
    }

    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

/// Histogram with logarithmic bins anchored at `anchor`, `per_decade` bins
/// per factor of ten. Edges are `anchor * 10^(k / per_decade)` for integer
/// `k`; the covered range grows to include every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl LogHistogram {
    /// Bins covering at least `[lo, hi]` plus every sample. Non-positive
    /// samples are not representable and are skipped.
    pub fn build(samples: &[f64], anchor: f64, per_decade: u32, lo: f64, hi: f64) -> Self {
        let pd = per_decade as f64;
        let index = |x: f64| ((x / anchor).log10() * pd).floor() as i64;
        let mut k_lo = index(lo);
        let mut k_hi = index(hi).max(k_lo + 1);
        for &x in samples.iter().filter(|x| **x > 0.0) {
            k_lo = k_lo.min(index(x));
            k_hi = k_hi.max(index(x) + 1);
        }
        let edges: Vec<f64> = (k_lo..=k_hi)
            .map(|k| anchor * 10f64.powf(k as f64 / pd))
            .collect();
        let mut counts = vec![0u64; edges.len() - 1];
        for &x in samples.iter().filter(|x| **x > 0.0) {
            // edges are recomputed by powf, so settle rounding at bin borders
            let mut k = (index(x) - k_lo) as usize;
            k = k.min(counts.len() - 1);
            while k > 0 && x < edges[k] {
                k -= 1;
            }
            while k + 1 < counts.len() && x >= edges[k + 1] {
                k += 1;
            }
            counts[k] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ks_of_uniform_grid() {
        // midpoints of n cells against the uniform CDF: distance exactly 1/(2n)
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12, "{d}");
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0 + 0.2).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.2).abs() < 2e-3, "{d}");
    }

    #[test]
    fn two_sample_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[4.0, 5.0]), 1.0);
        // ties across samples
        let d = ks_two_sample(&[1.0, 2.0, 2.0, 3.0], &[2.0, 2.0]);
        assert!((d - 0.25).abs() < 1e-15, "{d}");
    }

    #[test]
    fn mean_and_standard_error() {
        let m = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.std_err - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(MeanEstimate::from_samples(&[]).is_none());
        assert_eq!(MeanEstimate::from_samples(&[7.0]).unwrap().std_err, 0.0);
    }

    #[test]
    fn histogram_twenty_per_decade() {
        let h = LogHistogram::build(&[0.15, 1.0, 9.99], 0.1, 20, 0.1, 10.0);
        assert_eq!(h.edges.len(), 41);
        assert!((h.edges[0] - 0.1).abs() < 1e-15);
        assert!((h.edges[40] - 10.0).abs() < 1e-12);
        assert_eq!(h.total(), 3);
        assert_eq!(h.counts[20], 1);
    }

    proptest! {
        #[test]
        fn histogram_counts_every_sample(xs in prop::collection::vec(1e-6f64..1e6, 0..200)) {
            let h = LogHistogram::build(&xs, 0.1, 20, 0.1, 1e5);
            prop_assert_eq!(h.total() as usize, xs.len());
            for w in h.edges.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for &x in &xs {
                prop_assert!(x >= h.edges[0] && x < *h.edges.last().unwrap());
            }
        }

        #[test]
        fn ks_is_a_distance(xs in prop::collection::vec(0.0f64..1.0, 1..100)) {
            let d = ks_statistic(&xs, |x| x);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!(d >= 0.5 / xs.len() as f64 - 1e-12);
        }
    }
}
