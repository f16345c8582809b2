//! Streaming mean/variance accumulators with an order-fixed merge.

use serde::{Deserialize, Serialize};

/// Welford accumulator. Merging uses Chan's pairwise update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.n as f64 / n as f64);
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        RunningStats { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Pairwise tree reduction in index order. The result depends only on the
/// sequence of inputs, never on how they were produced.
pub fn merge_pairwise(mut parts: Vec<RunningStats>) -> RunningStats {
    if parts.is_empty() {
        return RunningStats::default();
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0].merge(&c[1]) } else { c[0] })
            .collect();
    }
    parts[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn constant_stream_has_zero_error() {
        let mut s = RunningStats::new();
        for _ in 0..1000 {
            s.push(-1.0);
        }
        assert_eq!(s.mean(), -1.0);
        assert_eq!(s.stderr(), 0.0);
    }

    #[test]
    fn single_sample() {
        let mut s = RunningStats::new();
        s.push(3.5);
        assert_eq!(s.mean(), 3.5);
        assert_eq!(s.stderr(), 0.0);
    }

    proptest! {
        #[test]
        fn split_merge_matches_naive(xs in prop::collection::vec(-10.0f64..10.0, 2..200), cut in 1usize..50) {
            let parts: Vec<RunningStats> = xs.chunks(cut).map(|c| {
                let mut s = RunningStats::new();
                c.iter().for_each(|&x| s.push(x));
                s
            }).collect();
            let merged = merge_pairwise(parts);
            let (mean, var) = naive(&xs);
            prop_assert_eq!(merged.count(), xs.len() as u64);
            prop_assert!((merged.mean() - mean).abs() < 1e-10);
            prop_assert!((merged.variance() - var).abs() < 1e-8);
        }
    }
}
