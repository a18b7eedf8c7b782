//! Sample means and standard errors for the Monte Carlo checks.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations (Welford's M2).
    pub m2: f64,
}

impl Summary {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Summary {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Summary::default();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Standard error of an empirical frequency `hits / trials`.
pub fn frequency_se(hits: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let f = hits as f64 / trials as f64;
    (f * (1.0 - f) / trials as f64).sqrt()
}

/// Standard deviation of the mean of `trials` draws from `Binomial(n, p)`.
pub fn binomial_mean_sd(n: u64, p: f64, trials: u64) -> f64 {
    (n as f64 * p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let s: Summary = xs.iter().copied().collect();
        assert_eq!(s.mean, 5.0);
        let var = xs.iter().map(|x| (x - 5.0) * (x - 5.0)).sum::<f64>() / 7.0;
        assert!((s.variance() - var).abs() < 1e-12);
        assert!((s.std_error() - (var / 8.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn frequency_errors() {
        assert_eq!(frequency_se(0, 10), 0.0);
        assert!((frequency_se(5, 100) - (0.05f64 * 0.95 / 100.0).sqrt()).abs() < 1e-15);
        assert!((binomial_mean_sd(100, 0.5, 25) - 1.0).abs() < 1e-15);
    }
}
