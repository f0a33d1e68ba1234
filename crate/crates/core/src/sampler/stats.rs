use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean of a correlated series with an autocorrelation-aware error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub stderr: f64,
    /// Integrated autocorrelation time; 1/2 for independent samples.
    pub tau_int: f64,
    pub samples: usize,
}

/// Smallest number of blocks a binning level may have.
const MIN_BLOCKS: usize = 16;
pub const MIN_SERIES_LEN: usize = 8;

impl EstimatorResult {
    /// Exact value, no statistical error.
    pub fn exact(value: f64) -> Self {
        EstimatorResult {
            mean: value,
            stderr: 0.0,
            tau_int: 0.5,
            samples: 1,
        }
    }

    /// Combines estimates from independent chains. The combination weights
    /// every input by its sample count, so it is associative and commutative.
    pub fn merge(&self, other: &EstimatorResult) -> EstimatorResult {
        let (n1, n2) = (self.samples as f64, other.samples as f64);
        let n = n1 + n2;
        EstimatorResult {
            mean: (n1 * self.mean + n2 * other.mean) / n,
            stderr: ((n1 * self.stderr).powi(2) + (n2 * other.stderr).powi(2)).sqrt() / n,
            tau_int: (n1 * self.tau_int + n2 * other.tau_int) / n,
            samples: self.samples + other.samples,
        }
    }

    /// `|mean - target|` in units of the standard error (infinite when the
    /// error is zero and the mean is off target).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Mean, integrated autocorrelation time and standard error of a series.
///
/// The series is blocked into bins of size 1, 2, 4, ...; at bin size `B`
/// the estimate is `tau(B) = B var(bin means) / (2 var)`. The reported
/// `tau_int` is taken where consecutive levels agree within the statistical
/// error of the larger one, or at the coarsest level with at least 16 bins
/// if no plateau shows up. The error is `sqrt(2 tau_int var / n)`.
pub fn binned_stats(series: &[f64]) -> Result<EstimatorResult> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InsufficientData { needed: MIN_SERIES_LEN, got: n });
    }
    let mean = pairwise_sum(series) / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 || !var.is_finite() {
        return Ok(EstimatorResult {
            mean,
            stderr: 0.0,
            tau_int: 0.5,
            samples: n,
        });
    }

    let mut levels: Vec<(f64, f64)> = Vec::new();
    let mut block = 1;
    while n / block >= MIN_BLOCKS || block == 1 {
        let blocks = n / block;
        let means: Vec<f64> = series[..blocks * block]
            .chunks_exact(block)
            .map(|c| c.iter().sum::<f64>() / block as f64)
            .collect();
        let m = means.iter().sum::<f64>() / blocks as f64;
        let vb = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (blocks - 1) as f64;
        let tau = block as f64 * vb / (2.0 * var);
        let err = tau * (2.0 / (blocks - 1) as f64).sqrt();
        levels.push((tau, err));
        block *= 2;
    }

    let mut tau = levels.last().map(|l| l.0).unwrap_or(0.5);
    for w in levels.windows(2) {
        let ((t0, _), (t1, e1)) = (w[0], w[1]);
        if (t1 - t0).abs() <= e1 {
            tau = t0.max(t1);
            break;
        }
    }
    let tau = tau.max(0.5);
    Ok(EstimatorResult {
        mean,
        stderr: (2.0 * tau * var / n as f64).sqrt(),
        tau_int: tau,
        samples: n,
    })
}

/// Pairwise summation with a fixed split, bit-stable for a given input.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
