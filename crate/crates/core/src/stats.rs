//! Statistical moments and entropy estimators.

#[allow(unused_imports)] use num_traits::Float;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// A value that may have been produced under a degeneracy convention
/// (flat-line input, empty denominator, ...). Degenerate values are still
/// finite so downstream feature consumers never see NaN or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub degenerate: bool,
}

impl Flagged {
    pub fn ok(value: f64) -> Self {
        Flagged {
            value,
            degenerate: false,
        }
    }

    pub fn degenerate(value: f64) -> Self {
        Flagged {
            value,
            degenerate: true,
        }
    }
}

/// True when a computed variance is indistinguishable from accumulated
/// rounding noise on a flat-line signal at the given mean level.
pub(crate) fn variance_is_degenerate(variance: f64, mean: f64, n: usize) -> bool {
    let tiny = 4.0 * n as f64 * f64::EPSILON * (mean.abs() + 1.0);
    variance <= tiny * tiny
}

/// Mean, population variance, and standardized central moments.
///
/// Kurtosis uses the Pearson convention: a Gaussian scores 3, not 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    /// Zero-variance input: skewness and kurtosis set to 0 by convention.
    pub degenerate: bool,
}

/// Computes the moment summary of a signal of at least 4 samples.
pub fn moments(signal: &Signal) -> Result<MomentSummary> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::SignalTooShort { needed: 4, got: n });
    }
    let x = signal.samples();
    let mean = signal.mean();
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let nf = n as f64;
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if variance_is_degenerate(m2, mean, n) {
        return Ok(MomentSummary {
            mean,
            variance: 0.0,
            skewness: 0.0,
            kurtosis: 0.0,
            degenerate: true,
        });
    }
    Ok(MomentSummary {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        degenerate: false,
    })
}

fn validate_entropy_args(n: usize, m: usize, r: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("template length m must be >= 1".into()));
    }
    if n <= m + 1 {
        return Err(Error::SignalTooShort {
            needed: m + 2,
            got: n,
        });
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance r = {} must be finite and nonnegative",
            r
        )));
    }
    Ok(())
}

/// Chebyshev match between windows starting at `i` and `j`, length `len`.
#[inline]
fn template_match(x: &[f64], i: usize, j: usize, len: usize, r: f64) -> bool {
    for k in 0..len {
        if (x[i + k] - x[j + k]).abs() > r {
            return false;
        }
    }
    true
}

/// Sample entropy: `-ln(A/B)` over template pairs of length `m+1` and `m`,
/// Chebyshev distance, self-matches excluded.
///
/// When no `m+1` template pair matches (`A == 0`) the estimator diverges; a
/// finite upper surrogate `ln(B) + ln(N)` is returned instead, flagged
/// degenerate, so feature vectors stay finite.
pub fn sample_entropy(signal: &Signal, m: usize, r: f64) -> Result<Flagged> {
    let n = signal.len();
    validate_entropy_args(n, m, r)?;
    let x = signal.samples();
    // Both template lengths range over the same start indices so the counts
    // are comparable (Richman-Moorman formulation).
    let count = n - m;
    let mut a = 0u64;
    let mut b = 0u64;
    for i in 0..count {
        for j in (i + 1)..count {
            if template_match(x, i, j, m, r) {
                b += 1;
                if (x[i + m] - x[j + m]).abs() <= r {
                    a += 1;
                }
            }
        }
    }
    if b == 0 {
        return Ok(Flagged::degenerate((n as f64).ln()));
    }
    if a == 0 {
        return Ok(Flagged::degenerate((b as f64).ln() + (n as f64).ln()));
    }
    Ok(Flagged::ok(-((a as f64) / (b as f64)).ln()))
}

/// Approximate entropy: `phi(m) - phi(m+1)` with self-matches included.
pub fn approximate_entropy(signal: &Signal, m: usize, r: f64) -> Result<f64> {
    let n = signal.len();
    validate_entropy_args(n, m, r)?;
    let x = signal.samples();
    let phi = |len: usize| -> f64 {
        let count = n - len + 1;
        let mut total = 0.0;
        for i in 0..count {
            let mut matches = 0u64;
            for j in 0..count {
                if template_match(x, i, j, len, r) {
                    matches += 1;
                }
            }
            // Self-match guarantees matches >= 1.
            total += ((matches as f64) / (count as f64)).ln();
        }
        total / count as f64
    };
    Ok(phi(m) - phi(m + 1))
}
