//! Signal representation, windowing, and band-limited resampling.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] use num_traits::Float;

use crate::error::{Error, Result};

/// A uniformly sampled real-valued signal.
///
/// Samples are validated at construction: every value must be finite and the
/// sampling rate strictly positive. Instances are immutable afterwards, so
/// they can be shared freely between workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    fs: f64,
}

impl Signal {
    /// Builds a signal after checking the construction invariants.
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::InvalidSignal(format!("sampling rate {} Hz", fs)));
        }
        if samples.is_empty() {
            return Err(Error::InvalidSignal("empty sample buffer".into()));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite sample at index {}",
                pos
            )));
        }
        Ok(Signal { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration covered by the sample count, in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.samples.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / self.samples.len() as f64
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Mean square of the raw samples (signal power, DC included).
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    /// Splits the signal into maximal full windows of `win_len` samples taken
    /// every `stride` samples. A trailing partial window is dropped; a window
    /// longer than the signal yields the empty sequence.
    pub fn split_windows(&self, win_len: usize, stride: usize) -> Vec<Signal> {
        assert!(stride >= 1, "stride must be at least 1");
        if win_len == 0 || win_len > self.samples.len() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut start = 0;
        while start + win_len <= self.samples.len() {
            out.push(Signal {
                samples: self.samples[start..start + win_len].to_vec(),
                fs: self.fs,
            });
            start += stride;
        }
        out
    }
}

/// Reflects an out-of-range index back into `0..len` (whole-sample symmetry
/// about both end points).
pub(crate) fn reflect_index(idx: isize, len: usize) -> usize {
    debug_assert!(len > 0);
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let mut k = idx.rem_euclid(period);
    if k >= len as isize {
        k = period - k;
    }
    k as usize
}

/// Zeroth-order modified Bessel function of the first kind, by power series.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-16 {
            return sum;
        }
        k += 1.0;
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = core::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Half-width of the interpolation kernel in input samples (64 taps per
/// polyphase branch).
const KERNEL_HALF: usize = 32;
const KAISER_BETA: f64 = 8.0;
/// Fraction of the narrower Nyquist band kept below the anti-alias cutoff.
const CUTOFF_ROLLOFF: f64 = 0.945;

/// Resamples to `target_fs` by Kaiser-windowed sinc interpolation.
///
/// The anti-aliasing cutoff sits just below the narrower of the two Nyquist
/// frequencies, so content well inside the shared band is preserved while
/// alias products are rejected. Boundary overhang is handled by even-symmetric
/// reflection. Resampling to the current rate returns the signal unchanged,
/// sample for sample.
pub fn resample(signal: &Signal, target_fs: f64) -> Result<Signal> {
    if !(target_fs > 0.0) || !target_fs.is_finite() {
        return Err(Error::InvalidBand(format!(
            "target rate {} Hz must be positive",
            target_fs
        )));
    }
    if signal.len() < 2 {
        return Err(Error::SignalTooShort {
            needed: 2,
            got: signal.len(),
        });
    }
    if target_fs == signal.fs {
        return Ok(signal.clone());
    }

    let fs_in = signal.fs;
    let ratio = target_fs / fs_in;
    let n_in = signal.len();
    let n_out = ((n_in as f64) * ratio).round().max(1.0) as usize;

    // Normalized cutoff in cycles per input sample.
    let c = 0.5 * CUTOFF_ROLLOFF * ratio.min(1.0);
    let half_width = KERNEL_HALF as f64;
    let i0_beta = bessel_i0(KAISER_BETA);
    let x = signal.samples();

    let mut out = Vec::with_capacity(n_out);
    for n in 0..n_out {
        // Center of the kernel in input-sample coordinates.
        let p = n as f64 / ratio;
        let i_lo = (p - half_width).ceil() as isize;
        let i_hi = (p + half_width).floor() as isize;
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for i in i_lo..=i_hi {
            let tau = i as f64 - p;
            let frac = tau / half_width;
            let arg = 1.0 - frac * frac;
            if arg < 0.0 {
                continue;
            }
            let w = bessel_i0(KAISER_BETA * arg.sqrt()) / i0_beta * sinc(2.0 * c * tau);
            let v = if i >= 0 && (i as usize) < n_in {
                x[i as usize]
            } else {
                x[reflect_index(i, n_in)]
            };
            acc += w * v;
            wsum += w;
        }
        // Unity DC gain per phase.
        out.push(acc / wsum);
    }
    Signal::new(out, target_fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn tone(freq: f64, fs: f64, n: usize, phase: f64) -> Signal {
        let samples = (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / fs + phase).sin())
            .collect();
        Signal::new(samples, fs).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(Signal::new(vec![0.0, f64::NAN], 100.0).is_err());
        assert!(Signal::new(vec![0.0, f64::INFINITY], 100.0).is_err());
        assert!(Signal::new(vec![0.0, 1.0], 0.0).is_err());
        assert!(Signal::new(vec![], 100.0).is_err());
        assert!(Signal::new(vec![0.0, 1.0], 360.0).is_ok());
    }

    #[test]
    fn split_windows_counts() {
        let s = Signal::new(vec![0.0; 1024], 500.0).unwrap();
        assert_eq!(s.split_windows(512, 512).len(), 2);

        let s = Signal::new(vec![1.0; 512], 500.0).unwrap();
        let w = s.split_windows(512, 512);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].samples(), s.samples());

        let s = Signal::new(vec![0.0; 1000], 500.0).unwrap();
        let w = s.split_windows(512, 256);
        assert_eq!(w.len(), 2);
        // Windows start at 0 and 256.
        let raw: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let s = Signal::new(raw, 500.0).unwrap();
        let w = s.split_windows(512, 256);
        assert_eq!(w[0].samples()[0], 0.0);
        assert_eq!(w[1].samples()[0], 256.0);
    }

    #[test]
    fn split_windows_too_long_is_empty() {
        let s = Signal::new(vec![0.0; 100], 500.0).unwrap();
        assert!(s.split_windows(512, 512).is_empty());
    }

    #[test]
    fn reflect_index_symmetry() {
        assert_eq!(reflect_index(-1, 10), 1);
        assert_eq!(reflect_index(-3, 10), 3);
        assert_eq!(reflect_index(10, 10), 8);
        assert_eq!(reflect_index(12, 10), 6);
        assert_eq!(reflect_index(5, 10), 5);
    }

    #[test]
    fn resample_identity_is_exact() {
        let s = tone(5.0, 360.0, 720, 0.3);
        let r = resample(&s, 360.0).unwrap();
        assert_eq!(r.samples(), s.samples());
    }

    #[test]
    fn resample_length_and_rate() {
        // 10 s at 500 Hz -> 10 s at 125 Hz, 1250 samples.
        let s = tone(5.0, 500.0, 5000, 0.0);
        let r = resample(&s, 125.0).unwrap();
        assert_eq!(r.len(), 1250);
        assert_eq!(r.fs(), 125.0);
        assert!((r.duration_s() - s.duration_s()).abs() <= 1.0 / 125.0);
    }

    #[test]
    fn resample_sine_matches_analytic() {
        // 5 Hz sine at 360 Hz resampled to 125 Hz, checked against the
        // analytic waveform away from the edges.
        let fs = 360.0;
        let n = 3600;
        let s = tone(5.0, fs, n, 0.0);
        let r = resample(&s, 125.0).unwrap();
        let mut max_err: f64 = 0.0;
        for i in 10..r.len() - 10 {
            let t = i as f64 / 125.0;
            let want = (2.0 * PI * 5.0 * t).sin();
            max_err = max_err.max((r.samples()[i] - want).abs());
        }
        assert!(max_err < 1e-3, "max_err = {}", max_err);
    }

    #[test]
    fn resample_round_trip_band_limited() {
        // Content below fs/4 survives fs -> fs/2 -> fs within 1e-3 RMS.
        let fs = 400.0;
        let n = 4000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * 17.0 * t).sin()
                    + 0.7 * (2.0 * PI * 41.0 * t + 1.1).sin()
                    + 0.4 * (2.0 * PI * 72.0 * t + 0.4).sin()
            })
            .collect();
        let s = Signal::new(samples, fs).unwrap();
        let down = resample(&s, fs / 2.0).unwrap();
        let back = resample(&down, fs).unwrap();
        let lo = 200;
        let hi = s.len() - 200;
        let mut err = 0.0;
        let mut ref_pow = 0.0;
        for i in lo..hi {
            let d = back.samples()[i] - s.samples()[i];
            err += d * d;
            ref_pow += s.samples()[i] * s.samples()[i];
        }
        let rel_rms = (err / ref_pow).sqrt();
        assert!(rel_rms < 1e-3, "relative rms = {}", rel_rms);
    }

    #[test]
    fn resample_constant_stays_constant() {
        let s = Signal::new(vec![2.5; 1000], 250.0).unwrap();
        let r = resample(&s, 100.0).unwrap();
        for v in r.samples() {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_rejects_too_short() {
        let s = Signal::new(vec![1.0], 100.0);
        // Single-sample signals cannot be constructed invalidly here; build a
        // 1-sample signal directly to hit the length check.
        assert!(s.is_ok());
        assert!(matches!(
            resample(&s.unwrap(), 50.0),
            Err(Error::SignalTooShort { .. })
        ));
    }
}
