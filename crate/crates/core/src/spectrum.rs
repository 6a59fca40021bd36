//! Power-spectrum estimation and band integrals.
//!
//! The estimator is a single-taper Hann periodogram whose total integral is
//! calibrated to the biased variance of the (mean-removed) input, so band
//! ratios are directly comparable across windows and Parseval holds exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::Signal;
use crate::stats::Flagged;

/// One-sided power spectral density on the grid `k * fs / n`.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    freqs: Vec<f64>,
    power: Vec<f64>,
    df: f64,
}

impl PowerSpectrum {
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    /// Frequency grid spacing in Hz.
    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn max_freq(&self) -> f64 {
        *self.freqs.last().unwrap_or(&0.0)
    }

    /// Integral of the density over the whole one-sided band.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.df
    }
}

/// Minimum length accepted by [`periodogram`].
pub const MIN_PERIODOGRAM_LEN: usize = 16;

/// Hann-windowed periodogram, one-sided, mean removed before the transform.
///
/// The density is rescaled so that `sum(power) * df` equals the population
/// variance of the input. A zero-variance input produces an all-zero power
/// vector.
pub fn periodogram(signal: &Signal) -> Result<PowerSpectrum> {
    let n = signal.len();
    if n < MIN_PERIODOGRAM_LEN {
        return Err(Error::SignalTooShort {
            needed: MIN_PERIODOGRAM_LEN,
            got: n,
        });
    }
    let fs = signal.fs();
    let mu = signal.mean();
    let variance = signal.variance();

    let mut windowed = Vec::with_capacity(n);
    for (i, &v) in signal.samples().iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        windowed.push((v - mu) * w);
    }
    let spec = fft::fft_real(&windowed);

    let n_bins = n / 2 + 1;
    let df = fs / n as f64;
    let mut power: Vec<f64> = Vec::with_capacity(n_bins);
    for (k, bin) in spec.iter().take(n_bins).enumerate() {
        let mut p = bin.norm_sqr();
        let nyquist_bin = n % 2 == 0 && k == n / 2;
        if k != 0 && !nyquist_bin {
            p *= 2.0;
        }
        power.push(p);
    }

    // Calibrate the integral to the biased variance.
    let raw_total: f64 = power.iter().sum::<f64>() * df;
    if !crate::stats::variance_is_degenerate(variance, mu, n) && raw_total > 0.0 {
        let scale = variance / raw_total;
        for p in power.iter_mut() {
            *p *= scale;
        }
    } else {
        for p in power.iter_mut() {
            *p = 0.0;
        }
    }

    let freqs = (0..n_bins).map(|k| k as f64 * df).collect();
    Ok(PowerSpectrum { freqs, power, df })
}

/// Integral of the density over `[f_lo, f_hi]`, bin boundaries inclusive.
pub fn band_power(spec: &PowerSpectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    if !(f_lo >= 0.0) || f_lo > f_hi {
        return Err(Error::InvalidBand(format!(
            "band ({}, {}) Hz is inverted or negative",
            f_lo, f_hi
        )));
    }
    if f_hi > spec.max_freq() * (1.0 + 1e-12) {
        return Err(Error::InvalidBand(format!(
            "band edge {} Hz beyond spectrum maximum {} Hz",
            f_hi,
            spec.max_freq()
        )));
    }
    let tol = spec.df * 1e-9;
    let sum: f64 = spec
        .freqs
        .iter()
        .zip(&spec.power)
        .filter(|(f, _)| **f >= f_lo - tol && **f <= f_hi + tol)
        .map(|(_, p)| *p)
        .sum();
    Ok(sum * spec.df)
}

/// Like [`band_power`] but with the upper edge clamped to the spectrum range,
/// for fixed literature bands applied to low-rate signals.
pub fn band_power_clamped(spec: &PowerSpectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    band_power(spec, f_lo.min(spec.max_freq()), f_hi.min(spec.max_freq()))
}

/// Spectral flatness (geometric mean over arithmetic mean) of the density
/// bins inside `[f_lo, f_hi]`, DC bin excluded. Lies in [0, 1]; degenerate
/// (all-zero band) inputs flag and return 0.
pub fn spectral_flatness(spec: &PowerSpectrum, f_lo: f64, f_hi: f64) -> Result<Flagged> {
    let hi = f_hi.min(spec.max_freq());
    if !(f_lo >= 0.0) || f_lo > hi {
        return Err(Error::InvalidBand(format!("band ({}, {})", f_lo, f_hi)));
    }
    let tol = spec.df * 1e-9;
    let bins: Vec<f64> = spec
        .freqs
        .iter()
        .zip(&spec.power)
        .filter(|(f, _)| **f > tol && **f >= f_lo - tol && **f <= hi + tol)
        .map(|(_, p)| *p)
        .collect();
    if bins.is_empty() {
        return Ok(Flagged::degenerate(0.0));
    }
    let am = bins.iter().sum::<f64>() / bins.len() as f64;
    if am <= 0.0 {
        return Ok(Flagged::degenerate(0.0));
    }
    if bins.iter().any(|&p| p <= 0.0) {
        // Geometric mean collapses to zero.
        return Ok(Flagged::ok(0.0));
    }
    let mean_ln = bins.iter().map(|p| p.ln()).sum::<f64>() / bins.len() as f64;
    Ok(Flagged::ok((mean_ln.exp() / am).min(1.0)))
}

/// Spectral moment of the given order: integral of `f^order * power`.
pub fn spectral_moment(spec: &PowerSpectrum, order: u32) -> f64 {
    spec.freqs
        .iter()
        .zip(&spec.power)
        .map(|(f, p)| f.powi(order as i32) * p)
        .sum::<f64>()
        * spec.df
}

/// Hjorth-style signal purity: `m2^2 / (m0 * m4)` from the spectral moments
/// of order 0, 2, 4. Equals 1 for a single tone; degenerate spectra flag 0.
pub fn hjorth_purity(spec: &PowerSpectrum) -> Flagged {
    let m0 = spectral_moment(spec, 0);
    let m2 = spectral_moment(spec, 2);
    let m4 = spectral_moment(spec, 4);
    if m0 <= 0.0 || m4 <= 0.0 {
        return Flagged::degenerate(0.0);
    }
    Flagged::ok(((m2 * m2) / (m0 * m4)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, fs: f64, n: usize) -> Signal {
        let samples = (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / fs).sin())
            .collect();
        Signal::new(samples, fs).unwrap()
    }

    fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_add(0x9E3779B97F4A7C15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
                z = z ^ (z >> 31);
                (z as f64 / u64::MAX as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn parseval_calibration_holds() {
        for seed in 0..5u64 {
            let n = 1000 + seed as usize * 137;
            let s = Signal::new(white_noise(n, seed), 360.0).unwrap();
            let spec = periodogram(&s).unwrap();
            let var = s.variance();
            assert!((spec.total_power() - var).abs() / var < 0.01);
        }
    }

    #[test]
    fn tone_power_is_concentrated() {
        // Unit 10 Hz sine, 10 s at 500 Hz: at least 99% of the power within
        // 10 +/- 0.5 Hz.
        let s = tone(10.0, 500.0, 5000);
        let spec = periodogram(&s).unwrap();
        let near = band_power(&spec, 9.5, 10.5).unwrap();
        let total = spec.total_power();
        assert!(near / total >= 0.99, "share = {}", near / total);
    }

    #[test]
    fn constant_signal_zero_power() {
        let s = Signal::new(vec![3.3; 256], 100.0).unwrap();
        let spec = periodogram(&s).unwrap();
        assert!(spec.power().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn white_noise_power_splits_evenly() {
        let s = Signal::new(white_noise(40000, 7), 500.0).unwrap();
        let spec = periodogram(&s).unwrap();
        let lower = band_power(&spec, 0.0, 125.0).unwrap();
        let total = band_power(&spec, 0.0, 250.0).unwrap();
        let share = lower / total;
        assert!((share - 0.5).abs() <= 0.05, "share = {}", share);
    }

    #[test]
    fn band_power_full_range_and_empty() {
        let s = tone(10.0, 500.0, 5000);
        let spec = periodogram(&s).unwrap();
        let full = band_power(&spec, 0.0, 250.0).unwrap();
        assert!((full - s.variance()).abs() / s.variance() < 0.01);
        // Off-bin zero-width band has no bins.
        let df = spec.df();
        let off_bin = 0.5 * df + 3.0 * df;
        assert_eq!(band_power(&spec, off_bin, off_bin).unwrap(), 0.0);
        assert!(band_power(&spec, 20.0, 10.0).is_err());
    }

    #[test]
    fn band_power_tone_ratio() {
        let s = tone(10.0, 500.0, 5000);
        let spec = periodogram(&s).unwrap();
        let in_band = band_power(&spec, 5.0, 15.0).unwrap();
        let out_band = band_power(&spec, 20.0, 30.0).unwrap();
        assert!(in_band / out_band.max(f64::MIN_POSITIVE) > 100.0);
    }

    #[test]
    fn band_power_additivity_within_one_bin() {
        let s = Signal::new(white_noise(5000, 3), 500.0).unwrap();
        let spec = periodogram(&s).unwrap();
        let a = band_power(&spec, 0.0, 60.0).unwrap();
        let b = band_power(&spec, 60.0, 130.0).unwrap();
        let c = band_power(&spec, 0.0, 130.0).unwrap();
        let max_bin = spec.power().iter().cloned().fold(0.0f64, f64::max) * spec.df();
        assert!((a + b - c).abs() <= max_bin + 1e-12);
    }

    #[test]
    fn flatness_extremes() {
        let noise = Signal::new(white_noise(5000, 11), 500.0).unwrap();
        let spec = periodogram(&noise).unwrap();
        let f_noise = spectral_flatness(&spec, 0.0, 250.0).unwrap();
        assert!(f_noise.value > 0.5, "noise flatness = {}", f_noise.value);

        let pure = tone(10.0, 500.0, 5000);
        let spec = periodogram(&pure).unwrap();
        let f_tone = spectral_flatness(&spec, 0.0, 40.0).unwrap();
        assert!(f_tone.value < 0.1, "tone flatness = {}", f_tone.value);
    }

    #[test]
    fn purity_of_single_tone_near_one() {
        let s = tone(8.0, 360.0, 3600);
        let spec = periodogram(&s).unwrap();
        let p = hjorth_purity(&spec);
        assert!(!p.degenerate);
        assert!((p.value - 1.0).abs() <= 0.05, "purity = {}", p.value);
    }

    #[test]
    fn too_short_signal_errors() {
        let s = Signal::new(vec![0.0, 1.0, 2.0], 100.0).unwrap();
        assert!(matches!(
            periodogram(&s),
            Err(Error::SignalTooShort { .. })
        ));
    }
}
