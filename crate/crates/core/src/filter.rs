//! Zero-phase Butterworth filtering.
//!
//! Filters are designed as biquad cascades via the bilinear transform and
//! applied forward-backward, so the pass is phase-neutral and the effective
//! magnitude response is the square of the single-pass design. Edges are
//! handled by even-symmetric reflection padding of one settling length.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] use num_traits::Float;

use crate::error::{Error, Result};
use crate::signal::{reflect_index, Signal};

#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    /// Largest pole magnitude, used to size the settling pad.
    fn pole_radius(&self) -> f64 {
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc < 0.0 {
            self.a2.abs().sqrt()
        } else {
            let r1 = (-self.a1 + disc.sqrt()) / 2.0;
            let r2 = (-self.a1 - disc.sqrt()) / 2.0;
            r1.abs().max(r2.abs())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Lowpass,
    Highpass,
}

/// Butterworth biquad cascade of the given (even) order.
fn design(kind: Kind, order: usize, fc: f64, fs: f64) -> Vec<Biquad> {
    debug_assert!(order >= 2 && order % 2 == 0);
    debug_assert!(fc > 0.0 && fc < fs / 2.0);
    let k = (PI * fc / fs).tan();
    let k2 = k * k;
    let n = order as f64;
    let mut stages = Vec::with_capacity(order / 2);
    for s in 0..order / 2 {
        let q = 1.0 / (2.0 * (PI * (2.0 * s as f64 + 1.0) / (2.0 * n)).cos());
        let norm = 1.0 / (1.0 + k / q + k2);
        let (b0, b1, b2) = match kind {
            Kind::Lowpass => (k2 * norm, 2.0 * k2 * norm, k2 * norm),
            Kind::Highpass => (norm, -2.0 * norm, norm),
        };
        stages.push(Biquad {
            b0,
            b1,
            b2,
            a1: 2.0 * (k2 - 1.0) * norm,
            a2: (1.0 - k / q + k2) * norm,
        });
    }
    stages
}

/// Single forward pass of the cascade (direct form II transposed, zero state).
fn run_cascade(stages: &[Biquad], x: &mut [f64]) {
    for bq in stages {
        let mut z1 = 0.0;
        let mut z2 = 0.0;
        for v in x.iter_mut() {
            let xin = *v;
            let y = bq.b0 * xin + z1;
            z1 = bq.b1 * xin - bq.a1 * y + z2;
            z2 = bq.b2 * xin - bq.a2 * y;
            *v = y;
        }
    }
}

/// Samples needed for the impulse response to decay below 1e-8.
fn settle_len(stages: &[Biquad]) -> usize {
    let r_max = stages
        .iter()
        .map(|b| b.pole_radius())
        .fold(0.0f64, f64::max)
        .min(0.999999);
    if r_max <= 0.0 {
        return 16;
    }
    ((-18.42 / r_max.ln()).ceil() as usize).max(16)
}

/// Forward-backward filtering with even-symmetric reflection padding.
fn filtfilt(stages: &[Biquad], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let pad = settle_len(stages).min(n.saturating_sub(1));
    let total = n + 2 * pad;
    let mut buf = Vec::with_capacity(total);
    for i in 0..total {
        let idx = i as isize - pad as isize;
        buf.push(x[reflect_index(idx, n)]);
    }
    run_cascade(stages, &mut buf);
    buf.reverse();
    run_cascade(stages, &mut buf);
    buf.reverse();
    buf[pad..pad + n].to_vec()
}

fn check_edges(fs: f64, f_lo: f64, f_hi: f64) -> Result<()> {
    if !(f_lo >= 0.0) || !(f_lo < f_hi) || f_hi > fs / 2.0 {
        return Err(Error::InvalidBand(format!(
            "band ({}, {}) Hz invalid for fs = {} Hz",
            f_lo, f_hi, fs
        )));
    }
    Ok(())
}

/// Order of each pass (the forward-backward application squares it).
pub const BUTTER_ORDER: usize = 4;

/// Zero-phase band-pass between `f_lo` and `f_hi`.
///
/// A zero `f_lo` degenerates to a pure low-pass; an `f_hi` at Nyquist
/// degenerates to a pure high-pass. The mean is removed up front whenever
/// `f_lo > 0`, so DC rejection is exact.
pub fn bandpass(signal: &Signal, f_lo: f64, f_hi: f64) -> Result<Signal> {
    let fs = signal.fs();
    check_edges(fs, f_lo, f_hi)?;
    if signal.len() < 2 {
        return Err(Error::SignalTooShort {
            needed: 2,
            got: signal.len(),
        });
    }

    let mut x: Vec<f64> = signal.samples().to_vec();
    if f_lo > 0.0 {
        let mu = signal.mean();
        for v in x.iter_mut() {
            *v -= mu;
        }
    }
    if f_lo > 0.0 {
        x = filtfilt(&design(Kind::Highpass, BUTTER_ORDER, f_lo, fs), &x);
    }
    if f_hi < fs / 2.0 {
        x = filtfilt(&design(Kind::Lowpass, BUTTER_ORDER, f_hi, fs), &x);
    }
    Signal::new(x, fs)
}

/// Zero-phase low-pass at `fc`.
pub fn lowpass(signal: &Signal, fc: f64) -> Result<Signal> {
    bandpass(signal, 0.0, fc)
}

/// Zero-phase high-pass at `fc` (mean removed first).
pub fn highpass(signal: &Signal, fc: f64) -> Result<Signal> {
    let fs = signal.fs();
    if !(fc > 0.0) || fc >= fs / 2.0 {
        return Err(Error::InvalidBand(format!(
            "high-pass edge {} Hz invalid for fs = {} Hz",
            fc, fs
        )));
    }
    let mu = signal.mean();
    let x: Vec<f64> = signal.samples().iter().map(|v| v - mu).collect();
    let y = filtfilt(&design(Kind::Highpass, BUTTER_ORDER, fc, fs), &x);
    Signal::new(y, fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{band_power, periodogram};

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn dc_offset_is_rejected() {
        let s = Signal::new(vec![5.0; 5000], 500.0).unwrap();
        let y = bandpass(&s, 0.5, 40.0).unwrap();
        let mean = y.mean().abs();
        assert!(mean < 1e-6 * 5.0, "residual mean = {}", mean);
    }

    #[test]
    fn out_of_band_tones_are_suppressed() {
        let fs = 500.0;
        let n = 10000;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * 2.0 * t).sin() + (2.0 * PI * 60.0 * t).sin()
            })
            .collect();
        let s = Signal::new(x, fs).unwrap();
        let y = bandpass(&s, 5.0, 40.0).unwrap();
        let component_rms = (0.5f64).sqrt();
        let residual = rms(y.samples());
        assert!(
            residual < 0.05 * component_rms,
            "residual rms = {}",
            residual
        );
    }

    #[test]
    fn in_band_tone_passes_unity() {
        let fs = 500.0;
        let n = 10000;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 10.0 * i as f64 / fs).sin())
            .collect();
        let s = Signal::new(x, fs).unwrap();
        let y = bandpass(&s, 5.0, 40.0).unwrap();
        let ratio = rms(y.samples()) / rms(s.samples());
        assert!((ratio - 1.0).abs() < 0.02, "gain = {}", ratio);
    }

    #[test]
    fn white_noise_power_lands_in_band() {
        let mut state = 5u64;
        let mut next = || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let x: Vec<f64> = (0..40000).map(|_| next()).collect();
        let s = Signal::new(x, 500.0).unwrap();
        let y = bandpass(&s, 5.0, 15.0).unwrap();
        let spec = periodogram(&y).unwrap();
        let in_band = band_power(&spec, 5.0, 15.0).unwrap();
        let total = spec.total_power();
        assert!(in_band / total > 0.9, "share = {}", in_band / total);
    }

    #[test]
    fn invalid_bands_error() {
        let s = Signal::new(vec![0.0; 100], 100.0).unwrap();
        assert!(bandpass(&s, 10.0, 5.0).is_err());
        assert!(bandpass(&s, -1.0, 5.0).is_err());
        assert!(bandpass(&s, 5.0, 60.0).is_err());
    }
}
