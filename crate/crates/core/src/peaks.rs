//! R-peak detection, beat matching, and heart-rate series.
//!
//! Two structurally different detectors are provided so their agreement can
//! serve as a quality signal: an energy detector (band-pass, differentiate,
//! square, integrate, adaptive dual threshold) and a slope detector
//! (band-pass, absolute first difference, robust rolling threshold). Both
//! refine their fiducials to the local extremum of the raw waveform.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::filter::bandpass;
use crate::signal::Signal;

/// Which algorithm produced a set of beat annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorId {
    Energy,
    Derivative,
    /// Reference annotations loaded from a file.
    External,
}

/// Strictly increasing R-peak sample indices from one detector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatAnnotations {
    indices: Vec<usize>,
    detector: DetectorId,
}

impl BeatAnnotations {
    pub fn new(indices: Vec<usize>, detector: DetectorId) -> Result<Self> {
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "beat indices must be strictly increasing".into(),
            ));
        }
        Ok(BeatAnnotations { indices, detector })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn detector(&self) -> DetectorId {
        self.detector
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Outcome of pairing two annotation streams.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatMatchResult {
    pub matched: usize,
    pub only_a: usize,
    pub only_b: usize,
    pub pairs: Vec<(usize, usize)>,
}

/// Refractory period between accepted beats, seconds.
pub const REFRACTORY_S: f64 = 0.2;
/// Default beat-agreement tolerance, seconds.
pub const MATCH_TOL_S: f64 = 0.15;

const MIN_FS: f64 = 100.0;
const MIN_DURATION_S: f64 = 2.0;

fn check_detector_input(signal: &Signal) -> Result<()> {
    if signal.fs() < MIN_FS {
        return Err(Error::InvalidBand(format!(
            "detector needs fs >= {} Hz, got {}",
            MIN_FS,
            signal.fs()
        )));
    }
    if signal.duration_s() < MIN_DURATION_S {
        return Err(Error::SignalTooShort {
            needed: (MIN_DURATION_S * signal.fs()) as usize,
            got: signal.len(),
        });
    }
    Ok(())
}

/// Linear-interpolation quantile of unsorted data.
pub(crate) fn quantile(data: &[f64], q: f64) -> f64 {
    debug_assert!(!data.is_empty());
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }
}

/// Moves a fiducial to the raw-signal extremum (largest deviation from the
/// local mean) within +/- `half_s` seconds.
fn refine_to_extremum(signal: &Signal, idx: usize, half_s: f64) -> usize {
    let half = (half_s * signal.fs()).round() as usize;
    let lo = idx.saturating_sub(half);
    let hi = (idx + half + 1).min(signal.len());
    let x = signal.samples();
    let local_mean = x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
    let mut best = idx;
    let mut best_dev = -1.0;
    for i in lo..hi {
        let dev = (x[i] - local_mean).abs();
        if dev > best_dev {
            best_dev = dev;
            best = i;
        }
    }
    best
}

fn dedup_refined(mut beats: Vec<usize>, refractory: usize) -> Vec<usize> {
    beats.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(beats.len());
    for b in beats {
        match out.last() {
            Some(&last) if b <= last || b - last < refractory => {}
            _ => out.push(b),
        }
    }
    out
}

/// Candidates this close to the signal boundary are discarded: the zero-phase
/// filters have not settled there and their edge transients mimic beats.
pub const EDGE_GUARD_S: f64 = 0.3;

/// Local maxima of `x` as (index, value), strictly rising into the peak.
fn local_maxima(x: &[f64], lo: usize, hi: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for i in lo.max(1)..hi.min(x.len().saturating_sub(1)) {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > 0.0 {
            out.push((i, x[i]));
        }
    }
    out
}

/// Energy-based detector: band-pass 5-15 Hz, five-point derivative, squaring,
/// centered moving-window integration over 0.15 s, then an adaptive dual
/// threshold with a 0.2 s refractory and search-back for missed beats.
/// Thresholds initialize from the 0.7 / 0.2 quantiles of the integrated
/// signal's local maxima over the first two seconds.
pub fn detect_energy(signal: &Signal) -> Result<BeatAnnotations> {
    check_detector_input(signal)?;
    let fs = signal.fs();
    let filtered = bandpass(signal, 5.0, 15.0.min(fs / 2.0 - 1.0))?;
    let x = filtered.samples();
    let n = x.len();

    // Five-point derivative, squared.
    let mut sq = vec![0.0f64; n];
    for i in 0..n {
        let at = |j: isize| -> f64 {
            let k = j.clamp(0, n as isize - 1) as usize;
            x[k]
        };
        let i = i as isize;
        let d = (2.0 * at(i + 2) + at(i + 1) - at(i - 1) - 2.0 * at(i - 2)) / 8.0;
        sq[i as usize] = d * d;
    }

    // Centered moving-window integral so the peak stays on the QRS.
    let w = ((0.15 * fs).round() as usize).max(1);
    let half = w / 2;
    let mut cumsum = vec![0.0f64; n + 1];
    for i in 0..n {
        cumsum[i + 1] = cumsum[i] + sq[i];
    }
    let mwi: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (cumsum[hi] - cumsum[lo]) / (hi - lo) as f64
        })
        .collect();

    let guard = (EDGE_GUARD_S * fs).round() as usize;
    let peaks = local_maxima(&mwi, guard, n.saturating_sub(guard));
    if peaks.is_empty() {
        return BeatAnnotations::new(Vec::new(), DetectorId::Energy);
    }

    // Threshold initialization from the peak values of the first two seconds.
    let init_end = guard + (2.0 * fs) as usize;
    let init_vals: Vec<f64> = peaks
        .iter()
        .take_while(|(i, _)| *i < init_end)
        .map(|&(_, v)| v)
        .collect();
    let init_vals = if init_vals.is_empty() {
        peaks.iter().map(|&(_, v)| v).collect()
    } else {
        init_vals
    };
    let mut spki = quantile(&init_vals, 0.7);
    let mut npki = quantile(&init_vals, 0.2);
    let refractory = (REFRACTORY_S * fs).round() as usize;

    let mut beats_raw: Vec<(usize, f64)> = Vec::new();
    let threshold = |spki: f64, npki: f64| npki + 0.25 * (spki - npki);
    let avg_rr = |beats: &[(usize, f64)]| -> Option<usize> {
        if beats.len() < 2 {
            return None;
        }
        let tail = &beats[beats.len().saturating_sub(9)..];
        let sum: usize = tail.windows(2).map(|w| w[1].0 - w[0].0).sum();
        Some(sum / (tail.len() - 1))
    };

    let mut k = 0;
    while k < peaks.len() {
        let (i, v) = peaks[k];
        // Search-back before processing a peak that arrives too late.
        if let (Some(&(lb, _)), Some(rr)) = (beats_raw.last(), avg_rr(&beats_raw)) {
            if i > lb + (1.66 * rr as f64) as usize {
                let t2 = 0.5 * threshold(spki, npki);
                let best = peaks[..k]
                    .iter()
                    .filter(|(j, pv)| *j >= lb + refractory && *pv > t2)
                    .max_by(|a, b| a.1.total_cmp(&b.1));
                if let Some(&(j, pv)) = best {
                    spki = 0.25 * pv + 0.75 * spki;
                    beats_raw.push((j, pv));
                    continue; // re-evaluate the current peak with the new beat
                }
            }
        }
        match beats_raw.last().copied() {
            Some((lb, lv)) if i - lb < refractory => {
                // Within the refractory window the larger peak wins; this
                // keeps the QRS when a P-wave shoulder crossed first.
                if v > lv {
                    beats_raw.pop();
                    beats_raw.push((i, v));
                    spki = 0.125 * v + 0.875 * spki;
                }
            }
            _ => {
                if v > threshold(spki, npki) {
                    beats_raw.push((i, v));
                    spki = 0.125 * v + 0.875 * spki;
                } else {
                    npki = 0.125 * v + 0.875 * npki;
                }
            }
        }
        k += 1;
    }

    let refined: Vec<usize> = beats_raw
        .iter()
        .map(|&(b, _)| refine_to_extremum(signal, b, 0.05))
        .collect();
    BeatAnnotations::new(dedup_refined(refined, refractory), DetectorId::Energy)
}

/// Slope detector: band-pass 8-20 Hz, absolute first difference, threshold at
/// the rolling median plus three rolling median absolute deviations (1 s
/// granularity), 0.2 s refractory, refinement to the raw extremum.
pub fn detect_derivative(signal: &Signal) -> Result<BeatAnnotations> {
    check_detector_input(signal)?;
    let fs = signal.fs();
    let filtered = bandpass(signal, 8.0, 20.0.min(fs / 2.0 - 1.0))?;
    let x = filtered.samples();
    let n = x.len();

    let mut d = vec![0.0f64; n];
    for i in 0..n - 1 {
        d[i] = (x[i + 1] - x[i]).abs();
    }
    d[n - 1] = d[n - 2];

    // Blockwise robust threshold: median + 3 * MAD per one-second block.
    let block = (fs as usize).max(1);
    let n_blocks = n.div_ceil(block);
    let mut thr = vec![0.0f64; n_blocks];
    for b in 0..n_blocks {
        let lo = b * block;
        let hi = ((b + 1) * block).min(n);
        let seg = &d[lo..hi];
        let med = quantile(seg, 0.5);
        let deviations: Vec<f64> = seg.iter().map(|v| (v - med).abs()).collect();
        let mad = quantile(&deviations, 0.5);
        thr[b] = med + 3.0 * mad;
    }

    let guard = (EDGE_GUARD_S * fs).round() as usize;
    let interior = &d[guard.min(n)..n.saturating_sub(guard)];
    let global_thr = if interior.is_empty() {
        0.0
    } else {
        let med = quantile(interior, 0.5);
        let dev: Vec<f64> = interior.iter().map(|v| (v - med).abs()).collect();
        med + 3.0 * quantile(&dev, 0.5)
    };

    let refractory = (REFRACTORY_S * fs).round() as usize;
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    for i in guard.max(1)..n.saturating_sub(guard).min(n - 1) {
        if d[i] > d[i - 1] && d[i] >= d[i + 1] {
            let t = thr[i / block].max(global_thr);
            if d[i] > t && t > 0.0 {
                candidates.push((i, d[i]));
            }
        }
    }
    // Non-maximum suppression: the steepest slope wins each refractory
    // neighborhood, so QRS outranks its own P/T satellites.
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut accepted = alloc::collections::BTreeSet::new();
    let mut beats_raw: Vec<usize> = Vec::new();
    for (i, _) in candidates {
        let lo = i.saturating_sub(refractory - 1);
        let hi = i + refractory;
        if accepted.range(lo..hi).next().is_none() {
            accepted.insert(i);
            beats_raw.push(i);
        }
    }
    beats_raw.sort_unstable();

    let refined: Vec<usize> = beats_raw
        .iter()
        .map(|&b| refine_to_extremum(signal, b, 0.05))
        .collect();
    BeatAnnotations::new(dedup_refined(refined, refractory), DetectorId::Derivative)
}

/// Greedy chronological beat matching: each beat in `a` pairs with the
/// nearest unmatched beat of `b` within `tol_s`; equidistant candidates break
/// toward the earlier index.
pub fn match_beats(
    a: &BeatAnnotations,
    b: &BeatAnnotations,
    tol_s: f64,
    fs: f64,
) -> BeatMatchResult {
    let tol = (tol_s * fs).round() as i64;
    let bi = b.indices();
    let mut taken = vec![false; bi.len()];
    let mut pairs = Vec::new();
    let mut start = 0usize;
    for &ai in a.indices() {
        let ai = ai as i64;
        while start < bi.len() && (bi[start] as i64) < ai - tol {
            start += 1;
        }
        let mut best: Option<(usize, i64)> = None;
        let mut j = start;
        while j < bi.len() && (bi[j] as i64) <= ai + tol {
            if !taken[j] {
                let dist = (bi[j] as i64 - ai).abs();
                let better = match best {
                    None => true,
                    Some((_, bd)) => dist < bd,
                };
                if better {
                    best = Some((j, dist));
                }
            }
            j += 1;
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            pairs.push((ai as usize, bi[j]));
        }
    }
    let matched = pairs.len();
    BeatMatchResult {
        matched,
        only_a: a.len() - matched,
        only_b: b.len() - matched,
        pairs,
    }
}

/// RR intervals in seconds.
pub fn rr_intervals(beats: &BeatAnnotations, fs: f64) -> Result<Vec<f64>> {
    if beats.len() < 2 {
        return Err(Error::InsufficientBeats {
            needed: 2,
            got: beats.len(),
        });
    }
    Ok(beats
        .indices()
        .windows(2)
        .map(|w| (w[1] - w[0]) as f64 / fs)
        .collect())
}

/// Instantaneous heart rate, one sample per RR interval at its midpoint.
pub fn hr_series(beats: &BeatAnnotations, fs: f64) -> Result<Vec<(f64, f64)>> {
    let rr = rr_intervals(beats, fs)?;
    let idx = beats.indices();
    Ok(rr
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let mid = (idx[k] + idx[k + 1]) as f64 / (2.0 * fs);
            (mid, 60.0 / r)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::clean_ecg;

    fn ann(v: Vec<usize>) -> BeatAnnotations {
        BeatAnnotations::new(v, DetectorId::External).unwrap()
    }

    fn sensitivity(found: &BeatAnnotations, truth: &[usize], fs: f64) -> f64 {
        let t = ann(truth.to_vec());
        let m = match_beats(&t, found, MATCH_TOL_S, fs);
        m.matched as f64 / truth.len() as f64
    }

    #[test]
    fn energy_detector_finds_all_synthetic_beats() {
        let fs = 500.0;
        let (sig, truth) = clean_ecg(fs, 10.0, 72.0);
        let beats = detect_energy(&sig).unwrap();
        assert_eq!(beats.len(), 12, "found {} beats", beats.len());
        for (&f, &t) in beats.indices().iter().zip(&truth) {
            assert!(
                (f as i64 - t as i64).abs() <= 2,
                "beat at {} vs truth {}",
                f,
                t
            );
        }
    }

    #[test]
    fn derivative_detector_agrees_on_clean_input() {
        let fs = 500.0;
        let (sig, _) = clean_ecg(fs, 10.0, 72.0);
        let a = detect_energy(&sig).unwrap();
        let b = detect_derivative(&sig).unwrap();
        assert_eq!(a.len(), b.len());
        for (&ia, &ib) in a.indices().iter().zip(b.indices()) {
            assert!((ia as i64 - ib as i64).abs() <= 3);
        }
    }

    #[test]
    fn both_detectors_are_sensitive_across_rates() {
        for &hr in &[40.0, 60.0, 100.0, 140.0, 180.0] {
            let (sig, truth) = clean_ecg(360.0, 30.0, hr);
            let e = detect_energy(&sig).unwrap();
            let d = detect_derivative(&sig).unwrap();
            assert!(
                sensitivity(&e, &truth, 360.0) >= 0.99,
                "energy detector at {} bpm",
                hr
            );
            assert!(
                sensitivity(&d, &truth, 360.0) >= 0.99,
                "derivative detector at {} bpm",
                hr
            );
        }
    }

    #[test]
    fn flat_line_has_no_beats() {
        let s = Signal::new(vec![0.0; 5000], 500.0).unwrap();
        assert_eq!(detect_energy(&s).unwrap().len(), 0);
        assert_eq!(detect_derivative(&s).unwrap().len(), 0);
    }

    #[test]
    fn pure_mains_tone_is_rejected() {
        let fs = 500.0;
        let x: Vec<f64> = (0..5000)
            .map(|i| (2.0 * core::f64::consts::PI * 50.0 * i as f64 / fs).sin())
            .collect();
        let s = Signal::new(x, fs).unwrap();
        assert_eq!(detect_derivative(&s).unwrap().len(), 0);
    }

    #[test]
    fn detector_output_is_refractory_spaced() {
        let (sig, _) = clean_ecg(500.0, 20.0, 180.0);
        let refractory = (REFRACTORY_S * 500.0) as usize;
        for beats in [detect_energy(&sig).unwrap(), detect_derivative(&sig).unwrap()] {
            assert!(beats
                .indices()
                .windows(2)
                .all(|w| w[1] - w[0] >= refractory));
        }
    }

    #[test]
    fn match_identical_lists() {
        let a = ann(vec![100, 600, 1100]);
        let m = match_beats(&a, &a, 0.15, 500.0);
        assert_eq!(m.matched, 3);
        assert_eq!(m.only_a, 0);
        assert_eq!(m.only_b, 0);
    }

    #[test]
    fn match_window_arithmetic() {
        // tol 0.15 s at 500 Hz = 75 samples.
        let a = ann(vec![100, 600]);
        let b = ann(vec![110, 1200]);
        let m = match_beats(&a, &b, 0.15, 500.0);
        assert_eq!(m.matched, 1);
        assert_eq!(m.only_a, 1);
        assert_eq!(m.only_b, 1);
        assert_eq!(m.pairs, vec![(100, 110)]);
    }

    #[test]
    fn match_empty_side() {
        let a = ann(vec![100, 200, 300]);
        let b = ann(vec![]);
        let m = match_beats(&a, &b, 0.15, 500.0);
        assert_eq!(m.matched, 0);
        assert_eq!(m.only_a, 3);
        assert_eq!(m.only_b, 0);
    }

    #[test]
    fn match_counts_are_symmetric() {
        let a = ann(vec![100, 240, 600, 900]);
        let b = ann(vec![110, 620, 1400]);
        let m1 = match_beats(&a, &b, 0.15, 500.0);
        let m2 = match_beats(&b, &a, 0.15, 500.0);
        assert_eq!(m1.matched, m2.matched);
        assert_eq!(m1.only_a, m2.only_b);
        assert_eq!(m1.only_b, m2.only_a);
    }

    #[test]
    fn equidistant_tie_prefers_earlier() {
        let a = ann(vec![100]);
        let b = ann(vec![90, 110]);
        let m = match_beats(&a, &b, 0.15, 500.0);
        assert_eq!(m.pairs, vec![(100, 90)]);
    }

    #[test]
    fn hr_series_values() {
        // Beats every 0.5 s -> constant 120 bpm.
        let beats = ann(vec![0, 250, 500, 750]);
        let hr = hr_series(&beats, 500.0).unwrap();
        assert!(hr.iter().all(|&(_, bpm)| (bpm - 120.0).abs() < 1e-9));

        // Beats at 0, 1, 2.5 s -> HR [60, 40].
        let beats = ann(vec![0, 500, 1250]);
        let hr = hr_series(&beats, 500.0).unwrap();
        assert_eq!(hr.len(), 2);
        assert!((hr[0].1 - 60.0).abs() < 1e-9);
        assert!((hr[1].1 - 40.0).abs() < 1e-9);
    }

    #[test]
    fn hr_series_median_on_synthetic() {
        let (sig, _) = clean_ecg(500.0, 10.0, 72.0);
        let beats = detect_energy(&sig).unwrap();
        let hr = hr_series(&beats, 500.0).unwrap();
        let mut bpm: Vec<f64> = hr.iter().map(|&(_, v)| v).collect();
        bpm.sort_by(f64::total_cmp);
        let median = bpm[bpm.len() / 2];
        assert!((median - 72.0).abs() <= 1.0, "median = {}", median);
    }

    #[test]
    fn hr_series_needs_two_beats() {
        let beats = ann(vec![100]);
        assert!(matches!(
            hr_series(&beats, 500.0),
            Err(Error::InsufficientBeats { .. })
        ));
    }

    #[test]
    fn detector_rejects_short_or_slow_input() {
        let s = Signal::new(vec![0.0; 100], 500.0).unwrap();
        assert!(detect_energy(&s).is_err());
        let s = Signal::new(vec![0.0; 500], 50.0).unwrap();
        assert!(detect_energy(&s).is_err());
    }
}
