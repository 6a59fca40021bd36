//! Signal quality indices and per-method feature vectors.
//!
//! Nine feature groupings are supported, from three-index classics up to the
//! 22-feature combined set. Every index degrades gracefully: a flat line or a
//! beatless window featurizes to worst-case convention values with degeneracy
//! flags instead of failing, because garbage input is exactly what a quality
//! classifier has to label.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::peaks::{
    self, detect_energy, hr_series, match_beats, rr_intervals, BeatAnnotations, MATCH_TOL_S,
};
use crate::signal::Signal;
use crate::spectrum::{self, PowerSpectrum};
use crate::stats::{approximate_entropy, moments, sample_entropy, Flagged};

/// Binary window quality, the classification target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityLabel {
    Clean = 0,
    Noisy = 1,
}

impl QualityLabel {
    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(QualityLabel::Clean),
            1 => Ok(QualityLabel::Noisy),
            other => Err(Error::InvalidParameter(format!(
                "quality label must be 0 or 1, got {}",
                other
            ))),
        }
    }
}

/// The benchmarked feature groupings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodId {
    Li2007,
    Clifford2012,
    Behar2013,
    Li2014,
    Geometric,
    AverageQrs,
    Zhao2018,
    Orphanidou2015,
    All,
}

impl MethodId {
    pub const ALL_METHODS: [MethodId; 9] = [
        MethodId::Li2007,
        MethodId::Clifford2012,
        MethodId::Behar2013,
        MethodId::Li2014,
        MethodId::Geometric,
        MethodId::AverageQrs,
        MethodId::Zhao2018,
        MethodId::Orphanidou2015,
        MethodId::All,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodId::Li2007 => "li2007",
            MethodId::Clifford2012 => "clifford2012",
            MethodId::Behar2013 => "behar2013",
            MethodId::Li2014 => "li2014",
            MethodId::Geometric => "geometric",
            MethodId::AverageQrs => "averageqrs",
            MethodId::Zhao2018 => "zhao2018",
            MethodId::Orphanidou2015 => "orphanidou2015",
            MethodId::All => "all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL_METHODS
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method id '{}'", s)))
    }

    /// Feature names in their canonical order for this grouping.
    pub fn feature_names(&self) -> &'static [&'static str] {
        match self {
            MethodId::Li2007 => &["b_sqi", "p_sqi", "k_sqi"],
            MethodId::Clifford2012 => &["b_sqi", "p_sqi", "k_sqi", "s_sqi", "f_sqi", "bas_sqi"],
            MethodId::Behar2013 => &["k_sqi", "s_sqi", "p_sqi", "b_sqi"],
            MethodId::Li2014 => &[
                "b_sqi", "p_sqi", "k_sqi", "s_sqi", "f_sqi", "bas_sqi", "bs_sqi", "e_sqi",
                "hf_sqi", "pur_sqi", "rsd_sqi", "ent_sqi",
            ],
            MethodId::Geometric => &[
                "hr_median",
                "hr_iqr",
                "hr_slope",
                "rr_std",
                "samp_en",
                "ap_en",
                "lf_rel",
                "hf_rel",
                "lf_hf_ratio",
            ],
            MethodId::AverageQrs => &["averageqrs_sqi"],
            MethodId::Zhao2018 => &["zhao2018_sqi"],
            MethodId::Orphanidou2015 => &["orphanidou_sqi"],
            // Union of all groups minus zhao2018_sqi; `samp_en` is the same
            // estimator as `ent_sqi` and appears once. 22 features.
            MethodId::All => &[
                "b_sqi",
                "p_sqi",
                "k_sqi",
                "s_sqi",
                "f_sqi",
                "bas_sqi",
                "bs_sqi",
                "e_sqi",
                "hf_sqi",
                "pur_sqi",
                "rsd_sqi",
                "ent_sqi",
                "hr_median",
                "hr_iqr",
                "hr_slope",
                "rr_std",
                "ap_en",
                "lf_rel",
                "hf_rel",
                "lf_hf_ratio",
                "averageqrs_sqi",
                "orphanidou_sqi",
            ],
        }
    }
}

/// Named SQI values for one window, ordered per the method grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    method: MethodId,
    values: Vec<f64>,
    degenerate: BTreeSet<&'static str>,
}

impl FeatureVector {
    pub fn method(&self) -> MethodId {
        self.method
    }

    pub fn names(&self) -> &'static [&'static str] {
        self.method.feature_names()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names()
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }

    pub fn is_degenerate(&self, name: &str) -> bool {
        self.degenerate.contains(name)
    }

    pub fn degenerate_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.degenerate.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Kurtosis and skewness indices.
pub fn moment_sqis(signal: &Signal) -> Result<(Flagged, Flagged)> {
    let m = moments(signal)?;
    if m.degenerate {
        Ok((Flagged::degenerate(0.0), Flagged::degenerate(0.0)))
    } else {
        Ok((Flagged::ok(m.kurtosis), Flagged::ok(m.skewness)))
    }
}

/// Spectral-ratio indices from the window periodogram.
#[derive(Debug, Clone, Copy)]
pub struct SpectralSqis {
    /// P(5-15 Hz) / P(5-40 Hz).
    pub p_sqi: Flagged,
    /// Spectral flatness over 0-40 Hz.
    pub f_sqi: Flagged,
    /// 1 - P(0-1 Hz) / P(0-40 Hz).
    pub bas_sqi: Flagged,
}

fn spectral_sqis_from(spec: &PowerSpectrum) -> SpectralSqis {
    let ratio = |num_lo: f64, num_hi: f64, den_lo: f64, den_hi: f64| -> Flagged {
        let num = spectrum::band_power_clamped(spec, num_lo, num_hi).unwrap_or(0.0);
        let den = spectrum::band_power_clamped(spec, den_lo, den_hi).unwrap_or(0.0);
        if den <= 0.0 {
            Flagged::degenerate(0.0)
        } else {
            Flagged::ok((num / den).clamp(0.0, 1.0))
        }
    };
    let p_sqi = ratio(5.0, 15.0, 5.0, 40.0);
    let baseline_share = ratio(0.0, 1.0, 0.0, 40.0);
    let bas_sqi = if baseline_share.degenerate {
        Flagged::degenerate(0.0)
    } else {
        Flagged::ok(1.0 - baseline_share.value)
    };
    let f_sqi = spectrum::spectral_flatness(spec, 0.0, 40.0).unwrap_or(Flagged::degenerate(0.0));
    SpectralSqis {
        p_sqi,
        f_sqi,
        bas_sqi,
    }
}

/// Computes the spectral indices for one window (fs >= 100 Hz, >= 1 s).
pub fn spectral_sqis(signal: &Signal) -> Result<SpectralSqis> {
    if signal.fs() < 100.0 {
        return Err(Error::InvalidBand(format!(
            "spectral SQIs need fs >= 100 Hz, got {}",
            signal.fs()
        )));
    }
    if signal.duration_s() < 1.0 {
        return Err(Error::SignalTooShort {
            needed: signal.fs() as usize,
            got: signal.len(),
        });
    }
    let spec = spectrum::periodogram(signal)?;
    Ok(spectral_sqis_from(&spec))
}

/// Beat-agreement index: both detectors run and their matched fraction
/// `matched / (|A| + |B| - matched)` is returned. Detector failures or an
/// empty-empty outcome degrade to a flagged 0.
pub fn b_sqi(signal: &Signal) -> Flagged {
    let a = detect_energy(signal);
    let b = peaks::detect_derivative(signal);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let denom = a.len() + b.len();
            if denom == 0 {
                return Flagged::degenerate(0.0);
            }
            let m = match_beats(&a, &b, MATCH_TOL_S, signal.fs());
            Flagged::ok(m.matched as f64 / (denom - m.matched) as f64)
        }
        _ => Flagged::degenerate(0.0),
    }
}

/// QRS-morphology indices.
#[derive(Debug, Clone, Copy)]
pub struct MorphSqis {
    /// Per-beat R amplitude against baseline excursion, averaged.
    pub bs_sqi: Flagged,
    /// Energy inside QRS windows over total energy.
    pub e_sqi: Flagged,
    /// High-frequency residual RMS inside QRS over R amplitude, averaged.
    pub hf_sqi: Flagged,
    /// Hjorth-style purity from spectral moments 0, 2, 4.
    pub pur_sqi: Flagged,
    /// Standard deviation inside QRS windows over twice the global one.
    pub rsd_sqi: Flagged,
}

impl MorphSqis {
    fn all_degenerate() -> Self {
        MorphSqis {
            bs_sqi: Flagged::degenerate(0.0),
            e_sqi: Flagged::degenerate(0.0),
            hf_sqi: Flagged::degenerate(0.0),
            pur_sqi: Flagged::degenerate(0.0),
            rsd_sqi: Flagged::degenerate(0.0),
        }
    }
}

/// Half-width of the QRS window around a fiducial, seconds.
pub const QRS_HALF_S: f64 = 0.05;
/// Half-width of the per-beat template segment, seconds.
pub const TEMPLATE_HALF_S: f64 = 0.1;

/// Computes the morphology indices for a window with at least 3 beats.
pub fn qrs_morph_sqis(signal: &Signal, beats: &BeatAnnotations) -> Result<MorphSqis> {
    if beats.len() < 3 {
        return Err(Error::InsufficientBeats {
            needed: 3,
            got: beats.len(),
        });
    }
    let fs = signal.fs();
    let x = signal.samples();
    let n = x.len();
    let qrs_half = (QRS_HALF_S * fs).round() as usize;

    // Baseline trace: 1 Hz low-pass of the raw signal.
    let baseline = crate::filter::lowpass(signal, 1.0)?;
    let bl = baseline.samples();

    // High-frequency residual: content above 40 Hz, when the rate allows.
    let hf = if fs / 2.0 > 41.0 {
        Some(crate::filter::highpass(signal, 40.0)?)
    } else {
        None
    };

    let mu = signal.mean();
    let global_std = signal.std();

    let mut bs_terms = Vec::new();
    let mut hf_terms = Vec::new();
    let mut qrs_sq_sum = 0.0;
    let mut qrs_samples: Vec<f64> = Vec::new();

    for &b in beats.indices() {
        let lo = b.saturating_sub(qrs_half);
        let hi = (b + qrs_half + 1).min(n);
        if lo >= hi {
            continue;
        }
        let r_amp = (x[b.min(n - 1)] - bl[b.min(n - 1)]).abs();

        // Baseline excursion over the 1 s neighborhood of this beat.
        let nb_half = (0.5 * fs).round() as usize;
        let nb_lo = b.saturating_sub(nb_half);
        let nb_hi = (b + nb_half + 1).min(n);
        let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &bl[nb_lo..nb_hi] {
            bmin = bmin.min(v);
            bmax = bmax.max(v);
        }
        let excursion = bmax - bmin;
        if r_amp > 0.0 {
            bs_terms.push(r_amp / (r_amp + excursion));
        }

        for &v in &x[lo..hi] {
            let c = v - mu;
            qrs_sq_sum += c * c;
            qrs_samples.push(v);
        }

        if let Some(ref h) = hf {
            let seg = &h.samples()[lo..hi];
            let rms = (seg.iter().map(|v| v * v).sum::<f64>() / seg.len() as f64).sqrt();
            if r_amp > 0.0 {
                hf_terms.push(rms / r_amp);
            }
        }
    }

    let total_sq: f64 = x.iter().map(|v| (v - mu) * (v - mu)).sum();

    let bs_sqi = if bs_terms.is_empty() {
        Flagged::degenerate(0.0)
    } else {
        Flagged::ok(bs_terms.iter().sum::<f64>() / bs_terms.len() as f64)
    };
    let e_sqi = if total_sq <= 0.0 {
        Flagged::degenerate(0.0)
    } else {
        Flagged::ok((qrs_sq_sum / total_sq).clamp(0.0, 1.0))
    };
    let hf_sqi = if hf_terms.is_empty() {
        Flagged::degenerate(0.0)
    } else {
        Flagged::ok(hf_terms.iter().sum::<f64>() / hf_terms.len() as f64)
    };
    let pur_sqi = match spectrum::periodogram(signal) {
        Ok(spec) => spectrum::hjorth_purity(&spec),
        Err(_) => Flagged::degenerate(0.0),
    };
    let rsd_sqi = if qrs_samples.len() < 2 || global_std <= 0.0 {
        Flagged::degenerate(0.0)
    } else {
        let qmu = qrs_samples.iter().sum::<f64>() / qrs_samples.len() as f64;
        let qvar = qrs_samples
            .iter()
            .map(|v| (v - qmu) * (v - qmu))
            .sum::<f64>()
            / qrs_samples.len() as f64;
        Flagged::ok(qvar.sqrt() / (2.0 * global_std))
    };

    Ok(MorphSqis {
        bs_sqi,
        e_sqi,
        hf_sqi,
        pur_sqi,
        rsd_sqi,
    })
}

/// Sample entropy with the conventional parameters m = 2, r = 0.2 sigma.
pub fn ent_sqi(signal: &Signal) -> Result<Flagged> {
    sample_entropy(signal, 2, 0.2 * signal.std())
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va <= 0.0 || vb <= 0.0 {
        None
    } else {
        Some(cov / (va * vb).sqrt())
    }
}

/// Plausibility rules gating the template correlation: heart rate 40-180 bpm,
/// no RR gap above 3 s, RR spread ratio at most 2.2.
fn beats_plausible(beats: &BeatAnnotations, fs: f64) -> bool {
    let Ok(rr) = rr_intervals(beats, fs) else {
        return false;
    };
    let mean_rr = rr.iter().sum::<f64>() / rr.len() as f64;
    let hr = 60.0 / mean_rr;
    let max_rr = rr.iter().cloned().fold(f64::MIN, f64::max);
    let min_rr = rr.iter().cloned().fold(f64::MAX, f64::min);
    (40.0..=180.0).contains(&hr) && max_rr <= 3.0 && min_rr > 0.0 && max_rr / min_rr <= 2.2
}

/// Template correlation indices: mean Pearson correlation of each beat
/// segment against the average template, and the same value gated by the
/// plausibility rules (any rule failing forces 0).
pub fn template_sqis(signal: &Signal, beats: &BeatAnnotations) -> Result<(Flagged, Flagged)> {
    if beats.len() < 3 {
        return Err(Error::InsufficientBeats {
            needed: 3,
            got: beats.len(),
        });
    }
    let fs = signal.fs();
    let x = signal.samples();
    let half = (TEMPLATE_HALF_S * fs).round() as usize;
    let seg_len = 2 * half + 1;

    let segments: Vec<&[f64]> = beats
        .indices()
        .iter()
        .filter_map(|&b| {
            if b >= half && b + half < x.len() {
                Some(&x[b - half..b + half + 1])
            } else {
                None
            }
        })
        .collect();
    if segments.len() < 3 {
        return Ok((Flagged::degenerate(0.0), Flagged::degenerate(0.0)));
    }

    let mut template = vec![0.0f64; seg_len];
    for seg in &segments {
        for (t, v) in template.iter_mut().zip(seg.iter()) {
            *t += v;
        }
    }
    for t in template.iter_mut() {
        *t /= segments.len() as f64;
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    for seg in &segments {
        if let Some(r) = pearson(seg, &template) {
            sum += r;
            count += 1;
        }
    }
    if count == 0 {
        return Ok((Flagged::degenerate(0.0), Flagged::degenerate(0.0)));
    }
    let avg_corr = sum / count as f64;
    let orphanidou = if beats_plausible(beats, fs) {
        avg_corr
    } else {
        0.0
    };
    Ok((Flagged::ok(avg_corr), Flagged::ok(orphanidou)))
}

/// Rule-based quality levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZhaoLevel {
    Excellent,
    Acceptable,
    Unacceptable,
}

impl ZhaoLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZhaoLevel::Excellent => "excellent",
            ZhaoLevel::Acceptable => "acceptable",
            ZhaoLevel::Unacceptable => "unacceptable",
        }
    }
}

/// Score thresholds of the rule-based classifier. All exposed so a config
/// file can override them; the defaults are the conventional ones.
#[derive(Debug, Clone, Copy)]
pub struct ZhaoThresholds {
    pub q_optimal: f64,
    pub q_suspicious: f64,
    pub p_optimal: (f64, f64),
    pub p_suspicious_lo: (f64, f64),
    pub p_suspicious_hi: (f64, f64),
    pub k_optimal: f64,
    pub k_suspicious: f64,
    pub bas_optimal: f64,
    pub bas_suspicious: f64,
    pub excellent_sum: u8,
    pub acceptable_sum: u8,
}

impl Default for ZhaoThresholds {
    fn default() -> Self {
        ZhaoThresholds {
            q_optimal: 0.90,
            q_suspicious: 0.60,
            p_optimal: (0.50, 0.80),
            p_suspicious_lo: (0.40, 0.50),
            p_suspicious_hi: (0.80, 0.90),
            k_optimal: 5.0,
            k_suspicious: 3.0,
            bas_optimal: 0.95,
            bas_suspicious: 0.90,
            excellent_sum: 7,
            acceptable_sum: 4,
        }
    }
}

/// Rule-based quality vote over {qSQI, pSQI, kSQI, basSQI}, each scored
/// optimal = 2 / suspicious = 1 / unqualified = 0. The summed score maps to a
/// level and normalizes to `zhao2018_sqi` in [0, 1].
pub fn zhao2018_classify(signal: &Signal, thr: &ZhaoThresholds) -> (ZhaoLevel, f64) {
    let q = b_sqi(signal).value;
    let (p, bas) = match spectral_sqis(signal) {
        Ok(s) => (s.p_sqi.value, s.bas_sqi.value),
        Err(_) => (0.0, 0.0),
    };
    let k = match moment_sqis(signal) {
        Ok((k, _)) => k.value,
        Err(_) => 0.0,
    };

    let q_score = if q > thr.q_optimal {
        2
    } else if q >= thr.q_suspicious {
        1
    } else {
        0
    };
    let p_score = if p >= thr.p_optimal.0 && p <= thr.p_optimal.1 {
        2
    } else if (p >= thr.p_suspicious_lo.0 && p < thr.p_suspicious_lo.1)
        || (p > thr.p_suspicious_hi.0 && p <= thr.p_suspicious_hi.1)
    {
        1
    } else {
        0
    };
    let k_score = if k > thr.k_optimal {
        2
    } else if k >= thr.k_suspicious {
        1
    } else {
        0
    };
    let bas_score = if bas >= thr.bas_optimal {
        2
    } else if bas >= thr.bas_suspicious {
        1
    } else {
        0
    };

    let sum = q_score + p_score + k_score + bas_score;
    let level = if sum >= thr.excellent_sum {
        ZhaoLevel::Excellent
    } else if sum >= thr.acceptable_sum {
        ZhaoLevel::Acceptable
    } else {
        ZhaoLevel::Unacceptable
    };
    (level, sum as f64 / 8.0)
}

struct GeometricValues {
    hr_median: Flagged,
    hr_iqr: Flagged,
    hr_slope: Flagged,
    rr_std: Flagged,
    samp_en: Flagged,
    ap_en: Flagged,
    lf_rel: Flagged,
    hf_rel: Flagged,
    lf_hf_ratio: Flagged,
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn geometric_values(
    signal: &Signal,
    beats: Option<&BeatAnnotations>,
    spec: Option<&PowerSpectrum>,
) -> GeometricValues {
    let fs = signal.fs();

    // HR-derived statistics; degenerate when beats are unavailable.
    let (hr_median, hr_iqr, hr_slope, rr_std) = match beats {
        Some(b) if b.len() >= 3 => {
            let hr = hr_series(b, fs).expect("len checked");
            let rr = rr_intervals(b, fs).expect("len checked");
            let mut bpm: Vec<f64> = hr.iter().map(|&(_, v)| v).collect();
            bpm.sort_by(f64::total_cmp);
            let med = median_of_sorted(&bpm);
            let iqr = peaks::quantile(&bpm, 0.75) - peaks::quantile(&bpm, 0.25);

            // Least-squares slope of HR against interval midpoint time.
            let nt = hr.len() as f64;
            let mt = hr.iter().map(|&(t, _)| t).sum::<f64>() / nt;
            let mv = hr.iter().map(|&(_, v)| v).sum::<f64>() / nt;
            let mut num = 0.0;
            let mut den = 0.0;
            for &(t, v) in &hr {
                num += (t - mt) * (v - mv);
                den += (t - mt) * (t - mt);
            }
            let slope = if den > 0.0 {
                Flagged::ok(num / den)
            } else {
                Flagged::degenerate(0.0)
            };

            let mrr = rr.iter().sum::<f64>() / rr.len() as f64;
            let rr_var = rr.iter().map(|v| (v - mrr) * (v - mrr)).sum::<f64>() / rr.len() as f64;
            (
                Flagged::ok(med),
                Flagged::ok(iqr),
                slope,
                Flagged::ok(rr_var.sqrt()),
            )
        }
        _ => (
            Flagged::degenerate(0.0),
            Flagged::degenerate(0.0),
            Flagged::degenerate(0.0),
            Flagged::degenerate(0.0),
        ),
    };

    let r = 0.2 * signal.std();
    let samp_en = sample_entropy(signal, 2, r).unwrap_or(Flagged::degenerate(0.0));
    let ap_en = approximate_entropy(signal, 2, r)
        .map(Flagged::ok)
        .unwrap_or(Flagged::degenerate(0.0));

    // LF/HF split of the 0.5-40 Hz band; the HF share is the exact
    // complement so the two always sum to 1.
    let (lf_rel, hf_rel, lf_hf_ratio) = match spec {
        Some(spec) => {
            let total = spectrum::band_power_clamped(spec, 0.5, 40.0).unwrap_or(0.0);
            let lf = spectrum::band_power_clamped(spec, 0.5, 8.0).unwrap_or(0.0);
            if total <= 0.0 {
                (
                    Flagged::degenerate(0.0),
                    Flagged::degenerate(0.0),
                    Flagged::degenerate(0.0),
                )
            } else {
                let lf_rel = (lf / total).clamp(0.0, 1.0);
                let hf_rel = 1.0 - lf_rel;
                let ratio = if hf_rel > 0.0 {
                    Flagged::ok(lf_rel / hf_rel)
                } else {
                    Flagged::degenerate(0.0)
                };
                (Flagged::ok(lf_rel), Flagged::ok(hf_rel), ratio)
            }
        }
        None => (
            Flagged::degenerate(0.0),
            Flagged::degenerate(0.0),
            Flagged::degenerate(0.0),
        ),
    };

    GeometricValues {
        hr_median,
        hr_iqr,
        hr_slope,
        rr_std,
        samp_en,
        ap_en,
        lf_rel,
        hf_rel,
        lf_hf_ratio,
    }
}

/// Geometric shape features (requires at least 3 beats).
pub fn geometric_features(signal: &Signal, beats: &BeatAnnotations) -> Result<FeatureVector> {
    if beats.len() < 3 {
        return Err(Error::InsufficientBeats {
            needed: 3,
            got: beats.len(),
        });
    }
    let spec = spectrum::periodogram(signal).ok();
    let g = geometric_values(signal, Some(beats), spec.as_ref());
    let ordered = [
        ("hr_median", g.hr_median),
        ("hr_iqr", g.hr_iqr),
        ("hr_slope", g.hr_slope),
        ("rr_std", g.rr_std),
        ("samp_en", g.samp_en),
        ("ap_en", g.ap_en),
        ("lf_rel", g.lf_rel),
        ("hf_rel", g.hf_rel),
        ("lf_hf_ratio", g.lf_hf_ratio),
    ];
    let mut values = Vec::with_capacity(ordered.len());
    let mut degenerate = BTreeSet::new();
    for (name, f) in ordered {
        values.push(f.value);
        if f.degenerate {
            degenerate.insert(name);
        }
    }
    Ok(FeatureVector {
        method: MethodId::Geometric,
        values,
        degenerate,
    })
}

/// Everything the assembler may need, computed at most once per window.
struct WindowAnalysis {
    b: Flagged,
    k: Flagged,
    s: Flagged,
    spectral: SpectralSqis,
    morph: MorphSqis,
    ent: Flagged,
    avgqrs: Flagged,
    orphanidou: Flagged,
    zhao: f64,
    geom: GeometricValues,
}

fn analyze(signal: &Signal, thr: &ZhaoThresholds) -> Result<WindowAnalysis> {
    if signal.len() < spectrum::MIN_PERIODOGRAM_LEN {
        return Err(Error::SignalTooShort {
            needed: spectrum::MIN_PERIODOGRAM_LEN,
            got: signal.len(),
        });
    }
    let spec = spectrum::periodogram(signal)?;
    let spectral = spectral_sqis_from(&spec);
    let (k, s) = moment_sqis(signal)?;

    // Beat-anchored indices use the energy detector's annotations.
    let beats = detect_energy(signal).ok();
    let enough_beats = beats.as_ref().is_some_and(|b| b.len() >= 3);

    let morph = if enough_beats {
        qrs_morph_sqis(signal, beats.as_ref().unwrap()).unwrap_or(MorphSqis::all_degenerate())
    } else {
        MorphSqis::all_degenerate()
    };

    let (avgqrs, orphanidou) = if enough_beats {
        template_sqis(signal, beats.as_ref().unwrap())
            .unwrap_or((Flagged::degenerate(0.0), Flagged::degenerate(0.0)))
    } else {
        (Flagged::degenerate(0.0), Flagged::degenerate(0.0))
    };

    let b = b_sqi(signal);
    let ent = ent_sqi(signal).unwrap_or(Flagged::degenerate(0.0));
    let (_, zhao) = zhao2018_classify(signal, thr);
    let geom = geometric_values(signal, beats.as_ref().filter(|b| b.len() >= 3), Some(&spec));

    Ok(WindowAnalysis {
        b,
        k,
        s,
        spectral,
        morph,
        ent,
        avgqrs,
        orphanidou,
        zhao,
        geom,
    })
}

/// Assembles the feature vector of the requested method for one window.
///
/// Beat-dependent features on beatless or degenerate input take their
/// worst-case convention values and are flagged rather than failing: a
/// garbage window must still featurize.
pub fn featurize(signal: &Signal, method: MethodId) -> Result<FeatureVector> {
    featurize_with(signal, method, &ZhaoThresholds::default())
}

/// [`featurize`] with explicit rule thresholds.
pub fn featurize_with(
    signal: &Signal,
    method: MethodId,
    thr: &ZhaoThresholds,
) -> Result<FeatureVector> {
    let a = analyze(signal, thr)?;
    let lookup = |name: &'static str| -> Flagged {
        match name {
            "b_sqi" => a.b,
            "p_sqi" => a.spectral.p_sqi,
            "k_sqi" => a.k,
            "s_sqi" => a.s,
            "f_sqi" => a.spectral.f_sqi,
            "bas_sqi" => a.spectral.bas_sqi,
            "bs_sqi" => a.morph.bs_sqi,
            "e_sqi" => a.morph.e_sqi,
            "hf_sqi" => a.morph.hf_sqi,
            "pur_sqi" => a.morph.pur_sqi,
            "rsd_sqi" => a.morph.rsd_sqi,
            "ent_sqi" | "samp_en" => a.ent,
            "hr_median" => a.geom.hr_median,
            "hr_iqr" => a.geom.hr_iqr,
            "hr_slope" => a.geom.hr_slope,
            "rr_std" => a.geom.rr_std,
            "ap_en" => a.geom.ap_en,
            "lf_rel" => a.geom.lf_rel,
            "hf_rel" => a.geom.hf_rel,
            "lf_hf_ratio" => a.geom.lf_hf_ratio,
            "averageqrs_sqi" => a.avgqrs,
            "orphanidou_sqi" => a.orphanidou,
            "zhao2018_sqi" => Flagged::ok(a.zhao),
            other => unreachable!("unknown feature name {}", other),
        }
    };

    let names = method.feature_names();
    let mut values = Vec::with_capacity(names.len());
    let mut degenerate = BTreeSet::new();
    for &name in names {
        let f = lookup(name);
        debug_assert!(f.value.is_finite(), "feature {} not finite", name);
        values.push(f.value);
        if f.degenerate {
            degenerate.insert(name);
        }
    }
    Ok(FeatureVector {
        method,
        values,
        degenerate,
    })
}

/// Parses a feature name list back into a method id (exact match).
pub fn method_from_names(names: &[String]) -> Option<MethodId> {
    MethodId::ALL_METHODS.iter().copied().find(|m| {
        m.feature_names().len() == names.len()
            && m.feature_names().iter().zip(names).all(|(a, b)| *a == b)
    })
}
