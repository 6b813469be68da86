//! HarmonicRatio (AC1), spectral flatness and the pitch-strength estimate.

use std::f64::consts::PI;

use crate::audio_io::AudioBuffer;
use crate::dsp::{
    normalized_autocorrelation, stft, zero_lag_autocorrelation, FramePlan, IsoWeighting,
    SpectrumFrame,
};
use crate::error::{Error, Result};
use crate::synth::MauchToneSpec;

/// Exponent of the inharmonicity normalization `(1 - HR)^0.21`.
pub const HR_EXPONENT: f64 = 0.21;

/// Which autocorrelation the HarmonicRatio maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AcfEstimator {
    /// Equal-length windows, each lag normalized by the energies of both windows.
    #[default]
    EnergyNormalized,
    /// `r(m) / r(0)` over the overlapping samples only.
    ZeroLag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrParams {
    /// Pitch range searched, (lowest, highest) in Hz.
    pub lag_range_hz: (f64, f64),
    pub estimator: AcfEstimator,
}

impl Default for HrParams {
    fn default() -> Self {
        Self {
            lag_range_hz: (25.0, 2000.0),
            estimator: AcfEstimator::EnergyNormalized,
        }
    }
}

impl HrParams {
    /// Inclusive lag range in samples.
    pub fn lag_range(&self, sample_rate_hz: f64) -> Result<(usize, usize)> {
        let (lo, hi) = self.lag_range_hz;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidSpec(format!("lag range ({lo}, {hi}) Hz")));
        }
        let min_lag = ((sample_rate_hz / hi).ceil() as usize).max(1);
        let max_lag = (sample_rate_hz / lo).floor() as usize;
        if max_lag < min_lag {
            return Err(Error::InvalidSpec(format!(
                "lag range ({lo}, {hi}) Hz is empty at {sample_rate_hz} Hz"
            )));
        }
        Ok((min_lag, max_lag))
    }

    pub fn min_frame_len(&self, sample_rate_hz: f64) -> Result<usize> {
        let (_, max_lag) = self.lag_range(sample_rate_hz)?;
        Ok(match self.estimator {
            AcfEstimator::EnergyNormalized => 2 * max_lag,
            AcfEstimator::ZeroLag => max_lag + 1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicRatio {
    /// Autocorrelation maximum, clamped to [0, 1].
    pub value: f64,
    /// Lag (samples) of the maximum.
    pub lag: usize,
    /// Input had no energy; `value` is 0.
    pub degenerate: bool,
}

/// Maximum of the normalized autocorrelation over the pitch lag range.
pub fn harmonic_ratio(frame: &[f64], sample_rate_hz: u32, params: &HrParams) -> Result<HarmonicRatio> {
    let sr = sample_rate_hz as f64;
    let (min_lag, max_lag) = params.lag_range(sr)?;
    let needed = params.min_frame_len(sr)?;
    if frame.len() < needed {
        return Err(Error::FrameTooShort {
            len: frame.len(),
            needed,
        });
    }
    let acf = match params.estimator {
        AcfEstimator::EnergyNormalized => normalized_autocorrelation(frame, max_lag)?,
        AcfEstimator::ZeroLag => zero_lag_autocorrelation(frame, max_lag)?,
    };
    if acf.degenerate {
        return Ok(HarmonicRatio {
            value: 0.0,
            lag: min_lag,
            degenerate: true,
        });
    }
    let (lag, best) = (min_lag..=max_lag)
        .map(|m| (m, acf.at_lag(m)))
        .fold((min_lag, f64::MIN), |acc, (m, r)| if r > acc.1 { (m, r) } else { acc });
    Ok(HarmonicRatio {
        value: best.clamp(0.0, 1.0),
        lag,
        degenerate: false,
    })
}

/// Geometric over arithmetic mean of the bins inside `band_hz`.
///
/// `frame` is expected to be an average of `n_avg` periodograms; zero bins
/// are floored at 1e-12 of the band mean.
pub fn spectral_flatness(frame: &SpectrumFrame, band_hz: (f64, f64), n_avg: usize) -> Result<f64> {
    if n_avg == 0 {
        return Err(Error::InvalidSpec("n_avg must be at least 1".into()));
    }
    let (lo, hi) = band_hz;
    let nyquist = frame.sample_rate_hz() / 2.0;
    if !(lo >= 0.0 && hi > lo && hi <= nyquist) {
        return Err(Error::InvalidSpec(format!(
            "band ({lo}, {hi}) Hz not inside [0, {nyquist}]"
        )));
    }
    let k_lo = (lo / frame.bin_hz()).ceil() as usize;
    let k_hi = ((hi / frame.bin_hz()).floor() as usize).min(frame.n_bins() - 1);
    if k_lo > k_hi {
        return Err(Error::EmptyBand { lo_hz: lo, hi_hz: hi });
    }
    let band = &frame.bin_power()[k_lo..=k_hi];
    let mean = band.iter().sum::<f64>() / band.len() as f64;
    let (min, max) = band
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &p| (a.min(p), b.max(p)));
    if mean <= 0.0 || min == max {
        return Ok(1.0);
    }
    let floor = 1e-12 * mean;
    let log_mean = band.iter().map(|p| p.max(floor).ln()).sum::<f64>() / band.len() as f64;
    // Rounding can push a perfectly flat band a hair above 1.
    Ok((log_mean.exp() / mean).min(1.0))
}

/// Pitch-strength estimate `k * 10^AC1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsEstimate {
    pub value: f64,
    pub k: f64,
    pub ac1: f64,
}

pub fn ps_from_ac1(ac1: f64, k: f64) -> Result<PsEstimate> {
    if !(0.0..=1.0).contains(&ac1) {
        return Err(Error::OutOfRange {
            value: ac1,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::OutOfRange {
            value: k,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(PsEstimate {
        value: k * 10f64.powf(ac1),
        k,
        ac1,
    })
}

/// HarmonicRatio of every two-sine pair {partial i of `tone_a`, partial j of `tone_b`}.
///
/// Both sines have equal amplitude; the frame length is `tone_a.duration_s`.
/// Row `i` holds partial `i + 1` of `tone_a`.
pub fn pairwise_hr_matrix(
    tone_a: &MauchToneSpec,
    tone_b: &MauchToneSpec,
    params: &HrParams,
) -> Result<Vec<Vec<f64>>> {
    tone_a.validate()?;
    tone_b.validate()?;
    if tone_a.sample_rate_hz != tone_b.sample_rate_hz {
        return Err(Error::InvalidSpec("tones differ in sample rate".into()));
    }
    let sr = tone_a.sample_rate_hz as f64;
    let n = (tone_a.duration_s * sr).round() as usize;
    let sine = |f: f64| -> Vec<f64> {
        let w = 2.0 * PI * f / sr;
        (0..n).map(|i| (w * i as f64).sin()).collect()
    };
    let partials_b: Vec<Vec<f64>> = (1..=tone_b.n_harmonics)
        .map(|j| sine(tone_b.partial_hz(j)))
        .collect();
    (1..=tone_a.n_harmonics)
        .map(|i| {
            let a = sine(tone_a.partial_hz(i));
            partials_b
                .iter()
                .map(|b| {
                    let pair: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    harmonic_ratio(&pair, tone_a.sample_rate_hz, params).map(|h| h.value)
                })
                .collect()
        })
        .collect()
}

/// The two raw features and, once a space is applied, their normalized forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub harmonic_ratio: f64,
    pub flatness: f64,
    pub inharmonicity_norm: Option<f64>,
    pub noisiness_norm: Option<f64>,
}

impl FeatureVector {
    pub fn raw(harmonic_ratio: f64, flatness: f64) -> Self {
        Self {
            harmonic_ratio,
            flatness,
            inharmonicity_norm: None,
            noisiness_norm: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameFeatures {
    pub time_s: f64,
    pub features: FeatureVector,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureParams {
    pub hr: HrParams,
    pub flatness_band_hz: (f64, f64),
    /// Periodograms averaged (centred on each frame) before flatness.
    pub n_avg: usize,
    /// Equal-loudness level for spectral weighting; `None` disables it.
    pub weighting_phon: Option<f64>,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            hr: HrParams::default(),
            flatness_band_hz: (100.0, 10_000.0),
            n_avg: 8,
            weighting_phon: Some(60.0),
        }
    }
}

/// Per-frame HarmonicRatio (time domain) and flatness (weighted averaged spectrum).
pub fn track_features(
    buffer: &AudioBuffer,
    plan: &FramePlan,
    params: &FeatureParams,
) -> Result<Vec<FrameFeatures>> {
    let sr = buffer.sample_rate_hz() as f64;
    let spectra = stft(buffer, plan)?;
    let weighting = params.weighting_phon.map(IsoWeighting::new).transpose()?;
    let gains = weighting
        .as_ref()
        .map(|w| w.bin_gains(spectra[0].n_bins(), spectra[0].bin_hz()));
    let band = (
        params.flatness_band_hz.0,
        params.flatness_band_hz.1.min(sr / 2.0),
    );
    let n_avg = params.n_avg.max(1).min(spectra.len());
    let x = buffer.samples();
    let n_bins = spectra[0].n_bins();

    plan.frame_starts(x.len())
        .enumerate()
        .map(|(i, start)| {
            let frame = &x[start..start + plan.frame_len];
            let hr = harmonic_ratio(frame, buffer.sample_rate_hz(), &params.hr)?;

            let first = i.saturating_sub(n_avg / 2).min(spectra.len() - n_avg);
            let mut avg = vec![0.0; n_bins];
            for s in &spectra[first..first + n_avg] {
                for (a, p) in avg.iter_mut().zip(s.bin_power()) {
                    *a += p / n_avg as f64;
                }
            }
            if let Some(g) = &gains {
                avg.iter_mut().zip(g).for_each(|(a, g)| *a *= g);
            }
            let spec = SpectrumFrame::from_parts_unchecked(
                avg,
                spectra[0].bin_hz(),
                spectra[0].n_fft(),
                gains.is_some(),
            );
            let flatness = spectral_flatness(&spec, band, n_avg)?;
            Ok(FrameFeatures {
                time_s: (start as f64 + plan.frame_len as f64 / 2.0) / sr,
                features: FeatureVector::raw(hr.value, flatness),
                degenerate: hr.degenerate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ps_formula() {
        assert_eq!(ps_from_ac1(0.0, 1.0).unwrap().value, 1.0);
        assert_eq!(ps_from_ac1(1.0, 1.0).unwrap().value, 10.0);
        assert!((ps_from_ac1(0.5, 2.0).unwrap().value - 6.324_555_320_336_759).abs() < 1e-12);
        assert!(ps_from_ac1(1.2, 1.0).is_err());
        assert!(ps_from_ac1(-0.1, 1.0).is_err());
        assert!(ps_from_ac1(0.5, 0.0).is_err());
    }

    #[test]
    fn flat_spectrum_is_exactly_one() {
        let f = SpectrumFrame::new(vec![3.0; 513], 48000.0 / 1024.0, 1024, false).unwrap();
        assert_eq!(spectral_flatness(&f, (100.0, 10000.0), 1).unwrap(), 1.0);
    }

    #[test]
    fn flatness_errors() {
        let f = SpectrumFrame::new(vec![1.0; 513], 48000.0 / 1024.0, 1024, false).unwrap();
        assert!(matches!(
            spectral_flatness(&f, (100.0, 101.0), 1),
            Err(Error::EmptyBand { .. })
        ));
        assert!(spectral_flatness(&f, (100.0, 30000.0), 1).is_err());
        assert!(spectral_flatness(&f, (100.0, 1000.0), 0).is_err());
    }

    #[test]
    fn hr_frame_too_short() {
        let p = HrParams::default();
        assert!(matches!(
            harmonic_ratio(&[0.1; 1000], 48000, &p),
            Err(Error::FrameTooShort { .. })
        ));
    }

    #[test]
    fn hr_of_silence_is_flagged_zero() {
        let h = harmonic_ratio(&[0.0; 4096], 48000, &HrParams::default()).unwrap();
        assert!(h.degenerate);
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn lag_range_in_samples() {
        let (lo, hi) = HrParams::default().lag_range(48000.0).unwrap();
        assert_eq!((lo, hi), (24, 1920));
    }
}
