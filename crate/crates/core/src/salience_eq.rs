//! Formant-salience equalizer: scales spectral-envelope peaks above a slow
//! baseline by `1 + gain` and resynthesizes by weighted overlap-add.

use rustfft::num_complex::Complex;

use crate::audio_io::AudioBuffer;
use crate::dsp::envelope::{lifter_with, quefrency_samples};
use crate::dsp::{FftPair, Window, LOG_POWER_FLOOR_DB};
use crate::error::{Error, Result};

/// Baseline smoothing is this many times coarser than the envelope.
pub const BASELINE_FACTOR: f64 = 4.0;

/// Band over which salience is measured.
pub const SALIENCE_BAND_HZ: (f64, f64) = (50.0, 8000.0);

/// Output peak is held to this multiple of the input peak.
const PEAK_GUARD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalienceSettings {
    pub gain: f64,
    pub cutoff_quefrency_s: f64,
    pub frame_len: usize,
    pub hop: usize,
    /// Periodograms (centred on each frame) averaged before the envelope is
    /// taken; 1 uses the frame alone.
    pub envelope_frames: usize,
}

impl Default for SalienceSettings {
    fn default() -> Self {
        Self {
            gain: 0.0,
            cutoff_quefrency_s: 1.0 / 700.0,
            frame_len: 4096,
            hop: 1024,
            envelope_frames: 5,
        }
    }
}

impl SalienceSettings {
    pub fn with_gain(gain: f64) -> Self {
        Self {
            gain,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.gain) {
            return Err(Error::OutOfRange {
                value: self.gain,
                lo: -1.0,
                hi: 1.0,
            });
        }
        if !(self.cutoff_quefrency_s > 0.0 && self.cutoff_quefrency_s.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "cutoff quefrency {} s",
                self.cutoff_quefrency_s
            )));
        }
        if self.frame_len < 128 || self.hop == 0 || self.hop > self.frame_len / 2 {
            return Err(Error::InvalidSpec(format!(
                "frame {} / hop {}: need frame >= 128 and 0 < hop <= frame/2",
                self.frame_len, self.hop
            )));
        }
        if self.envelope_frames == 0 {
            return Err(Error::InvalidSpec("envelope_frames must be at least 1".into()));
        }
        Ok(())
    }
}

/// Envelope-minus-baseline deviation D (dB) for one power spectrum.
struct Deviation {
    fft: FftPair,
    env_keep: usize,
    base_keep: usize,
}

impl Deviation {
    fn new(settings: &SalienceSettings, sample_rate_hz: f64) -> Self {
        Self {
            fft: FftPair::new(settings.frame_len),
            env_keep: quefrency_samples(settings.cutoff_quefrency_s, sample_rate_hz),
            base_keep: quefrency_samples(
                settings.cutoff_quefrency_s / BASELINE_FACTOR,
                sample_rate_hz,
            ),
        }
    }

    fn of_power(&self, power: &[f64]) -> Vec<f64> {
        let floor = 10f64.powf(LOG_POWER_FLOOR_DB / 10.0);
        let log_db: Vec<f64> = power.iter().map(|p| 10.0 * p.max(floor).log10()).collect();
        let env = lifter_with(&self.fft, &log_db, self.env_keep);
        let base = lifter_with(&self.fft, &log_db, self.base_keep);
        env.iter().zip(&base).map(|(e, b)| e - b).collect()
    }
}

/// Scales formant salience by `1 + gain`; output has the input's length.
pub fn apply_salience_gain(buffer: &AudioBuffer, settings: &SalienceSettings) -> Result<AudioBuffer> {
    settings.validate()?;
    let n = settings.frame_len;
    if buffer.len() < n {
        return Err(Error::BufferTooShort {
            len: buffer.len(),
            needed: n,
        });
    }
    let sr = buffer.sample_rate_hz() as f64;
    let dev = Deviation::new(settings, sr);
    let window = Window::Hann.coefficients(n);
    let half = n / 2 + 1;

    // One frame of silence on each side so every sample sees full overlap.
    let pad = n;
    let total = buffer.len() + 2 * pad + settings.hop;
    let mut xp = vec![0.0; total];
    xp[pad..pad + buffer.len()].copy_from_slice(buffer.samples());
    let mut out = vec![0.0; total];
    let mut wsum = vec![0.0; total];
    let mut frame = vec![0.0; n];

    let starts: Vec<usize> = (0..).map(|i| i * settings.hop).take_while(|s| s + n <= total).collect();
    let mut spectra = Vec::with_capacity(starts.len());
    let mut powers = Vec::with_capacity(starts.len());
    for &start in &starts {
        for ((f, x), w) in frame.iter_mut().zip(&xp[start..start + n]).zip(&window) {
            *f = x * w;
        }
        let spec = dev.fft.forward_real(&frame);
        powers.push(spec[..half].iter().map(|c| c.norm_sqr() / n as f64).collect::<Vec<f64>>());
        spectra.push(spec);
    }

    let reach = settings.envelope_frames / 2;
    let mut smoothed = vec![0.0; half];
    for (i, (&start, mut spec)) in starts.iter().zip(spectra).enumerate() {
        if settings.gain != 0.0 {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(starts.len() - 1);
            smoothed.iter_mut().for_each(|v| *v = 0.0);
            for p in &powers[lo..=hi] {
                smoothed.iter_mut().zip(p).for_each(|(a, b)| *a += b);
            }
            if smoothed.iter().any(|&p| p > 0.0) {
                let d = dev.of_power(&smoothed);
                for (k, dk) in d.iter().enumerate() {
                    let g = 10f64.powf(settings.gain * dk / 20.0);
                    spec[k] *= g;
                    if k > 0 && k < n - k {
                        spec[n - k] *= g;
                    }
                }
            }
        }
        dev.fft.inverse(&mut spec);
        for (j, (c, w)) in spec.iter().zip(&window).enumerate() {
            out[start + j] += c.re / n as f64 * w;
            wsum[start + j] += w * w;
        }
    }

    let mut y: Vec<f64> = (pad..pad + buffer.len())
        .map(|i| if wsum[i] > 1e-12 { out[i] / wsum[i] } else { 0.0 })
        .collect();
    let in_peak = buffer.peak();
    let out_peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if out_peak > PEAK_GUARD * in_peak && out_peak > 0.0 {
        let s = PEAK_GUARD * in_peak / out_peak;
        y.iter_mut().for_each(|v| *v *= s);
    }
    AudioBuffer::new(y, buffer.sample_rate_hz())
}

/// Per-frame and long-term salience readings.
#[derive(Debug, Clone, PartialEq)]
pub struct SalienceProfile {
    /// Max of D over the measurement band, per analysis frame.
    pub per_frame_db: Vec<f64>,
    /// Frame had no energy; its reading is 0.
    pub degenerate: Vec<bool>,
    /// Same measurement on the frame-averaged power spectrum.
    pub averaged_db: f64,
}

impl SalienceProfile {
    pub fn median_db(&self) -> f64 {
        crate::stats::median(&self.per_frame_db).unwrap_or(0.0)
    }
}

pub fn measure_salience(buffer: &AudioBuffer, settings: &SalienceSettings) -> Result<SalienceProfile> {
    settings.validate()?;
    let n = settings.frame_len;
    if buffer.len() < n {
        return Err(Error::BufferTooShort {
            len: buffer.len(),
            needed: n,
        });
    }
    let sr = buffer.sample_rate_hz() as f64;
    let dev = Deviation::new(settings, sr);
    let bin_hz = sr / n as f64;
    let k_lo = (SALIENCE_BAND_HZ.0 / bin_hz).ceil() as usize;
    let k_hi = ((SALIENCE_BAND_HZ.1.min(sr / 2.0)) / bin_hz).floor() as usize;
    let band_max = |power: &[f64]| -> Option<f64> {
        if !power.iter().any(|&p| p > 0.0) {
            return None;
        }
        let d = dev.of_power(power);
        Some(d[k_lo..=k_hi].iter().cloned().fold(f64::MIN, f64::max))
    };

    let window = Window::Hann.coefficients(n);
    let half = n / 2 + 1;
    let x = buffer.samples();
    let mut avg = vec![0.0; half];
    let mut per_frame_db = Vec::new();
    let mut degenerate = Vec::new();
    let mut frame = vec![0.0; n];
    let mut start = 0;
    while start + n <= x.len() {
        for ((f, v), w) in frame.iter_mut().zip(&x[start..start + n]).zip(&window) {
            *f = v * w;
        }
        let spec = dev.fft.forward_real(&frame);
        let power: Vec<f64> = spec[..half].iter().map(|c: &Complex<f64>| c.norm_sqr() / n as f64).collect();
        avg.iter_mut().zip(&power).for_each(|(a, p)| *a += p);
        match band_max(&power) {
            Some(v) => {
                per_frame_db.push(v);
                degenerate.push(false);
            }
            None => {
                per_frame_db.push(0.0);
                degenerate.push(true);
            }
        }
        start += settings.hop;
    }
    let averaged_db = band_max(&avg).unwrap_or(0.0);
    Ok(SalienceProfile {
        per_frame_db,
        degenerate,
        averaged_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_validation() {
        assert!(SalienceSettings::with_gain(1.5).validate().is_err());
        let mut s = SalienceSettings::default();
        s.hop = 3000;
        assert!(s.validate().is_err());
        s.hop = 1024;
        s.cutoff_quefrency_s = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn too_short() {
        let b = AudioBuffer::new(vec![0.1; 100], 48000).unwrap();
        assert!(matches!(
            apply_salience_gain(&b, &SalienceSettings::default()),
            Err(Error::BufferTooShort { .. })
        ));
    }

    #[test]
    fn silence_is_flagged() {
        let b = AudioBuffer::new(vec![0.0; 12000], 48000).unwrap();
        let p = measure_salience(&b, &SalienceSettings::default()).unwrap();
        assert!(p.degenerate.iter().all(|&d| d));
        assert_eq!(p.averaged_db, 0.0);
        let y = apply_salience_gain(&b, &SalienceSettings::with_gain(1.0)).unwrap();
        assert!(y.samples().iter().all(|&v| v == 0.0));
    }
}
