use rustfft::num_complex::Complex;

use super::{FftPair, SpectrumFrame};
use crate::error::{Error, Result};

/// Log-power floor applied before taking the cepstrum.
pub const LOG_POWER_FLOOR_DB: f64 = -120.0;

/// Smooth spectral envelope in dB on the binning of its source frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFrame {
    pub env_db: Vec<f64>,
    pub cutoff_quefrency_s: f64,
    pub bin_hz: f64,
}

impl EnvelopeFrame {
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }
}

/// Low-quefrency part of a one-sided log spectrum: keeps cepstral
/// coefficients with |q| <= `keep` samples and transforms back.
pub fn lifter_log_spectrum(log_db: &[f64], n_fft: usize, keep: usize) -> Vec<f64> {
    let fft = FftPair::new(n_fft);
    lifter_with(&fft, log_db, keep)
}

pub(crate) fn lifter_with(fft: &FftPair, log_db: &[f64], keep: usize) -> Vec<f64> {
    let n = fft.len();
    let half = log_db.len();
    debug_assert_eq!(half, n / 2 + 1);
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|k| {
            let v = if k < half { log_db[k] } else { log_db[n - k] };
            Complex::new(v, 0.0)
        })
        .collect();
    fft.inverse(&mut buf);
    if 2 * keep + 1 < n {
        for c in &mut buf[keep + 1..n - keep] {
            *c = Complex::new(0.0, 0.0);
        }
    }
    fft.forward(&mut buf);
    let scale = 1.0 / n as f64;
    buf[..half].iter().map(|c| c.re * scale).collect()
}

pub(crate) fn floored_log_power(frame: &SpectrumFrame) -> Vec<f64> {
    let floor = 10f64.powf(LOG_POWER_FLOOR_DB / 10.0);
    frame
        .bin_power()
        .iter()
        .map(|p| 10.0 * p.max(floor).log10())
        .collect()
}

pub(crate) fn quefrency_samples(cutoff_s: f64, sample_rate_hz: f64) -> usize {
    (cutoff_s * sample_rate_hz).round().max(0.0) as usize
}

/// Cepstrally smoothed envelope of `frame`.
///
/// The envelope cannot vary faster across frequency than `1 / cutoff_quefrency_s` Hz.
pub fn spectral_envelope(frame: &SpectrumFrame, cutoff_quefrency_s: f64) -> Result<EnvelopeFrame> {
    if frame.n_bins() < 64 {
        return Err(Error::InvalidSpec(format!(
            "envelope needs at least 64 bins, got {}",
            frame.n_bins()
        )));
    }
    if !(cutoff_quefrency_s > 0.0 && cutoff_quefrency_s.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "cutoff quefrency {cutoff_quefrency_s}"
        )));
    }
    let keep = quefrency_samples(cutoff_quefrency_s, frame.sample_rate_hz());
    let env_db = lifter_log_spectrum(&floored_log_power(frame), frame.n_fft(), keep);
    Ok(EnvelopeFrame {
        env_db,
        cutoff_quefrency_s,
        bin_hz: frame.bin_hz(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_from_db(db: &[f64], bin_hz: f64) -> SpectrumFrame {
        let n = (db.len() - 1) * 2;
        let p = db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
        SpectrumFrame::new(p, bin_hz, n, false).unwrap()
    }

    fn bump(n_bins: usize, bin_hz: f64, centre: f64, sigma: f64, height: f64) -> Vec<f64> {
        (0..n_bins)
            .map(|k| {
                let f = k as f64 * bin_hz;
                -40.0 + height * (-(f - centre).powi(2) / (2.0 * sigma * sigma)).exp()
            })
            .collect()
    }

    #[test]
    fn wide_formant_height_is_kept() {
        let bin_hz = 48000.0 / 4096.0;
        let db = bump(2049, bin_hz, 3000.0, 2000.0, 12.0);
        let env = spectral_envelope(&frame_from_db(&db, bin_hz), 1.0 / 700.0).unwrap();
        let peak = env.env_db.iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - (-40.0 + 12.0)).abs() < 1.0, "peak {peak}");
    }

    #[test]
    fn smooth_input_is_fixed_point() {
        let bin_hz = 48000.0 / 4096.0;
        let db = bump(2049, bin_hz, 5000.0, 2500.0, 10.0);
        let frame = frame_from_db(&db, bin_hz);
        let env = spectral_envelope(&frame, 1.0 / 700.0).unwrap();
        for (a, b) in env.env_db.iter().zip(&db) {
            assert!((a - b).abs() < 0.5);
        }
        let again = spectral_envelope(&frame_from_db(&env.env_db, bin_hz), 1.0 / 700.0).unwrap();
        for (a, b) in again.env_db.iter().zip(&env.env_db) {
            assert!((a - b).abs() < 0.5);
        }
    }

    #[test]
    fn rejects_tiny_frames() {
        let f = SpectrumFrame::new(vec![1.0; 33], 100.0, 64, false).unwrap();
        assert!(spectral_envelope(&f, 0.001).is_err());
    }
}
