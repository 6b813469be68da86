//! Frame-based spectral machinery shared by the feature, synthesis and
//! equalizer modules.

mod autocorr;
pub(crate) mod envelope;
mod iso226;
mod peaks;
mod stft;

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub use autocorr::{normalized_autocorrelation, zero_lag_autocorrelation, Autocorrelation};
pub use envelope::{lifter_log_spectrum, spectral_envelope, EnvelopeFrame, LOG_POWER_FLOOR_DB};
pub use iso226::{
    equal_loudness_contour, iso226_unweight, iso226_weight, IsoWeighting, ISO226_FREQUENCIES_HZ,
};
pub use peaks::{
    dominant_peak, freq_to_midi, harmonic_grid, overtone_deltas, pick_spectral_peaks, SpectralPeak,
};
pub use stft::{average_spectra, stft, welch_spectrum, FramePlan, SpectrumFrame, Window};

/// Forward/inverse complex FFT pair of a fixed length.
#[derive(Clone)]
pub(crate) struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl FftPair {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Complex spectrum of a real sequence zero-padded to `len`.
    pub(crate) fn forward_real(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        buf.resize(self.len, Complex::new(0.0, 0.0));
        self.forward.process(&mut buf);
        buf
    }

    pub(crate) fn forward(&self, buf: &mut [Complex<f64>]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse transform (caller divides by `len`).
    pub(crate) fn inverse(&self, buf: &mut [Complex<f64>]) {
        self.inverse.process(buf);
    }
}

pub(crate) fn db_from_power(p: f64) -> f64 {
    10.0 * p.max(1e-300).log10()
}
