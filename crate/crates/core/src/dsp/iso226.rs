//! ISO 226:2003 equal-loudness contours used as a perceptual spectral weighting.

use super::SpectrumFrame;
use crate::error::{Error, Result};

/// The 29 preferred frequencies of the standard.
pub const ISO226_FREQUENCIES_HZ: [f64; 29] = [
    20.0, 25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0, 125.0, 160.0, 200.0, 250.0, 315.0, 400.0,
    500.0, 630.0, 800.0, 1000.0, 1250.0, 1600.0, 2000.0, 2500.0, 3150.0, 4000.0, 5000.0, 6300.0,
    8000.0, 10000.0, 12500.0,
];

// Exponent for loudness perception.
const ALPHA_F: [f64; 29] = [
    0.532, 0.506, 0.480, 0.455, 0.432, 0.409, 0.387, 0.367, 0.349, 0.330, 0.315, 0.301, 0.288,
    0.276, 0.267, 0.259, 0.253, 0.250, 0.246, 0.244, 0.243, 0.243, 0.243, 0.242, 0.242, 0.245,
    0.254, 0.271, 0.301,
];

// Magnitude of the linear transfer function normalized at 1 kHz.
const L_U: [f64; 29] = [
    -31.6, -27.2, -23.0, -19.1, -15.9, -13.0, -10.3, -8.1, -6.2, -4.5, -3.1, -2.0, -1.1, -0.4,
    0.0, 0.3, 0.5, 0.0, -2.7, -4.1, -1.0, 1.7, 2.5, 1.2, -2.1, -7.1, -11.2, -10.7, -3.1,
];

// Threshold of hearing.
const T_F: [f64; 29] = [
    78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9, 14.4, 11.4, 8.6, 6.2, 4.4, 3.0,
    2.2, 2.4, 3.5, 1.7, -1.3, -4.2, -6.0, -5.4, -1.5, 6.0, 12.6, 13.9, 12.3,
];

const REF_INDEX: usize = 17; // 1 kHz

/// Sound pressure level (dB) of the `phon` contour at the 29 standard frequencies.
pub fn equal_loudness_contour(phon: f64) -> Result<[f64; 29]> {
    check_phon(phon)?;
    let mut out = [0.0; 29];
    for i in 0..29 {
        let af = 4.47e-3 * (10f64.powf(0.025 * phon) - 1.15)
            + (0.4 * 10f64.powf((T_F[i] + L_U[i]) / 10.0 - 9.0)).powf(ALPHA_F[i]);
        out[i] = 10.0 / ALPHA_F[i] * af.log10() - L_U[i] + 94.0;
    }
    Ok(out)
}

fn check_phon(phon: f64) -> Result<()> {
    if !(20.0..=80.0).contains(&phon) {
        return Err(Error::PhonOutOfRange(phon));
    }
    Ok(())
}

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at the knots
}

impl CubicSpline {
    fn natural(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        // Tridiagonal system for interior second derivatives (Thomas algorithm).
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Equal-loudness weighting at a fixed loudness level, interpolated on
/// log-frequency between the standard's tabulated points.
#[derive(Debug, Clone)]
pub struct IsoWeighting {
    phon: f64,
    reference_db: f64,
    spline: CubicSpline,
}

impl IsoWeighting {
    pub fn new(phon: f64) -> Result<Self> {
        let contour = equal_loudness_contour(phon)?;
        let logf: Vec<f64> = ISO226_FREQUENCIES_HZ.iter().map(|f| f.log10()).collect();
        Ok(Self {
            phon,
            reference_db: contour[REF_INDEX],
            spline: CubicSpline::natural(&logf, &contour),
        })
    }

    pub fn phon(&self) -> f64 {
        self.phon
    }

    /// Contour SPL at `freq_hz`; outside 20 Hz - 12.5 kHz the nearest endpoint.
    pub fn contour_db(&self, freq_hz: f64) -> f64 {
        let f = freq_hz.clamp(ISO226_FREQUENCIES_HZ[0], ISO226_FREQUENCIES_HZ[28]);
        self.spline.eval(f.log10())
    }

    /// Power gain in dB, zero at 1 kHz.
    pub fn gain_db(&self, freq_hz: f64) -> f64 {
        self.reference_db - self.contour_db(freq_hz)
    }

    /// Linear power gain for each bin of a spectrum with the given layout.
    pub fn bin_gains(&self, n_bins: usize, bin_hz: f64) -> Vec<f64> {
        (0..n_bins)
            .map(|k| 10f64.powf(self.gain_db(k as f64 * bin_hz) / 10.0))
            .collect()
    }

    pub fn apply(&self, frame: &SpectrumFrame) -> Result<SpectrumFrame> {
        if frame.is_weighted() {
            return Err(Error::AlreadyWeighted);
        }
        let gains = self.bin_gains(frame.n_bins(), frame.bin_hz());
        Ok(self.apply_gains(frame, &gains))
    }

    pub(crate) fn apply_gains(&self, frame: &SpectrumFrame, gains: &[f64]) -> SpectrumFrame {
        let power = frame
            .bin_power()
            .iter()
            .zip(gains)
            .map(|(p, g)| p * g)
            .collect();
        SpectrumFrame::from_parts_unchecked(power, frame.bin_hz(), frame.n_fft(), true)
    }
}

/// Weights an unweighted frame by the inverse `phon` equal-loudness contour.
pub fn iso226_weight(frame: &SpectrumFrame, phon: f64) -> Result<SpectrumFrame> {
    IsoWeighting::new(phon)?.apply(frame)
}

/// Undoes [`iso226_weight`] at the same loudness level.
pub fn iso226_unweight(frame: &SpectrumFrame, phon: f64) -> Result<SpectrumFrame> {
    if !frame.is_weighted() {
        return Err(Error::InvalidSpec("frame is not weighted".into()));
    }
    let w = IsoWeighting::new(phon)?;
    let gains = w.bin_gains(frame.n_bins(), frame.bin_hz());
    let power = frame
        .bin_power()
        .iter()
        .zip(&gains)
        .map(|(p, g)| p / g)
        .collect();
    Ok(SpectrumFrame::from_parts_unchecked(
        power,
        frame.bin_hz(),
        frame.n_fft(),
        false,
    ))
}
