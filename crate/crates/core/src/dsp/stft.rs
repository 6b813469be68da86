use std::f64::consts::PI;

use super::FftPair;
use crate::audio_io::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Periodic Hann, so 75% overlap sums to a constant.
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
                .collect(),
        }
    }
}

/// Framing of a signal into (possibly overlapping) analysis windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FramePlan {
    pub frame_len: usize,
    pub hop: usize,
    pub window: Window,
}

impl Default for FramePlan {
    fn default() -> Self {
        Self {
            frame_len: 4096,
            hop: 1024,
            window: Window::Hann,
        }
    }
}

impl FramePlan {
    pub fn new(frame_len: usize, hop: usize, window: Window) -> Result<Self> {
        let plan = Self {
            frame_len,
            hop,
            window,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::InvalidSpec(format!(
                "frame plan needs 0 < hop <= frame_len, got hop {} frame {}",
                self.hop, self.frame_len
            )));
        }
        Ok(())
    }

    /// Start offsets of every complete frame in a signal of `len` samples.
    pub fn frame_starts(&self, len: usize) -> impl Iterator<Item = usize> {
        let last = if len >= self.frame_len {
            Some(len - self.frame_len)
        } else {
            None
        };
        let hop = self.hop;
        (0..)
            .map(move |i| i * hop)
            .take_while(move |&s| last.is_some_and(|l| s <= l))
    }
}

/// One-sided power spectrum of an analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    bin_power: Vec<f64>,
    bin_hz: f64,
    weighted: bool,
    n_fft: usize,
}

impl SpectrumFrame {
    pub fn new(bin_power: Vec<f64>, bin_hz: f64, n_fft: usize, weighted: bool) -> Result<Self> {
        if bin_power.len() != n_fft / 2 + 1 {
            return Err(Error::InvalidSpec(format!(
                "{} bins for n_fft {}",
                bin_power.len(),
                n_fft
            )));
        }
        if !(bin_hz > 0.0 && bin_hz.is_finite()) {
            return Err(Error::InvalidSpec(format!("bin width {bin_hz}")));
        }
        if bin_power.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidSpec("negative or non-finite bin power".into()));
        }
        Ok(Self {
            bin_power,
            bin_hz,
            weighted,
            n_fft,
        })
    }

    pub(crate) fn from_parts_unchecked(
        bin_power: Vec<f64>,
        bin_hz: f64,
        n_fft: usize,
        weighted: bool,
    ) -> Self {
        Self {
            bin_power,
            bin_hz,
            weighted,
            n_fft,
        }
    }

    pub fn bin_power(&self) -> &[f64] {
        &self.bin_power
    }

    pub fn bin_hz(&self) -> f64 {
        self.bin_hz
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.bin_hz * self.n_fft as f64
    }

    pub fn n_bins(&self) -> usize {
        self.bin_power.len()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    /// Sum of power over the full two-sided spectrum divided by `n_fft`,
    /// which equals the mean squared value of the windowed frame.
    pub fn total_power(&self) -> f64 {
        let n = self.n_fft;
        let p = &self.bin_power;
        let mut sum = p[0];
        let last = p.len() - 1;
        for (k, v) in p.iter().enumerate().skip(1) {
            // Nyquist bin appears once for even n_fft.
            if k == last && n.is_multiple_of(2) {
                sum += v;
            } else {
                sum += 2.0 * v;
            }
        }
        sum / n as f64
    }
}

fn frame_power(fft: &FftPair, frame: &[f64]) -> Vec<f64> {
    let n = fft.len();
    let spec = fft.forward_real(frame);
    spec[..n / 2 + 1]
        .iter()
        .map(|c| c.norm_sqr() / n as f64)
        .collect()
}

/// Short-time power spectra, one frame per hop.
pub fn stft(buffer: &AudioBuffer, plan: &FramePlan) -> Result<Vec<SpectrumFrame>> {
    plan.validate()?;
    if buffer.len() < plan.frame_len {
        return Err(Error::BufferTooShort {
            len: buffer.len(),
            needed: plan.frame_len,
        });
    }
    let n = plan.frame_len;
    let fft = FftPair::new(n);
    let window = plan.window.coefficients(n);
    let bin_hz = buffer.sample_rate_hz() as f64 / n as f64;
    let x = buffer.samples();
    let mut scratch = vec![0.0; n];
    Ok(plan
        .frame_starts(x.len())
        .map(|s| {
            for (o, (v, w)) in scratch.iter_mut().zip(x[s..s + n].iter().zip(&window)) {
                *o = v * w;
            }
            SpectrumFrame::from_parts_unchecked(frame_power(&fft, &scratch), bin_hz, n, false)
        })
        .collect())
}

/// Bin-wise mean of equally shaped frames.
pub fn average_spectra(frames: &[SpectrumFrame]) -> Result<SpectrumFrame> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidSpec("no frames to average".into()))?;
    let mut acc = vec![0.0; first.n_bins()];
    for f in frames {
        if f.n_fft != first.n_fft || f.weighted != first.weighted {
            return Err(Error::InvalidSpec("frames differ in shape".into()));
        }
        for (a, p) in acc.iter_mut().zip(&f.bin_power) {
            *a += p;
        }
    }
    let k = frames.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    Ok(SpectrumFrame::from_parts_unchecked(
        acc,
        first.bin_hz,
        first.n_fft,
        first.weighted,
    ))
}

/// Averaged periodogram over every frame of `buffer`.
pub fn welch_spectrum(buffer: &AudioBuffer, plan: &FramePlan) -> Result<SpectrumFrame> {
    average_spectra(&stft(buffer, plan)?)
}
