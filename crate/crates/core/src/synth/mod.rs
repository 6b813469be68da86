//! Test-signal generators: the eleven graded pitch-strength reference sounds,
//! iterated rippled noise, Mauch harmonic tones and polynomial waveshaping.
//!
//! Every generator is deterministic in its spec (including the seed) and
//! returns a buffer normalized to [`TARGET_RMS`] unless stated otherwise.

pub mod filters;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio_io::{rms, AudioBuffer};
use crate::error::{Error, Result};
use filters::{order_for_slope, Butterworth, FilterKind};

/// -20 dBFS.
pub const TARGET_RMS: f64 = 0.1;

/// Raised-cosine fade length applied to reference sounds.
pub const FADE_S: f64 = 0.010;

/// Band edges of the band-pass sounds relative to the centre frequency.
pub const BAND_PASS_EDGES: (f64, f64) = (0.5, 2.0);

/// Bandwidth of the narrow-band noise (sound 4).
pub const NARROW_BAND_HZ: f64 = 10.0;

/// Peak-to-notch depth of the comb-filtered noise (sound 9).
pub const COMB_DEPTH_DB: f64 = 40.0;

pub const MAX_IRN_ITERATIONS: u32 = 64;

/// One of the eleven reference sounds, numbered by decreasing pitch strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSoundSpec {
    pub sound_id: u8,
    pub center_freq_hz: u32,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    pub seed: u64,
}

impl ReferenceSoundSpec {
    pub fn new(sound_id: u8, center_freq_hz: u32) -> Self {
        Self {
            sound_id,
            center_freq_hz,
            duration_s: 1.0,
            sample_rate_hz: 48000,
            seed: 0,
        }
    }

    pub fn description(&self) -> &'static str {
        REFERENCE_DESCRIPTIONS
            .get(self.sound_id.wrapping_sub(1) as usize)
            .copied()
            .unwrap_or("unknown")
    }

    fn validate(&self) -> Result<()> {
        if !(1..=11).contains(&self.sound_id) {
            return Err(Error::InvalidSpec(format!("sound id {} not in 1..=11", self.sound_id)));
        }
        if ![125, 250, 500].contains(&self.center_freq_hz) {
            return Err(Error::InvalidSpec(format!(
                "centre frequency {} not one of 125, 250, 500 Hz",
                self.center_freq_hz
            )));
        }
        check_duration(self.duration_s, self.sample_rate_hz)?;
        let needed = 5.0 * self.center_freq_hz as f64; // AM tone upper sideband
        if needed >= self.sample_rate_hz as f64 / 2.0 {
            return Err(Error::NyquistViolation {
                highest_hz: needed,
                nyquist_hz: self.sample_rate_hz as f64 / 2.0,
            });
        }
        if (self.duration_s * self.sample_rate_hz as f64) < 4.0 * FADE_S * self.sample_rate_hz as f64 {
            return Err(Error::InvalidSpec(format!(
                "duration {} s too short for {} s fades",
                self.duration_s, FADE_S
            )));
        }
        Ok(())
    }
}

pub const REFERENCE_DESCRIPTIONS: [&str; 11] = [
    "pure tone",
    "harmonic complex tone, -3 dB/octave, 7 partials",
    "harmonic complex tone, -3 dB/octave",
    "narrow-band noise, 10 Hz wide",
    "AM tone, m = 1",
    "harmonic complex tone, band-pass",
    "band-pass noise, 96 dB/octave slopes",
    "low-pass noise, 192 dB/octave",
    "comb-filter noise, 40 dB depth",
    "AM noise, m = 1",
    "high-pass noise, 192 dB/octave",
];

fn check_duration(duration_s: f64, sample_rate_hz: u32) -> Result<usize> {
    if sample_rate_hz == 0 {
        return Err(Error::InvalidSpec("sample rate must be positive".into()));
    }
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::InvalidSpec(format!("duration {duration_s} s")));
    }
    let n = (duration_s * sample_rate_hz as f64).round() as usize;
    if n == 0 {
        return Err(Error::InvalidSpec("duration shorter than one sample".into()));
    }
    Ok(n)
}

fn white_noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Seeded white Gaussian noise at [`TARGET_RMS`].
pub fn gen_white_noise(duration_s: f64, sample_rate_hz: u32, seed: u64) -> Result<AudioBuffer> {
    let n = check_duration(duration_s, sample_rate_hz)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AudioBuffer::new(normalize_rms(white_noise(n, &mut rng), TARGET_RMS), sample_rate_hz)
}

/// Sinusoid with the given peak amplitude, zero initial phase.
pub fn gen_sine(freq_hz: f64, amplitude: f64, duration_s: f64, sample_rate_hz: u32) -> Result<AudioBuffer> {
    let n = check_duration(duration_s, sample_rate_hz)?;
    if freq_hz >= sample_rate_hz as f64 / 2.0 {
        return Err(Error::NyquistViolation {
            highest_hz: freq_hz,
            nyquist_hz: sample_rate_hz as f64 / 2.0,
        });
    }
    let sr = sample_rate_hz as f64;
    AudioBuffer::new(
        (0..n)
            .map(|i| amplitude * (2.0 * PI * freq_hz * i as f64 / sr).sin())
            .collect(),
        sample_rate_hz,
    )
}

/// Sample-wise sum of equally long buffers at the same rate.
pub fn mix(buffers: &[&AudioBuffer]) -> Result<AudioBuffer> {
    let first = buffers
        .first()
        .ok_or_else(|| Error::InvalidSpec("nothing to mix".into()))?;
    let mut out = vec![0.0; first.len()];
    for b in buffers {
        if b.len() != first.len() || b.sample_rate_hz() != first.sample_rate_hz() {
            return Err(Error::InvalidSpec("mixed buffers differ in length or rate".into()));
        }
        for (o, v) in out.iter_mut().zip(b.samples()) {
            *o += v;
        }
    }
    AudioBuffer::new(out, first.sample_rate_hz())
}

pub(crate) fn normalize_rms(mut x: Vec<f64>, target: f64) -> Vec<f64> {
    let r = rms(&x);
    if r > 0.0 {
        let g = target / r;
        x.iter_mut().for_each(|v| *v *= g);
    }
    x
}

fn apply_fades(x: &mut [f64], fade_len: usize) {
    let fade_len = fade_len.min(x.len() / 2);
    let n = x.len();
    for i in 0..fade_len {
        let w = 0.5 * (1.0 - (PI * i as f64 / fade_len as f64).cos());
        x[i] *= w;
        x[n - 1 - i] *= w;
    }
}

fn harmonic_series(f0: f64, sr: f64, n: usize, offset: usize, max_partial: Option<usize>) -> Vec<f64> {
    let nyquist = sr / 2.0;
    let count = (1..)
        .take_while(|k| (*k as f64) * f0 < nyquist && max_partial.is_none_or(|m| *k <= m))
        .count();
    let mut out = vec![0.0; n];
    for k in 1..=count {
        let amp = (k as f64).powf(-0.5); // -3 dB per octave in power
        let w = 2.0 * PI * k as f64 * f0 / sr;
        for (i, o) in out.iter_mut().enumerate() {
            *o += amp * (w * (i + offset) as f64).sin();
        }
    }
    out
}

/// Band-limited Gaussian noise built in the frequency domain.
fn band_noise(n: usize, sr: f64, lo_hz: f64, hi_hz: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let bin_hz = sr / n as f64;
    let mut spec = vec![Complex::new(0.0, 0.0); n];
    for (k, c) in spec.iter_mut().enumerate().take(n / 2 + 1).skip(1) {
        let f = k as f64 * bin_hz;
        if f >= lo_hz && f <= hi_hz {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *c = Complex::new(re, im);
        }
    }
    for k in 1..n.div_ceil(2) {
        spec[n - k] = spec[k].conj();
    }
    if n.is_multiple_of(2) {
        spec[n / 2].im = 0.0;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| c.re).collect()
}

/// Generates reference sound `spec.sound_id` at `spec.center_freq_hz`.
pub fn gen_reference_sound(spec: &ReferenceSoundSpec) -> Result<AudioBuffer> {
    spec.validate()?;
    let sr = spec.sample_rate_hz as f64;
    let fc = spec.center_freq_hz as f64;
    let n = (spec.duration_s * sr).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Filtered sounds are generated with margins so edge transients are cropped away.
    let pad = (0.25 * sr) as usize;
    let padded = n + 2 * pad;
    let crop = |v: Vec<f64>| v[pad..pad + n].to_vec();
    let (bp_lo, bp_hi) = (BAND_PASS_EDGES.0 * fc, BAND_PASS_EDGES.1 * fc);
    let band_pass = |x: &mut [f64]| {
        let order = order_for_slope(96.0);
        Butterworth::new(FilterKind::HighPass, order, bp_lo, sr).filtfilt(x);
        Butterworth::new(FilterKind::LowPass, order, bp_hi, sr).filtfilt(x);
    };

    let mut x = match spec.sound_id {
        1 => (0..n).map(|i| (2.0 * PI * fc * i as f64 / sr).sin()).collect(),
        2 => harmonic_series(fc, sr, n, 0, Some(7)),
        3 => harmonic_series(fc, sr, n, 0, None),
        4 => band_noise(
            n,
            sr,
            fc - NARROW_BAND_HZ / 2.0,
            fc + NARROW_BAND_HZ / 2.0,
            &mut rng,
        ),
        5 => (0..n)
            .map(|i| {
                let t = i as f64 / sr;
                (1.0 + (2.0 * PI * fc * t).cos()) * (2.0 * PI * 4.0 * fc * t).sin()
            })
            .collect(),
        6 => {
            let mut v = harmonic_series(fc, sr, padded, 0, None);
            band_pass(&mut v);
            crop(v)
        }
        7 => {
            let mut v = white_noise(padded, &mut rng);
            band_pass(&mut v);
            crop(v)
        }
        8 => {
            let mut v = white_noise(padded, &mut rng);
            Butterworth::new(FilterKind::LowPass, order_for_slope(192.0), fc, sr).filtfilt(&mut v);
            crop(v)
        }
        9 => {
            let delay = (sr / fc).round() as usize;
            let g = comb_gain(COMB_DEPTH_DB);
            let v = white_noise(n + delay, &mut rng);
            (0..n).map(|i| v[i + delay] + g * v[i]).collect()
        }
        10 => {
            let v = white_noise(n, &mut rng);
            v.iter()
                .enumerate()
                .map(|(i, s)| (1.0 + (2.0 * PI * fc * i as f64 / sr).cos()) * s)
                .collect()
        }
        11 => {
            let mut v = white_noise(padded, &mut rng);
            Butterworth::new(FilterKind::HighPass, order_for_slope(192.0), fc, sr).filtfilt(&mut v);
            crop(v)
        }
        _ => unreachable!("validated"),
    };

    apply_fades(&mut x, (FADE_S * sr).round() as usize);
    AudioBuffer::new(normalize_rms(x, TARGET_RMS), spec.sample_rate_hz)
}

/// Feed-forward comb gain whose peak-to-notch ratio `(1+g)/(1-g)` equals `depth_db`.
pub fn comb_gain(depth_db: f64) -> f64 {
    let r = 10f64.powf(depth_db / 20.0);
    (r - 1.0) / (r + 1.0)
}

/// Delay-and-add topology of iterated rippled noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IrnNetwork {
    /// Each stage adds a delayed copy of its own input.
    #[default]
    AddSame,
    /// Each stage adds the delayed previous output to the original noise.
    AddOriginal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrnSpec {
    pub delay_s: f64,
    pub gain: f64,
    pub iterations: u32,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    pub seed: u64,
    pub network: IrnNetwork,
}

impl IrnSpec {
    pub fn new(delay_s: f64, gain: f64, iterations: u32) -> Self {
        Self {
            delay_s,
            gain,
            iterations,
            duration_s: 1.0,
            sample_rate_hz: 48000,
            seed: 0,
            network: IrnNetwork::AddSame,
        }
    }

    pub fn delay_samples(&self) -> usize {
        (self.delay_s * self.sample_rate_hz as f64).round() as usize
    }
}

/// Iterated rippled noise.
///
/// Noise starts long enough before the output window that every iteration
/// sees a stationary input regardless of the iteration count, so equal seeds
/// share the same underlying noise.
pub fn gen_irn(spec: &IrnSpec) -> Result<AudioBuffer> {
    let n = check_duration(spec.duration_s, spec.sample_rate_hz)?;
    if !(spec.delay_s * spec.sample_rate_hz as f64 >= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "delay {} s is shorter than one sample",
            spec.delay_s
        )));
    }
    if !(-1.0..=1.0).contains(&spec.gain) {
        return Err(Error::InvalidSpec(format!("IRN gain {} outside [-1, 1]", spec.gain)));
    }
    if spec.iterations > MAX_IRN_ITERATIONS {
        return Err(Error::InvalidSpec(format!(
            "{} iterations exceeds {MAX_IRN_ITERATIONS}",
            spec.iterations
        )));
    }
    let d = spec.delay_samples();
    let pre = MAX_IRN_ITERATIONS as usize * d;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let original = white_noise(n + pre, &mut rng);
    let mut y = original.clone();
    let mut next = vec![0.0; y.len()];
    for _ in 0..spec.iterations {
        let source = match spec.network {
            IrnNetwork::AddSame => &y,
            IrnNetwork::AddOriginal => &original,
        };
        for t in 0..y.len() {
            let delayed = if t >= d { y[t - d] } else { 0.0 };
            next[t] = source[t] + spec.gain * delayed;
        }
        std::mem::swap(&mut y, &mut next);
    }
    AudioBuffer::new(normalize_rms(y[pre..].to_vec(), TARGET_RMS), spec.sample_rate_hz)
}

/// Harmonic tone whose k-th partial has amplitude `s^(k-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MauchToneSpec {
    pub f0_hz: f64,
    pub s: f64,
    pub n_harmonics: u32,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
}

impl MauchToneSpec {
    pub fn new(f0_hz: f64) -> Self {
        Self {
            f0_hz,
            s: 0.8,
            n_harmonics: 10,
            duration_s: 1.0,
            sample_rate_hz: 48000,
        }
    }

    pub fn partial_hz(&self, k: u32) -> f64 {
        self.f0_hz * k as f64
    }

    pub fn partial_amplitude(&self, k: u32) -> f64 {
        self.s.powi(k as i32 - 1)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.f0_hz > 0.0) {
            return Err(Error::NonpositiveFrequency(self.f0_hz));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidSpec(format!("decay s = {} outside (0, 1)", self.s)));
        }
        if self.n_harmonics == 0 {
            return Err(Error::InvalidSpec("tone needs at least one harmonic".into()));
        }
        let top = self.partial_hz(self.n_harmonics);
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if top >= nyquist {
            return Err(Error::NyquistViolation {
                highest_hz: top,
                nyquist_hz: nyquist,
            });
        }
        Ok(())
    }
}

/// Zero-phase Mauch harmonic tone at [`TARGET_RMS`].
pub fn gen_mauch_tone(spec: &MauchToneSpec) -> Result<AudioBuffer> {
    spec.validate()?;
    let n = check_duration(spec.duration_s, spec.sample_rate_hz)?;
    let sr = spec.sample_rate_hz as f64;
    let mut x = vec![0.0; n];
    for k in 1..=spec.n_harmonics {
        let a = spec.partial_amplitude(k);
        let w = 2.0 * PI * spec.partial_hz(k) / sr;
        for (i, v) in x.iter_mut().enumerate() {
            *v += a * (w * i as f64).sin();
        }
    }
    AudioBuffer::new(normalize_rms(x, TARGET_RMS), spec.sample_rate_hz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputNormalization {
    #[default]
    None,
    /// Scale so the largest magnitude is 1.
    Peak,
}

/// Memoryless polynomial `y = sum c_i x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveshaperSpec {
    pub polynomial_coeffs: Vec<f64>,
    pub output_normalization: OutputNormalization,
}

impl WaveshaperSpec {
    pub fn new(polynomial_coeffs: Vec<f64>) -> Self {
        Self {
            polynomial_coeffs,
            output_normalization: OutputNormalization::None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.polynomial_coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

pub fn apply_waveshaper(input: &AudioBuffer, spec: &WaveshaperSpec) -> Result<AudioBuffer> {
    if spec.polynomial_coeffs.len() < 2 {
        return Err(Error::InvalidSpec("waveshaper polynomial needs degree >= 1".into()));
    }
    if spec.polynomial_coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidSpec("non-finite waveshaper coefficient".into()));
    }
    let mut y: Vec<f64> = input.samples().iter().map(|&x| spec.eval(x)).collect();
    if spec.output_normalization == OutputNormalization::Peak {
        let peak = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            y.iter_mut().for_each(|v| *v /= peak);
        }
    }
    AudioBuffer::new(y, input.sample_rate_hz())
}
