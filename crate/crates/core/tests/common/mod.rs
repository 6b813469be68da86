#![allow(dead_code)]

use pitch_strength::audio_io::AudioBuffer;
use pitch_strength::synth::gen_white_noise;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub const SR: u32 = 48000;

/// White noise with a Gaussian bump of `height_db` (in dB, sigma `sigma_hz`)
/// imposed on its spectrum at `centre_hz`. Built in one whole-signal FFT.
pub fn formant_noise(height_db: f64, centre_hz: f64, sigma_hz: f64, dur_s: f64, seed: u64) -> AudioBuffer {
    let noise = gen_white_noise(dur_s, SR, seed).unwrap();
    let n = noise.len();
    let mut buf: Vec<Complex<f64>> = noise.samples().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for k in 0..n {
        let kk = if k <= n / 2 { k } else { n - k };
        let f = kk as f64 * SR as f64 / n as f64;
        let g_db = height_db * (-(f - centre_hz).powi(2) / (2.0 * sigma_hz * sigma_hz)).exp();
        buf[k] *= 10f64.powf(g_db / 20.0);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let y = buf.iter().map(|c| c.re / n as f64).collect();
    AudioBuffer::new(y, SR).unwrap()
}

/// The single-formant fixture whose averaged salience measures about 12 dB.
pub fn twelve_db_fixture() -> AudioBuffer {
    formant_noise(23.0, 2000.0, 150.0, 4.0, 1)
}

pub fn sine(freq_hz: f64, dur_s: f64) -> Vec<f64> {
    let n = (dur_s * SR as f64).round() as usize;
    let w = 2.0 * std::f64::consts::PI * freq_hz / SR as f64;
    (0..n).map(|i| (w * i as f64).sin()).collect()
}

pub fn rms_error_db(a: &[f64], b: &[f64]) -> f64 {
    let err: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let sig: f64 = a.iter().map(|x| x * x).sum();
    10.0 * (err / sig).log10()
}

/// Averaged Hann periodogram (hop n/2), computed directly with rustfft so it
/// does not share code with the library's STFT.
pub fn avg_power(x: &[f64], n_fft: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n_fft)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n_fft as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    let mut acc = vec![0.0; n_fft / 2 + 1];
    let mut frames = 0;
    let mut start = 0;
    while start + n_fft <= x.len() {
        let mut buf: Vec<Complex<f64>> =
            x[start..start + n_fft].iter().zip(&w).map(|(v, w)| Complex::new(v * w, 0.0)).collect();
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        frames += 1;
        start += n_fft / 2;
    }
    acc.iter().map(|a| a / frames as f64).collect()
}

pub fn db(p: f64) -> f64 {
    10.0 * p.max(1e-300).log10()
}

/// Largest power (dB) within `tol_hz` of `freq_hz`.
pub fn peak_db_near(power: &[f64], bin_hz: f64, freq_hz: f64, tol_hz: f64) -> f64 {
    let lo = ((freq_hz - tol_hz) / bin_hz).floor().max(0.0) as usize;
    let hi = (((freq_hz + tol_hz) / bin_hz).ceil() as usize).min(power.len() - 1);
    power[lo..=hi].iter().cloned().fold(f64::MIN, f64::max).max(1e-300).log10() * 10.0
}
