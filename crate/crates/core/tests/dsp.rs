mod common;

use common::{sine, SR};
use pitch_strength::dsp::*;
use pitch_strength::synth::{gen_mauch_tone, gen_white_noise, MauchToneSpec};
use pitch_strength::AudioBuffer;
use proptest::prelude::*;

fn welch(x: Vec<f64>) -> SpectrumFrame {
    welch_spectrum(&AudioBuffer::new(x, SR).unwrap(), &FramePlan::default()).unwrap()
}

#[test]
fn sine_frames_peak_in_the_right_bin() {
    let b = AudioBuffer::new(sine(1000.0, 1.0), SR).unwrap();
    let frames = stft(&b, &FramePlan::default()).unwrap();
    assert!(!frames.is_empty());
    let target = 1000.0 / frames[0].bin_hz();
    for f in &frames {
        assert_eq!(f.n_bins(), 4096 / 2 + 1);
        let arg = f
            .bin_power()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((arg as f64 - target).abs() <= 1.0);
    }
}

#[test]
fn noise_autocorrelation_stays_small() {
    let x = gen_white_noise(1.0, SR, 11).unwrap();
    let r = normalized_autocorrelation(&x.samples()[..5096], 1000).unwrap();
    let worst = r.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 0.1, "{worst}");
}

#[test]
fn one_khz_gain_is_zero_at_every_level() {
    for phon in [20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0] {
        assert!(IsoWeighting::new(phon).unwrap().gain_db(1000.0).abs() <= 0.01);
    }
}

#[test]
fn mauch_tone_has_ten_harmonic_peaks() {
    let tone = gen_mauch_tone(&MauchToneSpec::new(500.0)).unwrap();
    let spec = welch(tone.into_samples());
    let peaks = pick_spectral_peaks(&spec, 20.0, 100.0);
    assert_eq!(peaks.len(), 10, "{peaks:?}");
    for (k, p) in peaks.iter().enumerate() {
        let f = 500.0 * (k + 1) as f64;
        assert!((p.freq_hz - f).abs() <= spec.bin_hz() / 2.0, "{} vs {f}", p.freq_hz);
    }
    let deltas = overtone_deltas(&peaks).unwrap();
    assert!(deltas.iter().all(|d| (d - 500.0).abs() <= 10.0));
}

#[test]
fn pure_tone_has_one_peak() {
    assert_eq!(pick_spectral_peaks(&welch(sine(700.0, 1.0)), 20.0, 20.0).len(), 1);
}

#[test]
fn averaged_noise_has_no_prominent_peaks() {
    let x = gen_white_noise(4.0, SR, 2).unwrap();
    assert!(pick_spectral_peaks(&welch(x.into_samples()), 30.0, 20.0).is_empty());
}

#[test]
fn detuned_partials_spread_the_deltas() {
    // Partials k * 500 * (1 + e_k) with fixed offsets of up to 1 %.
    let eps = [0.004, -0.008, 0.01, -0.003, 0.007, -0.01];
    let n = SR as usize;
    let mut x = vec![0.0; n];
    for (k, e) in eps.iter().enumerate() {
        let f = 500.0 * (k + 1) as f64 * (1.0 + e);
        for (i, v) in x.iter_mut().enumerate() {
            *v += (2.0 * std::f64::consts::PI * f * i as f64 / SR as f64).sin();
        }
    }
    let plan = FramePlan::new(16384, 4096, Window::Hann).unwrap();
    let spec = welch_spectrum(&AudioBuffer::new(x, SR).unwrap(), &plan).unwrap();
    let peaks = pick_spectral_peaks(&spec, 20.0, 100.0);
    assert_eq!(peaks.len(), eps.len());
    let deltas = overtone_deltas(&peaks).unwrap();
    let expected: Vec<f64> = (1..eps.len())
        .map(|k| 500.0 * ((k + 1) as f64 * (1.0 + eps[k]) - k as f64 * (1.0 + eps[k - 1])))
        .collect();
    for (d, e) in deltas.iter().zip(&expected) {
        assert!((d - e).abs() < 1.0, "{d} vs {e}");
    }
    let worst = deltas.iter().map(|d| (d - 500.0).abs() / 500.0).fold(0.0, f64::max);
    assert!(worst > 0.01 && worst < 0.2, "{worst}");
}

#[test]
fn midi_reference_points() {
    assert!((freq_to_midi(440.0).unwrap() - 69.0).abs() < 1e-12);
    assert!((freq_to_midi(261.626).unwrap() - 60.0).abs() < 0.01);
    assert!((freq_to_midi(55.0).unwrap() - 33.0).abs() < 1e-12);
    assert!(freq_to_midi(0.0).is_err());
}

#[test]
fn white_noise_envelope_is_flat() {
    let x = gen_white_noise(8.0, SR, 4).unwrap();
    let spec = welch(x.into_samples());
    let env = spectral_envelope(&spec, 1.0 / 700.0).unwrap();
    let band: Vec<f64> = (0..env.env_db.len())
        .filter(|&k| (100.0..=10000.0).contains(&env.frequency(k)))
        .map(|k| env.env_db[k])
        .collect();
    let mean = band.iter().sum::<f64>() / band.len() as f64;
    let worst = band.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    assert!(worst <= 1.5, "{worst:.2} dB");
}

#[test]
fn envelope_is_idempotent() {
    let tone = gen_mauch_tone(&MauchToneSpec::new(220.0)).unwrap();
    let noise = gen_white_noise(1.0, SR, 9).unwrap().scaled(0.05).unwrap();
    let x: Vec<f64> = tone.samples().iter().zip(noise.samples()).map(|(a, b)| a + b).collect();
    let spec = welch(x);
    let once = spectral_envelope(&spec, 1.0 / 700.0).unwrap();
    let as_frame = SpectrumFrame::new(
        once.env_db.iter().map(|d| 10f64.powf(d / 10.0)).collect(),
        spec.bin_hz(),
        spec.n_fft(),
        false,
    )
    .unwrap();
    let twice = spectral_envelope(&as_frame, 1.0 / 700.0).unwrap();
    let worst = once
        .env_db
        .iter()
        .zip(&twice.env_db)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.5, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn autocorrelation_is_bounded(xs in prop::collection::vec(-1.0f64..1.0, 64..400)) {
        let max_lag = xs.len() / 2;
        let r = normalized_autocorrelation(&xs, max_lag).unwrap();
        prop_assert!(r.values.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v)));
    }

    #[test]
    fn weighting_inverts(phon in 20.0f64..=80.0, powers in prop::collection::vec(1e-6f64..10.0, 257)) {
        let frame = SpectrumFrame::new(powers.clone(), 48000.0 / 512.0, 512, false).unwrap();
        let back = iso226_unweight(&iso226_weight(&frame, phon).unwrap(), phon).unwrap();
        for (a, b) in back.bin_power().iter().zip(&powers) {
            prop_assert!(((a - b) / b).abs() < 1e-9);
        }
        prop_assert!(IsoWeighting::new(phon).unwrap().gain_db(1000.0).abs() < 1e-9);
    }

    #[test]
    fn peaks_ascend_and_keep_their_distance(
        db in prop::collection::vec(-60.0f64..0.0, 129),
        sep in 0.0f64..2000.0,
        prom in 0.0f64..20.0,
    ) {
        let powers = db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
        let frame = SpectrumFrame::new(powers, 48000.0 / 256.0, 256, false).unwrap();
        let peaks = pick_spectral_peaks(&frame, prom, sep);
        for w in peaks.windows(2) {
            prop_assert!(w[1].freq_hz > w[0].freq_hz);
            prop_assert!(w[1].freq_hz - w[0].freq_hz >= sep - 1e-9);
        }
    }
}
