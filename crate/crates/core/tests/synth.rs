mod common;

use common::{avg_power, db, peak_db_near, SR};
use pitch_strength::synth::*;
use proptest::prelude::*;

fn reference(id: u8, freq: u32) -> Vec<f64> {
    gen_reference_sound(&ReferenceSoundSpec::new(id, freq)).unwrap().into_samples()
}

fn rms_db(x: &[f64]) -> f64 {
    db(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

#[test]
fn pure_tone_stands_40_db_above_distant_bins() {
    let p = avg_power(&reference(1, 500), 8192);
    let bin = SR as f64 / 8192.0;
    let peak = peak_db_near(&p, bin, 500.0, bin);
    let rest = p
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as f64 * bin - 500.0).abs() > 100.0)
        .map(|(_, &v)| db(v))
        .fold(f64::MIN, f64::max);
    assert!(peak - rest >= 40.0, "peak {peak:.1} dB, rest {rest:.1} dB");
}

#[test]
fn harmonic_tone_falls_three_db_per_octave() {
    let p = avg_power(&reference(3, 500), 8192);
    let bin = SR as f64 / 8192.0;
    for (lo, hi) in [(500.0, 1000.0), (1000.0, 2000.0), (2000.0, 4000.0)] {
        let slope = peak_db_near(&p, bin, hi, bin) - peak_db_near(&p, bin, lo, bin);
        assert!((slope + 3.0).abs() <= 0.5, "{lo}->{hi} Hz: {slope:.2} dB");
    }
}

#[test]
fn narrow_band_noise_energy_stays_in_band() {
    let spec = ReferenceSoundSpec {
        duration_s: 4.0,
        ..ReferenceSoundSpec::new(4, 500)
    };
    let x = gen_reference_sound(&spec).unwrap().into_samples();
    // Zero-padded single-shot spectrum: fine resolution, no frame averaging.
    let n = x.len().next_power_of_two() * 2;
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
        x.iter().map(|&v| rustfft::num_complex::Complex::new(v, 0.0)).collect();
    buf.resize(n, Default::default());
    rustfft::FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = SR as f64 / n as f64;
    let power: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    let inside: f64 = power
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as f64 * bin - 500.0).abs() <= 10.0)
        .map(|(_, p)| p)
        .sum();
    assert!(inside / total >= 0.99, "{:.4}", inside / total);
}

#[test]
fn every_sound_at_every_centre_is_valid() {
    for freq in [125, 250, 500] {
        for id in 1..=11 {
            let x = reference(id, freq);
            assert!(x.iter().all(|v| v.is_finite()));
            let r = rms_db(&x) - db(TARGET_RMS * TARGET_RMS);
            assert!(r.abs() <= 0.5, "sound {id} at {freq} Hz: {r:.3} dB off target");
        }
    }
}

#[test]
fn band_limited_sounds_match_their_descriptions() {
    let bin = SR as f64 / 8192.0;
    let band = |p: &[f64], lo: f64, hi: f64| -> f64 {
        let a = (lo / bin) as usize;
        let b = (hi / bin) as usize;
        db(p[a..b].iter().sum::<f64>() / (b - a) as f64)
    };
    // Low-pass noise at 500 Hz: an octave above the corner is far down.
    let p = avg_power(&reference(8, 500), 8192);
    assert!(band(&p, 200.0, 400.0) - band(&p, 1000.0, 2000.0) > 60.0);
    // High-pass noise mirrors it.
    let p = avg_power(&reference(11, 500), 8192);
    assert!(band(&p, 1000.0, 2000.0) - band(&p, 125.0, 250.0) > 60.0);
    // Band-pass noise sits between half and twice the centre.
    let p = avg_power(&reference(7, 500), 8192);
    let mid = band(&p, 400.0, 800.0);
    assert!(mid - band(&p, 50.0, 150.0) > 40.0);
    assert!(mid - band(&p, 3000.0, 6000.0) > 40.0);
    // AM tone: carrier at 4 x centre with sidebands one centre away. A
    // 9600-point transform puts all three on bin centres.
    let bin = SR as f64 / 9600.0;
    let p = avg_power(&reference(5, 500), 9600);
    let carrier = peak_db_near(&p, bin, 2000.0, bin);
    for side in [1500.0, 2500.0] {
        let d = carrier - peak_db_near(&p, bin, side, bin);
        assert!((d - 6.02).abs() < 0.5, "sideband {side} Hz: {d:.2} dB below carrier");
    }
    // Comb noise ripples at the centre frequency with 40 dB depth.
    let p = avg_power(&reference(9, 500), 8192);
    let peaks = peak_db_near(&p, bin, 1000.0, 3.0 * bin);
    let notch = p[((750.0 / bin) as usize)..((1250.0 / bin) as usize)]
        .iter()
        .map(|&v| db(v))
        .fold(f64::MAX, f64::min);
    assert!(peaks - notch > 25.0, "comb depth {:.1} dB", peaks - notch);
}

#[test]
fn irn_without_iterations_is_uncorrelated_noise() {
    let x = gen_irn(&IrnSpec::new(0.004, 1.0, 0)).unwrap();
    let r = lag_corr(x.samples(), 192);
    assert!(r.abs() < 0.1, "{r}");
}

fn lag_corr(x: &[f64], lag: usize) -> f64 {
    let a = &x[..x.len() - lag];
    let b = &x[lag..];
    let num: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
    let den = (a.iter().map(|u| u * u).sum::<f64>() * b.iter().map(|v| v * v).sum::<f64>()).sqrt();
    num / den
}

#[test]
fn one_iteration_correlates_one_half_at_the_delay() {
    let spec = IrnSpec {
        duration_s: 4.0,
        ..IrnSpec::new(0.004, 1.0, 1)
    };
    let x = gen_irn(&spec).unwrap();
    let r = lag_corr(x.samples(), 192);
    assert!((r - 0.5).abs() <= 0.05, "{r}");
}

#[test]
fn more_iterations_more_correlation() {
    let one = lag_corr(gen_irn(&IrnSpec::new(0.004, 1.0, 1)).unwrap().samples(), 192);
    let four = lag_corr(gen_irn(&IrnSpec::new(0.004, 1.0, 4)).unwrap().samples(), 192);
    assert!(four > one, "{one} vs {four}");
}

#[test]
fn zero_gain_irn_equals_zero_iterations() {
    let a = gen_irn(&IrnSpec::new(0.004, 0.0, 8)).unwrap();
    let b = gen_irn(&IrnSpec::new(0.004, 1.0, 0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mauch_second_partial_is_s_below_first() {
    let p = avg_power(gen_mauch_tone(&MauchToneSpec::new(500.0)).unwrap().samples(), 8192);
    let bin = SR as f64 / 8192.0;
    let d = peak_db_near(&p, bin, 1000.0, bin) - peak_db_near(&p, bin, 500.0, bin);
    assert!((d - 20.0 * 0.8f64.log10()).abs() <= 0.2, "{d:.3}");
}

#[test]
fn mauch_has_nothing_above_its_top_partial() {
    let p = avg_power(gen_mauch_tone(&MauchToneSpec::new(500.0)).unwrap().samples(), 8192);
    let bin = SR as f64 / 8192.0;
    let top = p.iter().cloned().fold(0.0, f64::max);
    let k0 = (5100.0 / bin) as usize;
    let above = p[k0..].iter().cloned().fold(0.0, f64::max);
    assert!(db(top) - db(above) > 90.0, "{:.1} dB", db(top) - db(above));
}

#[test]
fn cubic_shaper_makes_first_and_third_harmonics_only() {
    let x = gen_sine(500.0, 0.5, 1.0, SR).unwrap();
    let y = apply_waveshaper(&x, &WaveshaperSpec::new(vec![0.0, 0.0, 0.0, 1.0])).unwrap();
    let p = avg_power(y.samples(), 9600);
    let bin = SR as f64 / 9600.0;
    let h1 = peak_db_near(&p, bin, 500.0, bin);
    let h3 = peak_db_near(&p, bin, 1500.0, bin);
    for f in [1000.0, 2000.0, 2500.0] {
        assert!(h3 - peak_db_near(&p, bin, f, bin) > 60.0, "{f} Hz");
    }
    // sin^3 = (3 sin - sin 3x)/4.
    assert!((h1 - h3 - 20.0 * 3f64.log10()).abs() < 0.2);
}

#[test]
fn generators_are_deterministic() {
    let s = ReferenceSoundSpec {
        seed: 7,
        ..ReferenceSoundSpec::new(7, 250)
    };
    assert_eq!(gen_reference_sound(&s).unwrap(), gen_reference_sound(&s).unwrap());
    let i = IrnSpec {
        seed: 3,
        ..IrnSpec::new(0.002, 1.0, 4)
    };
    assert_eq!(gen_irn(&i).unwrap(), gen_irn(&i).unwrap());
}

#[test]
fn generated_rms_is_on_target() {
    let target = db(TARGET_RMS * TARGET_RMS);
    for b in [
        gen_irn(&IrnSpec::new(0.003, 1.0, 16)).unwrap(),
        gen_mauch_tone(&MauchToneSpec::new(220.0)).unwrap(),
        gen_white_noise(1.0, SR, 5).unwrap(),
    ] {
        assert!((rms_db(b.samples()) - target).abs() <= 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn waveshaper_is_memoryless(
        xs in prop::collection::vec(-1.0f64..1.0, 2..64),
        coeffs in prop::collection::vec(-2.0f64..2.0, 2..6),
        rot in 0usize..64,
    ) {
        let spec = WaveshaperSpec::new(coeffs);
        let input = pitch_strength::AudioBuffer::new(xs.clone(), SR).unwrap();
        let out = apply_waveshaper(&input, &spec).unwrap().into_samples();
        let mut permuted = xs.clone();
        let r = rot % xs.len();
        permuted.rotate_left(r);
        let out_p = apply_waveshaper(&pitch_strength::AudioBuffer::new(permuted, SR).unwrap(), &spec)
            .unwrap()
            .into_samples();
        let mut expected = out.clone();
        expected.rotate_left(r);
        prop_assert_eq!(out_p, expected);
    }
}
