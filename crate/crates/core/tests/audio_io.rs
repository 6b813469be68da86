use pitch_strength::{load_audio, save_audio, AudioBuffer, BitDepth, Error};
use proptest::prelude::*;

fn write_f32(path: &std::path::Path, channels: u16, interleaved: &[f32]) {
    let spec = hound::WavSpec {
        channels,
        sample_rate: 48000,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in interleaved {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
}

#[test]
fn sixteen_bit_round_trip_at_44k1() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.wav");
    let b = AudioBuffer::new(vec![0.0, 0.25], 44100).unwrap();
    let report = save_audio(&b, &p, BitDepth::Int16).unwrap();
    assert_eq!(report.clipped_samples, 0);
    let back = load_audio(&p).unwrap();
    assert_eq!(back.sample_rate_hz(), 44100);
    for (a, b) in back.samples().iter().zip(b.samples()) {
        assert!((a - b).abs() <= 1.0 / 32768.0);
    }
}

#[test]
fn twenty_four_bit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.wav");
    let x: Vec<f64> = (0..1000).map(|i| ((i as f64) * 0.37).sin() * 0.9).collect();
    save_audio(&AudioBuffer::new(x.clone(), 48000).unwrap(), &p, BitDepth::Int24).unwrap();
    let back = load_audio(&p).unwrap();
    for (a, b) in back.samples().iter().zip(&x) {
        assert!((a - b).abs() <= 1.0 / 8_388_608.0);
    }
}

#[test]
fn over_range_sample_is_clipped_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.wav");
    let r = save_audio(&AudioBuffer::new(vec![2.0], 48000).unwrap(), &p, BitDepth::Float32).unwrap();
    assert_eq!(r.clipped_samples, 1);
    assert_eq!(load_audio(&p).unwrap().samples(), &[1.0]);
}

#[test]
fn missing_and_corrupt_files_map_to_distinct_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_audio(dir.path().join("nope.wav")), Err(Error::Io { .. })));
    let p = dir.path().join("junk.wav");
    std::fs::write(&p, b"RIFF\x10\x00\x00\x00WAVEjunk").unwrap();
    assert!(matches!(load_audio(&p), Err(Error::CorruptFile(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn float_round_trip_is_bit_exact(xs in prop::collection::vec(-1.0f32..=1.0, 0..500)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.wav");
        let x: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
        save_audio(&AudioBuffer::new(x.clone(), 48000).unwrap(), &p, BitDepth::Float32).unwrap();
        let back = load_audio(&p).unwrap();
        prop_assert_eq!(back.samples(), &x[..]);
    }

    #[test]
    fn downmix_is_the_channel_mean(pairs in prop::collection::vec((-1.0f32..=1.0, -1.0f32..=1.0), 1..200)) {
        let dir = tempfile::tempdir().unwrap();
        let (l, r): (Vec<f32>, Vec<f32>) = pairs.iter().cloned().unzip();
        let inter: Vec<f32> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        write_f32(&dir.path().join("s.wav"), 2, &inter);
        write_f32(&dir.path().join("l.wav"), 1, &l);
        write_f32(&dir.path().join("r.wav"), 1, &r);
        let s = load_audio(dir.path().join("s.wav")).unwrap();
        let ml = load_audio(dir.path().join("l.wav")).unwrap();
        let mr = load_audio(dir.path().join("r.wav")).unwrap();
        for ((m, a), b) in s.samples().iter().zip(ml.samples()).zip(mr.samples()) {
            prop_assert!((m - (a + b) / 2.0).abs() < 1e-12);
        }
    }
}
