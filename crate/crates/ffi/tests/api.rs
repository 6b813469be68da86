use std::ffi::{CStr, CString};
use std::ptr;

use pitch_strength_ffi::*;

fn last_error() -> String {
    let n = unsafe { ps_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; n + 1];
    unsafe { ps_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn samples(b: *const PsAudioBuffer) -> Vec<f64> {
    let n = unsafe { ps_audio_len(b) };
    let mut v = vec![0.0; n];
    assert_eq!(unsafe { ps_audio_copy_samples(b, v.as_mut_ptr(), n) }, n);
    v
}

#[test]
fn buffer_round_trip_through_a_file() {
    let x: Vec<f64> = (0..4800).map(|i| (i as f64 * 0.05).sin() * 0.5).collect();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { ps_audio_from_samples(x.as_ptr(), x.len(), 48000, &mut b) }, PsStatus::Ok);
    assert_eq!(unsafe { ps_audio_sample_rate(b) }, 48000);
    assert_eq!(samples(b), x);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("x.wav").to_str().unwrap()).unwrap();
    let mut clipped = usize::MAX;
    assert_eq!(unsafe { ps_audio_save(b, path.as_ptr(), 32, &mut clipped) }, PsStatus::Ok);
    assert_eq!(clipped, 0);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { ps_audio_load(path.as_ptr(), &mut back) }, PsStatus::Ok);
    for (a, b) in samples(back).iter().zip(&x) {
        assert_eq!(*a, *b as f32 as f64);
    }
    assert_eq!(unsafe { ps_audio_save(b, path.as_ptr(), 12, ptr::null_mut()) }, PsStatus::InvalidArgument);
    unsafe {
        ps_audio_free(b);
        ps_audio_free(back);
        ps_audio_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut b = ptr::null_mut();
    let missing = CString::new("/nonexistent/dir/none.wav").unwrap();
    assert_eq!(unsafe { ps_audio_load(missing.as_ptr(), &mut b) }, PsStatus::InputFormat);
    assert!(last_error().contains("none.wav"));
    assert!(b.is_null());

    assert_eq!(unsafe { ps_audio_load(ptr::null(), &mut b) }, PsStatus::NullPointer);
    assert_eq!(unsafe { ps_synth_mauch(3000.0, 0.8, 10, 1.0, 48000, &mut b) }, PsStatus::InvalidArgument);
    assert!(last_error().contains("Nyquist"));

    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { ps_audio_load(bad.as_ptr() as *const std::ffi::c_char, &mut b) },
        PsStatus::InvalidUtf8
    );

    let mut v = 0.0;
    assert_eq!(unsafe { ps_normalize_inharmonicity(1.5, &mut v) }, PsStatus::InvalidArgument);
    // A successful call clears the message.
    assert_eq!(unsafe { ps_normalize_inharmonicity(0.0, &mut v) }, PsStatus::Ok);
    assert_eq!(unsafe { ps_last_error_message(ptr::null_mut(), 0) }, 0);
    assert_eq!(v, 1.0);

    // Too few points to fit a model.
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ps_model_fit([0.5].as_ptr(), [0.5].as_ptr(), 1, &mut m) }, PsStatus::Numerical);
}

#[test]
fn error_message_truncates() {
    let mut v = 0.0;
    unsafe { ps_pitch_strength(2.0, 1.0, &mut v) };
    let full = unsafe { ps_last_error_message(ptr::null_mut(), 0) };
    let mut buf = [1 as std::ffi::c_char; 6];
    assert_eq!(unsafe { ps_last_error_message(buf.as_mut_ptr(), buf.len()) }, full);
    assert_eq!(buf[5], 0);
    assert!(full > 5);
}

#[test]
fn synthesis_and_features() {
    let mut tone = ptr::null_mut();
    let mut noise = ptr::null_mut();
    unsafe {
        assert_eq!(ps_synth_reference(1, 500, 1.0, 48000, 0, &mut tone), PsStatus::Ok);
        assert_eq!(ps_synth_reference(11, 500, 1.0, 48000, 0, &mut noise), PsStatus::Ok);
    }
    let (mut ft, mut fn_) = (PsFeatures::default(), PsFeatures::default());
    unsafe {
        assert_eq!(ps_buffer_features(tone, &mut ft), PsStatus::Ok);
        assert_eq!(ps_buffer_features(noise, &mut fn_), PsStatus::Ok);
    }
    assert!(ft.harmonic_ratio > 0.99 && ft.flatness < fn_.flatness);
    assert!(fn_.harmonic_ratio < 0.2 && !fn_.degenerate);

    let x = samples(tone);
    // Mid-signal frame, clear of the onset ramp.
    let mut hr = 0.0;
    assert_eq!(unsafe { ps_harmonic_ratio(x[12000..].as_ptr(), 4800, 48000, &mut hr) }, PsStatus::Ok);
    assert!(hr > 0.999, "{hr}");
    assert_eq!(unsafe { ps_harmonic_ratio(x.as_ptr(), 100, 48000, &mut hr) }, PsStatus::Numerical);

    let mut irn = ptr::null_mut();
    assert_eq!(unsafe { ps_synth_irn(0.004, 1.0, 8, 0.5, 48000, 1, &mut irn) }, PsStatus::Ok);
    assert_eq!(unsafe { ps_audio_len(irn) }, 24000);

    let mut ps = 0.0;
    assert_eq!(unsafe { ps_pitch_strength(0.5, 2.0, &mut ps) }, PsStatus::Ok);
    assert!((ps - 2.0 * 10f64.sqrt()).abs() < 1e-12);
    unsafe {
        ps_audio_free(tone);
        ps_audio_free(noise);
        ps_audio_free(irn);
    }
}

#[test]
fn salience_eq_at_zero_gain_is_near_identity() {
    let mut m = ptr::null_mut();
    unsafe { ps_synth_mauch(220.0, 0.8, 10, 1.0, 48000, &mut m) };
    let mut y = ptr::null_mut();
    assert_eq!(unsafe { ps_salience_eq(m, 0.0, &mut y) }, PsStatus::Ok);
    let (a, b) = (samples(m), samples(y));
    assert_eq!(a.len(), b.len());
    let err: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
    let sig: f64 = a.iter().map(|p| p * p).sum();
    assert!(10.0 * (err / sig).log10() < -50.0);
    assert_eq!(unsafe { ps_salience_eq(m, 2.0, &mut y) }, PsStatus::InvalidArgument);
    unsafe {
        ps_audio_free(m);
        ps_audio_free(y);
    }
}

#[test]
fn model_fit_project_and_json() {
    let hr = [0.1, 0.4, 0.7, 0.95, 0.2, 0.85];
    let flat = [0.6, 0.3, 0.2, 0.02, 0.5, 0.05];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ps_model_fit(hr.as_ptr(), flat.as_ptr(), hr.len(), &mut m) }, PsStatus::Ok);
    let mut p = PsSpacePoint::default();
    assert_eq!(unsafe { ps_model_project(m, 0.95, 0.02, &mut p) }, PsStatus::Ok);
    assert!((p.inharmonicity_norm - 0.05f64.powf(0.21)).abs() < 1e-12);
    assert!(p.noisiness_norm.abs() < 1e-12);

    let json = unsafe { ps_model_to_json(m) };
    assert!(!json.is_null());
    let mut m2 = ptr::null_mut();
    assert_eq!(unsafe { ps_model_from_json(json, &mut m2) }, PsStatus::Ok);
    let mut q = PsSpacePoint::default();
    unsafe { ps_model_project(m2, 0.95, 0.02, &mut q) };
    assert_eq!(p, q);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, unsafe { CStr::from_ptr(json) }.to_bytes()).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut m3 = ptr::null_mut();
    assert_eq!(unsafe { ps_model_load(cpath.as_ptr(), &mut m3) }, PsStatus::Ok);

    let junk = CString::new("{\"version\": 99}").unwrap();
    let mut m4 = ptr::null_mut();
    assert_eq!(unsafe { ps_model_from_json(junk.as_ptr(), &mut m4) }, PsStatus::InputFormat);
    unsafe {
        ps_string_free(json);
        ps_model_free(m);
        ps_model_free(m2);
        ps_model_free(m3);
        ps_model_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ps_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
