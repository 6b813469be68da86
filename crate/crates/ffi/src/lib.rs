//! C interface to the pitch-strength toolkit.
//!
//! Buffers and space models are opaque handles created by `ps_*` constructors
//! and released with the matching `*_free`. Every fallible call returns a
//! [`PsStatus`]; on failure `ps_last_error_message` describes the cause for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use pitch_strength::features::{harmonic_ratio, ps_from_ac1, HrParams};
use pitch_strength::pipeline::{segment_features, AnalysisParams};
use pitch_strength::salience_eq::{apply_salience_gain, SalienceSettings};
use pitch_strength::space::{normalize_inharmonicity, SpaceModel};
use pitch_strength::synth::{
    gen_irn, gen_mauch_tone, gen_reference_sound, IrnSpec, MauchToneSpec, ReferenceSoundSpec,
};
use pitch_strength::{AudioBuffer, BitDepth, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent.
    InvalidArgument = 2,
    /// A file or document could not be read, written or parsed.
    InputFormat = 3,
    /// The computation itself failed (too few points, degenerate data).
    Numerical = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// An internal panic was caught at the boundary.
    Internal = 6,
}

/// Mono audio buffer.
pub struct PsAudioBuffer(AudioBuffer);

/// Fitted noisiness-inharmonicity space.
pub struct PsSpaceModel(SpaceModel);

/// Median raw features of one buffer.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsFeatures {
    pub harmonic_ratio: f64,
    pub flatness: f64,
    /// Buffer had no energy; the values above are placeholders.
    pub degenerate: bool,
}

/// A feature vector placed in a fitted space.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsSpacePoint {
    pub noisiness_norm: f64,
    pub inharmonicity_norm: f64,
    pub pc1: f64,
    pub pc2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: PsStatus, msg: impl Into<String>) -> PsStatus {
    set_error(msg.into());
    status
}

fn from_error(err: Error) -> PsStatus {
    let status = match err.exit_code() {
        2 => PsStatus::InvalidArgument,
        3 => PsStatus::InputFormat,
        _ => PsStatus::Numerical,
    };
    fail(status, err.to_string())
}

/// Runs `f` with the thread's error cleared, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), PsStatus>) -> PsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(PsStatus::Internal, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, PsStatus>;
}

impl<T> OrStatus<T> for pitch_strength::Result<T> {
    fn or_status(self) -> Result<T, PsStatus> {
        self.map_err(from_error)
    }
}

unsafe fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, PsStatus> {
    p.as_ref()
        .ok_or_else(|| fail(PsStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, PsStatus> {
    p.as_mut()
        .ok_or_else(|| fail(PsStatus::NullPointer, format!("{name} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, PsStatus> {
    if p.is_null() {
        return Err(fail(PsStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PsStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], PsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(fail(PsStatus::NullPointer, "samples is null"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn emit_buffer(out: &mut *mut PsAudioBuffer, buffer: AudioBuffer) {
    *out = Box::into_raw(Box::new(PsAudioBuffer(buffer)));
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length excluding the NUL, or
/// 0 when there is no error. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ps_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Wraps `len` samples at `sample_rate_hz` in a new buffer.
///
/// # Safety
/// `samples` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_audio_from_samples(
    samples: *const f64,
    len: usize,
    sample_rate_hz: u32,
    out: *mut *mut PsAudioBuffer,
) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let x = slice_arg(samples, len)?;
        emit_buffer(out, AudioBuffer::new(x.to_vec(), sample_rate_hz).or_status()?);
        Ok(())
    })
}

/// Reads a WAV file, down-mixing to mono.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_audio_load(path: *const c_char, out: *mut *mut PsAudioBuffer) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = PathBuf::from(c_str(path, "path")?);
        emit_buffer(out, pitch_strength::load_audio(path).or_status()?);
        Ok(())
    })
}

/// Writes a WAV file at 16, 24 or 32 (float) bits. The number of samples
/// hard-clipped to [-1, 1] goes to `clipped` when it is not null.
///
/// # Safety
/// `buffer` must be a live handle, `path` a NUL-terminated string and
/// `clipped` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_audio_save(
    buffer: *const PsAudioBuffer,
    path: *const c_char,
    bits: u32,
    clipped: *mut usize,
) -> PsStatus {
    guard(|| {
        let b = non_null(buffer, "buffer")?;
        let path = PathBuf::from(c_str(path, "path")?);
        let depth = match bits {
            16 => BitDepth::Int16,
            24 => BitDepth::Int24,
            32 => BitDepth::Float32,
            other => return Err(fail(PsStatus::InvalidArgument, format!("bit depth {other}"))),
        };
        let report = pitch_strength::save_audio(&b.0, path, depth).or_status()?;
        if let Some(c) = clipped.as_mut() {
            *c = report.clipped_samples;
        }
        Ok(())
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `buffer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_audio_len(buffer: *const PsAudioBuffer) -> usize {
    buffer.as_ref().map_or(0, |b| b.0.len())
}

/// Sample rate in Hz, or 0 for a null handle.
///
/// # Safety
/// `buffer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_audio_sample_rate(buffer: *const PsAudioBuffer) -> u32 {
    buffer.as_ref().map_or(0, |b| b.0.sample_rate_hz())
}

/// Copies up to `cap` samples into `dst`; returns how many were copied.
///
/// # Safety
/// `buffer` must be null or a live handle; `dst` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ps_audio_copy_samples(buffer: *const PsAudioBuffer, dst: *mut f64, cap: usize) -> usize {
    let Some(b) = buffer.as_ref() else { return 0 };
    if dst.is_null() {
        return 0;
    }
    let n = b.0.len().min(cap);
    std::ptr::copy_nonoverlapping(b.0.samples().as_ptr(), dst, n);
    n
}

/// Releases a buffer. Null is ignored.
///
/// # Safety
/// `buffer` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_audio_free(buffer: *mut PsAudioBuffer) {
    if !buffer.is_null() {
        drop(Box::from_raw(buffer));
    }
}

/// Reference sound `sound_id` (1 strongest pitch .. 11 weakest).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_synth_reference(
    sound_id: u8,
    center_freq_hz: u32,
    duration_s: f64,
    sample_rate_hz: u32,
    seed: u64,
    out: *mut *mut PsAudioBuffer,
) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec = ReferenceSoundSpec {
            duration_s,
            sample_rate_hz,
            seed,
            ..ReferenceSoundSpec::new(sound_id, center_freq_hz)
        };
        emit_buffer(out, gen_reference_sound(&spec).or_status()?);
        Ok(())
    })
}

/// Iterated rippled noise with pitch at `1 / delay_s`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_synth_irn(
    delay_s: f64,
    gain: f64,
    iterations: u32,
    duration_s: f64,
    sample_rate_hz: u32,
    seed: u64,
    out: *mut *mut PsAudioBuffer,
) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec = IrnSpec {
            duration_s,
            sample_rate_hz,
            seed,
            ..IrnSpec::new(delay_s, gain, iterations)
        };
        emit_buffer(out, gen_irn(&spec).or_status()?);
        Ok(())
    })
}

/// Harmonic tone whose k-th partial has amplitude `s^(k-1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_synth_mauch(
    f0_hz: f64,
    s: f64,
    n_harmonics: u32,
    duration_s: f64,
    sample_rate_hz: u32,
    out: *mut *mut PsAudioBuffer,
) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec = MauchToneSpec {
            s,
            n_harmonics,
            duration_s,
            sample_rate_hz,
            ..MauchToneSpec::new(f0_hz)
        };
        emit_buffer(out, gen_mauch_tone(&spec).or_status()?);
        Ok(())
    })
}

/// HarmonicRatio of one frame with the default 25-2000 Hz pitch range.
///
/// # Safety
/// `frame` must point to `len` doubles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_harmonic_ratio(
    frame: *const f64,
    len: usize,
    sample_rate_hz: u32,
    out_value: *mut f64,
) -> PsStatus {
    guard(|| {
        let out = out_ptr(out_value, "out_value")?;
        let x = slice_arg(frame, len)?;
        *out = harmonic_ratio(x, sample_rate_hz, &HrParams::default()).or_status()?.value;
        Ok(())
    })
}

/// Median HarmonicRatio and flatness of a whole buffer (default analysis).
///
/// # Safety
/// `buffer` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_buffer_features(buffer: *const PsAudioBuffer, out: *mut PsFeatures) -> PsStatus {
    guard(|| {
        let b = non_null(buffer, "buffer")?;
        let out = out_ptr(out, "out")?;
        let (f, degenerate) = segment_features(&b.0, &AnalysisParams::default()).or_status()?;
        *out = PsFeatures {
            harmonic_ratio: f.harmonic_ratio,
            flatness: f.flatness,
            degenerate,
        };
        Ok(())
    })
}

/// HR-inharmonicity `(1 - hr)^0.21`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_normalize_inharmonicity(hr: f64, out: *mut f64) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = normalize_inharmonicity(hr).or_status()?;
        Ok(())
    })
}

/// Pitch-strength estimate `k * 10^ac1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_pitch_strength(ac1: f64, k: f64, out: *mut f64) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ps_from_ac1(ac1, k).or_status()?.value;
        Ok(())
    })
}

/// Salience equalizer with default settings and `gain` in [-1, 1].
///
/// # Safety
/// `buffer` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_salience_eq(
    buffer: *const PsAudioBuffer,
    gain: f64,
    out: *mut *mut PsAudioBuffer,
) -> PsStatus {
    guard(|| {
        let b = non_null(buffer, "buffer")?;
        let out = out_ptr(out, "out")?;
        emit_buffer(out, apply_salience_gain(&b.0, &SalienceSettings::with_gain(gain)).or_status()?);
        Ok(())
    })
}

/// Loads a space model saved as JSON.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_model_load(path: *const c_char, out: *mut *mut PsSpaceModel) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = PathBuf::from(c_str(path, "path")?);
        *out = Box::into_raw(Box::new(PsSpaceModel(SpaceModel::load(path).or_status()?)));
        Ok(())
    })
}

/// Parses a space model from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_model_from_json(json: *const c_char, out: *mut *mut PsSpaceModel) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = c_str(json, "json")?;
        *out = Box::into_raw(Box::new(PsSpaceModel(SpaceModel::from_json(text).or_status()?)));
        Ok(())
    })
}

/// Fits a model on `n` raw (harmonic_ratio, flatness) pairs.
///
/// # Safety
/// `harmonic_ratio` and `flatness` must each point to `n` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_model_fit(
    harmonic_ratio: *const f64,
    flatness: *const f64,
    n: usize,
    out: *mut *mut PsSpaceModel,
) -> PsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let hr = slice_arg(harmonic_ratio, n)?;
        let flat = slice_arg(flatness, n)?;
        let features: Vec<_> = hr
            .iter()
            .zip(flat)
            .map(|(&h, &f)| pitch_strength::features::FeatureVector::raw(h, f))
            .collect();
        *out = Box::into_raw(Box::new(PsSpaceModel(SpaceModel::fit(&features).or_status()?)));
        Ok(())
    })
}

/// Serializes a model; free the result with [`ps_string_free`].
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_model_to_json(model: *const PsSpaceModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => CString::new(m.0.to_json()).map_or(std::ptr::null_mut(), CString::into_raw),
        None => std::ptr::null_mut(),
    }
}

/// Places raw features in the model's space.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_model_project(
    model: *const PsSpaceModel,
    harmonic_ratio: f64,
    flatness: f64,
    out: *mut PsSpacePoint,
) -> PsStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let out = out_ptr(out, "out")?;
        let mut f = pitch_strength::features::FeatureVector::raw(harmonic_ratio, flatness);
        let (pc1, pc2) = m.0.apply(&mut f).or_status()?;
        *out = PsSpacePoint {
            noisiness_norm: f.noisiness_norm.unwrap_or_default(),
            inharmonicity_norm: f.inharmonicity_norm.unwrap_or_default(),
            pc1,
            pc2,
        };
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_model_free(model: *mut PsSpaceModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
