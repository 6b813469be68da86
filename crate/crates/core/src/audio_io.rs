//! WAV input/output and the in-memory [`AudioBuffer`] every other module consumes.
//!
//! Files are RIFF/WAVE PCM: 16 or 24-bit integer, or 32-bit float, mono or
//! stereo. Stereo is downmixed by per-sample channel mean on load. No
//! resampling happens anywhere; analysis code reads the native rate.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Mono signal with its sample rate. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioBuffer {
    /// Validates the rate and that every sample is finite.
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidBuffer("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidBuffer(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Copy of `self` multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|v| v * gain).collect(),
            self.sample_rate_hz,
        )
    }

    /// Sub-buffer over the sample range `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            samples: self.samples[start..end].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Sample encoding used when writing a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Int16,
    Int24,
    Float32,
}

impl FromStr for BitDepth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "16" => Ok(BitDepth::Int16),
            "24" => Ok(BitDepth::Int24),
            "f32" | "32f" | "float" => Ok(BitDepth::Float32),
            other => Err(Error::InvalidSpec(format!("unknown bit depth '{other}'"))),
        }
    }
}

/// Outcome of [`save_audio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SaveReport {
    /// Samples outside [-1, 1] that were hard-clipped.
    pub clipped_samples: usize,
}

fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        // hound reports short reads as a custom `Other` error.
        hound::Error::IoError(e)
            if e.kind() == std::io::ErrorKind::UnexpectedEof
                || e.to_string().contains("enough bytes") =>
        {
            Error::CorruptFile(format!("{}: truncated data", path.display()))
        }
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::FormatError(msg) => Error::CorruptFile(format!("{}: {msg}", path.display())),
        hound::Error::Unsupported => {
            Error::UnsupportedFormat(format!("{}: compressed or unknown encoding", path.display()))
        }
        hound::Error::TooWide | hound::Error::InvalidSampleFormat => {
            Error::UnsupportedFormat(format!("{}: sample format", path.display()))
        }
        hound::Error::UnfinishedSample => {
            Error::CorruptFile(format!("{}: data length not a whole number of samples", path.display()))
        }
    }
}

/// Reads a WAV file into a mono buffer.
pub fn load_audio(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = hound::WavReader::new(BufReader::new(file)).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(Error::UnsupportedFormat(format!(
            "{}: {channels} channels",
            path.display()
        )));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (fmt, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {bits}-bit {fmt:?}",
                path.display()
            )))
        }
    };

    if !interleaved.len().is_multiple_of(channels) {
        return Err(Error::CorruptFile(format!(
            "{}: sample count {} not divisible by channel count",
            path.display(),
            interleaved.len()
        )));
    }

    let samples = if channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|lr| 0.5 * (lr[0] + lr[1]))
            .collect()
    } else {
        interleaved
    };

    AudioBuffer::new(samples, spec.sample_rate)
        .map_err(|e| Error::CorruptFile(format!("{}: {e}", path.display())))
}

/// Writes `buffer` as a mono WAV file, hard-clipping to [-1, 1].
pub fn save_audio(buffer: &AudioBuffer, path: impl AsRef<Path>, depth: BitDepth) -> Result<SaveReport> {
    let path = path.as_ref();
    let (bits, format) = match depth {
        BitDepth::Int16 => (16, hound::SampleFormat::Int),
        BitDepth::Int24 => (24, hound::SampleFormat::Int),
        BitDepth::Float32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate_hz(),
        bits_per_sample: bits,
        sample_format: format,
    };
    let io_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(other.to_string())),
    };

    let mut writer = hound::WavWriter::create(path, spec).map_err(io_err)?;
    let mut report = SaveReport::default();
    for &v in buffer.samples() {
        if v.abs() > 1.0 {
            report.clipped_samples += 1;
        }
        let v = v.clamp(-1.0, 1.0);
        match depth {
            BitDepth::Float32 => writer.write_sample(v as f32),
            BitDepth::Int16 | BitDepth::Int24 => {
                let full = f64::from(1u32 << (bits - 1));
                let q = (v * full).round().clamp(-full, full - 1.0) as i32;
                writer.write_sample(q)
            }
        }
        .map_err(io_err)?;
    }
    writer.finalize().map_err(io_err)?;
    Ok(report)
}
