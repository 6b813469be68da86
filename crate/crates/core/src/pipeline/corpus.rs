use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio_io::{load_audio, save_audio, AudioBuffer, BitDepth};
use crate::error::{Error, Result};
use crate::synth::filters::{Butterworth, FilterKind};
use crate::synth::{gen_irn, gen_mauch_tone, gen_white_noise, IrnSpec, MauchToneSpec, TARGET_RMS};

pub const MANIFEST_FILE: &str = "manifest.json";

/// First-formant range the tone tracks draw their formant centre from.
const FORMANT_RANGE_HZ: (f64, f64) = (300.0, 1500.0);

/// Parameters of the synthetic stand-in corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpusSpec {
    pub n_tracks: usize,
    pub seed: u64,
    /// Source-to-noise ratios cycled through by each kind of track.
    pub snr_db: Vec<f64>,
    pub f0_range_hz: (f64, f64),
    pub duration_s: f64,
    pub sample_rate_hz: u32,
}

impl Default for SyntheticCorpusSpec {
    fn default() -> Self {
        Self {
            n_tracks: 50,
            seed: 0,
            snr_db: vec![-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0],
            f0_range_hz: (110.0, 440.0),
            duration_s: 2.0,
            sample_rate_hz: 48000,
        }
    }
}

impl SyntheticCorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_tracks < 10 {
            return Err(Error::InvalidSpec(format!(
                "corpus needs at least 10 tracks, got {}",
                self.n_tracks
            )));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("SNR grid must be non-empty and finite".into()));
        }
        let (lo, hi) = self.f0_range_hz;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidSpec(format!("f0 range ({lo}, {hi}) Hz")));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if 10.0 * hi >= nyquist {
            return Err(Error::NyquistViolation {
                highest_hz: 10.0 * hi,
                nyquist_hz: nyquist,
            });
        }
        if !(self.duration_s >= 0.5 && self.duration_s.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "track duration {} s (minimum 0.5 s)",
                self.duration_s
            )));
        }
        Ok(())
    }
}

/// Every track is a pitched source in low-passed white noise at a
/// source-to-noise ratio taken from the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrackKind {
    /// Mauch tone shaped by one formant.
    ToneNoise {
        f0_hz: f64,
        snr_db: f64,
        formant_hz: f64,
        formant_db: f64,
        noise_lowpass_hz: f64,
    },
    /// Add-same rippled noise, gain 1.
    IrnNoise {
        delay_s: f64,
        iterations: u32,
        snr_db: f64,
        noise_lowpass_hz: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusTrackEntry {
    pub id: String,
    pub file: String,
    pub seed: u64,
    #[serde(flatten)]
    pub kind: TrackKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub version: u32,
    pub spec: SyntheticCorpusSpec,
    pub tracks: Vec<CorpusTrackEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusTrack {
    pub id: String,
    pub kind: TrackKind,
    pub seed: u64,
    pub audio: AudioBuffer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub tracks: Vec<CorpusTrack>,
    pub manifest: CorpusManifest,
}

impl SyntheticCorpus {
    pub fn audio(&self) -> Vec<AudioBuffer> {
        self.tracks.iter().map(|t| t.audio.clone()).collect()
    }

    /// Writes one 32-bit float WAV per track plus the manifest.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (t, entry) in self.tracks.iter().zip(&self.manifest.tracks) {
            save_audio(&t.audio, dir.join(&entry.file), BitDepth::Float32)?;
        }
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

/// Deterministic corpus: three formant-tone tracks and one rippled-noise
/// track in every four, each mixed with noise low-passed at 0.8 x Nyquist.
pub fn gen_synthetic_corpus(spec: &SyntheticCorpusSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sr = spec.sample_rate_hz;
    let nyquist = sr as f64 / 2.0;
    let (f_lo, f_hi) = spec.f0_range_hz;
    let mut tone_count = 0usize;
    let mut irn_count = 0usize;
    let mut tracks = Vec::with_capacity(spec.n_tracks);
    let mut entries = Vec::with_capacity(spec.n_tracks);

    for i in 0..spec.n_tracks {
        let seed: u64 = rng.gen();
        let f0 = f_lo * (f_hi / f_lo).powf(rng.gen::<f64>());
        let noise_lowpass_hz = 0.8 * nyquist;
        let kind = if i % 4 < 3 {
            let snr_db = spec.snr_db[tone_count % spec.snr_db.len()];
            tone_count += 1;
            TrackKind::ToneNoise {
                f0_hz: f0,
                snr_db,
                formant_hz: FORMANT_RANGE_HZ.0
                    * (FORMANT_RANGE_HZ.1 / FORMANT_RANGE_HZ.0).powf(rng.gen::<f64>()),
                formant_db: rng.gen_range(12.0..24.0),
                noise_lowpass_hz,
            }
        } else {
            let snr_db = spec.snr_db[irn_count % spec.snr_db.len()];
            let iterations = [1, 2, 4, 8, 16][irn_count % 5];
            irn_count += 1;
            TrackKind::IrnNoise {
                delay_s: 1.0 / f0,
                iterations,
                snr_db,
                noise_lowpass_hz,
            }
        };
        let audio = render_track(&kind, spec.duration_s, sr, seed)?;
        let id = format!("track_{i:03}");
        entries.push(CorpusTrackEntry {
            file: format!("{id}.wav"),
            id: id.clone(),
            seed,
            kind: kind.clone(),
        });
        tracks.push(CorpusTrack {
            id,
            kind,
            seed,
            audio,
        });
    }
    Ok(SyntheticCorpus {
        tracks,
        manifest: CorpusManifest {
            version: 1,
            spec: spec.clone(),
            tracks: entries,
        },
    })
}

fn render_track(kind: &TrackKind, duration_s: f64, sr: u32, seed: u64) -> Result<AudioBuffer> {
    // Source and noise draw from separate streams of the track seed.
    let noise_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let (source, snr_db, lowpass_hz) = match *kind {
        TrackKind::ToneNoise {
            f0_hz,
            snr_db,
            formant_hz,
            formant_db,
            noise_lowpass_hz,
        } => {
            let mut spec = MauchToneSpec::new(f0_hz);
            spec.duration_s = duration_s;
            spec.sample_rate_hz = sr;
            (formant_tone(&spec, formant_hz, formant_db)?, snr_db, noise_lowpass_hz)
        }
        TrackKind::IrnNoise {
            delay_s,
            iterations,
            snr_db,
            noise_lowpass_hz,
        } => {
            let mut s = IrnSpec::new(delay_s, 1.0, iterations);
            s.duration_s = duration_s;
            s.sample_rate_hz = sr;
            s.seed = seed;
            (gen_irn(&s)?, snr_db, noise_lowpass_hz)
        }
    };
    let mut noise = gen_white_noise(duration_s, sr, noise_seed)?.into_samples();
    Butterworth::new(FilterKind::LowPass, 1, lowpass_hz, sr as f64).filtfilt(&mut noise);
    let noise_rms = (noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64).sqrt();
    let g = source.rms() / noise_rms * 10f64.powf(-snr_db / 20.0);
    let x: Vec<f64> = source.samples().iter().zip(&noise).map(|(s, n)| s + g * n).collect();
    normalized(x, sr)
}

/// Mauch tone whose partials are lifted by a Gaussian formant (in dB) of
/// width a quarter of its centre frequency.
fn formant_tone(spec: &MauchToneSpec, formant_hz: f64, formant_db: f64) -> Result<AudioBuffer> {
    let plain = gen_mauch_tone(spec)?;
    let n = plain.len();
    let sr = spec.sample_rate_hz as f64;
    let sigma = 0.25 * formant_hz;
    let mut x = vec![0.0; n];
    for k in 1..=spec.n_harmonics {
        let f = spec.partial_hz(k);
        let lift_db = formant_db * (-(f - formant_hz).powi(2) / (2.0 * sigma * sigma)).exp();
        let a = spec.partial_amplitude(k) * 10f64.powf(lift_db / 20.0);
        let w = 2.0 * std::f64::consts::PI * f / sr;
        for (i, v) in x.iter_mut().enumerate() {
            *v += a * (w * i as f64).sin();
        }
    }
    normalized(x, spec.sample_rate_hz)
}

fn normalized(x: Vec<f64>, sr: u32) -> Result<AudioBuffer> {
    let b = AudioBuffer::new(x, sr)?;
    let r = b.rms();
    if r > 0.0 {
        b.scaled(TARGET_RMS / r)
    } else {
        Ok(b)
    }
}

/// Loads a corpus directory: the manifest's tracks in order when present,
/// otherwise every `.wav` file sorted by name. Returns (id, audio) pairs.
pub fn load_corpus_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, AudioBuffer)>> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: CorpusManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", manifest_path.display())))?;
        return manifest
            .tracks
            .iter()
            .map(|t| Ok((t.id.clone(), load_audio(dir.join(&t.file))?)))
            .collect();
    }
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidSpec(format!("no WAV files in {}", dir.display())));
    }
    files
        .iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((id, load_audio(p)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let mut s = SyntheticCorpusSpec::default();
        s.n_tracks = 5;
        assert!(gen_synthetic_corpus(&s).is_err());
        let mut s = SyntheticCorpusSpec::default();
        s.snr_db.clear();
        assert!(s.validate().is_err());
        let mut s = SyntheticCorpusSpec::default();
        s.f0_range_hz = (100.0, 3000.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn same_seed_same_corpus() {
        let mut s = SyntheticCorpusSpec::default();
        s.n_tracks = 10;
        s.duration_s = 0.5;
        let a = gen_synthetic_corpus(&s).unwrap();
        let b = gen_synthetic_corpus(&s).unwrap();
        assert_eq!(a, b);
        s.seed = 1;
        assert_ne!(gen_synthetic_corpus(&s).unwrap().manifest, a.manifest);
    }
}
