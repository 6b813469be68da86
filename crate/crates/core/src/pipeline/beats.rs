use std::path::Path;

use serde::Deserialize;

use crate::audio_io::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeatSource {
    AnnotationFile,
    FixedBpm,
}

/// Strictly increasing beat times inside a track.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatGrid {
    beat_times_s: Vec<f64>,
    source: BeatSource,
}

#[derive(Deserialize)]
struct BeatDoc {
    version: u32,
    bpm: Option<f64>,
    offset_s: Option<f64>,
    #[serde(default)]
    beats_s: Vec<f64>,
}

impl BeatGrid {
    pub fn new(beat_times_s: Vec<f64>, source: BeatSource) -> Result<Self> {
        if beat_times_s.is_empty() {
            return Err(Error::GridOutOfRange("no beats".into()));
        }
        if beat_times_s.iter().any(|t| !t.is_finite()) || beat_times_s[0] < 0.0 {
            return Err(Error::GridOutOfRange("beat times must be finite and >= 0".into()));
        }
        if beat_times_s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::GridOutOfRange("beat times must strictly increase".into()));
        }
        Ok(Self {
            beat_times_s,
            source,
        })
    }

    /// Beats every `60 / bpm` seconds from `offset_s` up to (excluding) `duration_s`.
    pub fn from_bpm(bpm: f64, offset_s: f64, duration_s: f64) -> Result<Self> {
        if !(bpm > 0.0 && bpm.is_finite()) {
            return Err(Error::InvalidSpec(format!("bpm {bpm}")));
        }
        if !(offset_s >= 0.0 && offset_s < duration_s) {
            return Err(Error::GridOutOfRange(format!(
                "offset {offset_s} s outside a {duration_s} s track"
            )));
        }
        let period = 60.0 / bpm;
        let times = (0..)
            .map(|i| offset_s + i as f64 * period)
            .take_while(|t| *t < duration_s)
            .collect();
        Self::new(times, BeatSource::FixedBpm)
    }

    /// Parses `{version, bpm?, offset_s?, beats_s}`; explicit times win over bpm.
    pub fn from_json(text: &str, duration_s: f64) -> Result<Self> {
        let doc: BeatDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("beat grid: {e}")))?;
        if doc.version != 1 {
            return Err(Error::Format(format!("beat grid version {}", doc.version)));
        }
        if !doc.beats_s.is_empty() {
            return Self::new(doc.beats_s, BeatSource::AnnotationFile);
        }
        match doc.bpm {
            Some(bpm) => {
                let mut g = Self::from_bpm(bpm, doc.offset_s.unwrap_or(0.0), duration_s)?;
                g.source = BeatSource::AnnotationFile;
                Ok(g)
            }
            None => Err(Error::Format("beat grid has neither beats_s nor bpm".into())),
        }
    }

    pub fn load(path: impl AsRef<Path>, duration_s: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, duration_s)
    }

    pub fn beat_times_s(&self) -> &[f64] {
        &self.beat_times_s
    }

    pub fn source(&self) -> BeatSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.beat_times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beat_times_s.is_empty()
    }
}

/// Sample range of one beat interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeatSpan {
    pub start: usize,
    pub end: usize,
}

/// Sample boundaries of every beat interval. The lead-in before the first
/// beat belongs to the first interval; the last interval runs to the end.
pub fn beat_spans(n_samples: usize, sample_rate_hz: u32, grid: &BeatGrid) -> Result<Vec<BeatSpan>> {
    let duration = n_samples as f64 / sample_rate_hz as f64;
    let mut bounds: Vec<usize> = Vec::with_capacity(grid.len() + 1);
    for (i, &t) in grid.beat_times_s.iter().enumerate() {
        if t >= duration {
            return Err(Error::GridOutOfRange(format!(
                "beat at {t} s is past the track end ({duration} s)"
            )));
        }
        let s = if i == 0 {
            0
        } else {
            (t * sample_rate_hz as f64).round() as usize
        };
        if let Some(&prev) = bounds.last() {
            if s <= prev {
                return Err(Error::GridOutOfRange(format!(
                    "beats closer than one sample near {t} s"
                )));
            }
        }
        bounds.push(s);
    }
    if *bounds.last().unwrap_or(&0) >= n_samples {
        return Err(Error::GridOutOfRange("last beat has no samples".into()));
    }
    bounds.push(n_samples);
    Ok(bounds
        .windows(2)
        .map(|w| BeatSpan {
            start: w[0],
            end: w[1],
        })
        .collect())
}

/// One sub-buffer per beat interval; together they partition the track.
pub fn segment_by_beats(buffer: &AudioBuffer, grid: &BeatGrid) -> Result<Vec<AudioBuffer>> {
    Ok(beat_spans(buffer.len(), buffer.sample_rate_hz(), grid)?
        .into_iter()
        .map(|s| buffer.slice(s.start, s.end))
        .collect())
}
