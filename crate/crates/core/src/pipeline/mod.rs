//! End-to-end workflows: beat-segmented analysis, the synthetic corpus,
//! the salience-gain sweep and report export.

mod beats;
mod corpus;
mod export;

pub use beats::{beat_spans, segment_by_beats, BeatGrid, BeatSource, BeatSpan};
pub use corpus::{
    gen_synthetic_corpus, load_corpus_dir, CorpusManifest, CorpusTrack, SyntheticCorpus,
    SyntheticCorpusSpec, TrackKind, MANIFEST_FILE,
};
pub use export::{
    read_csv, report_rows, rows_from_json, rows_to_json, svg_scatter, write_csv, ReportRow,
};

use crate::audio_io::AudioBuffer;
use crate::dsp::FramePlan;
use crate::error::{Error, Result};
use crate::features::{track_features, FeatureParams, FeatureVector};
use crate::salience_eq::{apply_salience_gain, SalienceSettings};
use crate::space::{percentile_summary, SpaceModel, SpacePoint};
use crate::stats::{median, percentile};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisParams {
    pub plan: FramePlan,
    pub features: FeatureParams,
}

/// Median-over-frames features of one stretch of audio.
///
/// Segments shorter than a frame are zero-padded to one frame. Returns the
/// degenerate marker (HR 0, flatness 1) when no frame carries energy.
pub fn segment_features(segment: &AudioBuffer, params: &AnalysisParams) -> Result<(FeatureVector, bool)> {
    let padded;
    let seg = if segment.len() < params.plan.frame_len {
        let mut s = segment.samples().to_vec();
        s.resize(params.plan.frame_len, 0.0);
        padded = AudioBuffer::new(s, segment.sample_rate_hz())?;
        &padded
    } else {
        segment
    };
    let frames = track_features(seg, &params.plan, &params.features)?;
    let live: Vec<_> = frames.iter().filter(|f| !f.degenerate).collect();
    if live.is_empty() {
        return Ok((FeatureVector::raw(0.0, 1.0), true));
    }
    let hr: Vec<f64> = live.iter().map(|f| f.features.harmonic_ratio).collect();
    let fl: Vec<f64> = live.iter().map(|f| f.features.flatness).collect();
    Ok((
        FeatureVector::raw(median(&hr).unwrap_or(0.0), median(&fl).unwrap_or(1.0)),
        false,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatRecord {
    pub beat_index: usize,
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub features: FeatureVector,
    pub pc: Option<(f64, f64)>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackReport {
    pub track_id: String,
    pub beats: Vec<BeatRecord>,
    /// Median HR and flatness over non-degenerate beats, normalized when a model is given.
    pub median: FeatureVector,
    pub median_pc: Option<(f64, f64)>,
}

impl TrackReport {
    pub fn degenerate_beats(&self) -> usize {
        self.beats.iter().filter(|b| b.degenerate).count()
    }
}

/// Per-beat features, normalized and projected when `model` is present.
pub fn analyze_track(
    track_id: &str,
    buffer: &AudioBuffer,
    grid: &BeatGrid,
    model: Option<&SpaceModel>,
    params: &AnalysisParams,
) -> Result<TrackReport> {
    let sr = buffer.sample_rate_hz() as f64;
    let spans = beat_spans(buffer.len(), buffer.sample_rate_hz(), grid)?;
    let mut beats = Vec::with_capacity(spans.len());
    for (i, span) in spans.iter().enumerate() {
        let (mut features, degenerate) =
            segment_features(&buffer.slice(span.start, span.end), params)?;
        let pc = model.map(|m| m.apply(&mut features)).transpose()?;
        beats.push(BeatRecord {
            beat_index: i,
            t_start_s: span.start as f64 / sr,
            t_end_s: span.end as f64 / sr,
            features,
            pc,
            degenerate,
        });
    }
    let live: Vec<&BeatRecord> = beats.iter().filter(|b| !b.degenerate).collect();
    let mut med = if live.is_empty() {
        FeatureVector::raw(0.0, 1.0)
    } else {
        let hr: Vec<f64> = live.iter().map(|b| b.features.harmonic_ratio).collect();
        let fl: Vec<f64> = live.iter().map(|b| b.features.flatness).collect();
        FeatureVector::raw(median(&hr).unwrap_or(0.0), median(&fl).unwrap_or(1.0))
    };
    let median_pc = model.map(|m| m.apply(&mut med)).transpose()?;
    Ok(TrackReport {
        track_id: track_id.to_string(),
        beats,
        median: med,
        median_pc,
    })
}

/// Fits normalization bounds and principal axes on whole-track features.
pub fn fit_space(tracks: &[AudioBuffer], params: &AnalysisParams) -> Result<SpaceModel> {
    let features = tracks
        .iter()
        .map(|t| segment_features(t, params).map(|(f, _)| f))
        .collect::<Result<Vec<_>>>()?;
    SpaceModel::fit(&features)
}

/// Median and quartiles of the corpus under one salience gain.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gain: f64,
    pub median: SpacePoint,
    pub p25: SpacePoint,
    pub p75: SpacePoint,
    /// Median of the PC1 / PC2 projections.
    pub median_pc: (f64, f64),
}

/// Processes every track at each gain, re-extracts whole-track features and
/// summarizes them in the fixed `model` space.
pub fn run_eq_sweep_experiment(
    tracks: &[AudioBuffer],
    model: &SpaceModel,
    gains: &[f64],
    eq: &SalienceSettings,
    params: &AnalysisParams,
) -> Result<Vec<SweepRow>> {
    if tracks.is_empty() {
        return Err(Error::InvalidSpec("empty corpus".into()));
    }
    if gains.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidSpec("gains must be sorted".into()));
    }
    gains
        .iter()
        .map(|&gain| {
            let settings = SalienceSettings { gain, ..*eq };
            let points = tracks
                .iter()
                .map(|t| {
                    let processed = apply_salience_gain(t, &settings)?;
                    let (f, _) = segment_features(&processed, params)?;
                    model.point(&f)
                })
                .collect::<Result<Vec<_>>>()?;
            let xs: Vec<f64> = points.iter().map(|p| p.noisiness_norm).collect();
            let ys: Vec<f64> = points.iter().map(|p| p.inharmonicity_norm).collect();
            let at = |q: f64| -> Result<SpacePoint> {
                SpacePoint::new(
                    percentile(&xs, q).unwrap_or(0.0),
                    percentile(&ys, q).unwrap_or(0.0),
                )
            };
            let median_pc = if points.len() >= 4 {
                let s = percentile_summary(&points, &model.pca, &[50.0])?;
                (s.pc1[0], s.pc2[0])
            } else {
                let (p1, p2): (Vec<f64>, Vec<f64>) = points
                    .iter()
                    .map(|p| crate::space::project(p, &model.pca))
                    .unzip();
                (median(&p1).unwrap_or(0.0), median(&p2).unwrap_or(0.0))
            };
            Ok(SweepRow {
                gain,
                median: at(50.0)?,
                p25: at(25.0)?,
                p75: at(75.0)?,
                median_pc,
            })
        })
        .collect()
}
