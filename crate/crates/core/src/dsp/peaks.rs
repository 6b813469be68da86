use super::{db_from_power, SpectrumFrame};
use crate::error::{Error, Result};

/// Values more than this far below the frame maximum are treated as flat
/// floor; leakage interference down there produces meaningless maxima.
const PEAK_DYNAMIC_RANGE_DB: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub freq_hz: f64,
    pub power_db: f64,
}

/// Local maxima of a power spectrum with parabolic frequency refinement.
///
/// Prominence is the peak height above the lower of its two flanking minima.
/// Peaks are thinned greedily (strongest first) to respect `min_separation_hz`
/// and returned in ascending frequency.
pub fn pick_spectral_peaks(
    frame: &SpectrumFrame,
    min_prominence_db: f64,
    min_separation_hz: f64,
) -> Vec<SpectralPeak> {
    let raw: Vec<f64> = frame.bin_power().iter().map(|&p| db_from_power(p)).collect();
    let top = raw.iter().cloned().fold(f64::MIN, f64::max);
    let floor = top - PEAK_DYNAMIC_RANGE_DB;
    let db: Vec<f64> = raw.iter().map(|v| v.max(floor)).collect();
    let n = db.len();
    if n < 3 {
        return Vec::new();
    }

    let mut candidates = Vec::new();
    for k in 1..n - 1 {
        if !(db[k] > db[k - 1] && db[k] >= db[k + 1]) {
            continue;
        }
        let mut l = k;
        while l > 0 && db[l - 1] <= db[l] {
            l -= 1;
        }
        let mut r = k;
        while r + 1 < n && db[r + 1] <= db[r] {
            r += 1;
        }
        let prominence = db[k] - db[l].min(db[r]);
        if prominence < min_prominence_db {
            continue;
        }
        let (a, b, c) = (db[k - 1], db[k], db[k + 1]);
        let denom = a - 2.0 * b + c;
        let delta = if denom.abs() > 1e-12 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        candidates.push(SpectralPeak {
            freq_hz: (k as f64 + delta) * frame.bin_hz(),
            power_db: b - 0.25 * (a - c) * delta,
        });
    }

    candidates.sort_by(|x, y| y.power_db.total_cmp(&x.power_db));
    let mut kept: Vec<SpectralPeak> = Vec::new();
    for c in candidates {
        if kept
            .iter()
            .all(|k| (k.freq_hz - c.freq_hz).abs() >= min_separation_hz)
        {
            kept.push(c);
        }
    }
    kept.sort_by(|x, y| x.freq_hz.total_cmp(&y.freq_hz));
    kept
}

/// Frequency differences between consecutive peaks.
pub fn overtone_deltas(peaks: &[SpectralPeak]) -> Result<Vec<f64>> {
    if peaks.len() < 2 {
        return Err(Error::TooFewPeaks(peaks.len()));
    }
    Ok(peaks.windows(2).map(|w| w[1].freq_hz - w[0].freq_hz).collect())
}

/// Equal-tempered MIDI note number (A4 = 440 Hz = 69).
pub fn freq_to_midi(freq_hz: f64) -> Result<f64> {
    if !(freq_hz > 0.0) || !freq_hz.is_finite() {
        return Err(Error::NonpositiveFrequency(freq_hz));
    }
    Ok(69.0 + 12.0 * (freq_hz / 440.0).log2())
}

/// Multiples of `lowest_hz` up to and including `max_hz`.
pub fn harmonic_grid(lowest_hz: f64, max_hz: f64) -> Result<Vec<f64>> {
    if !(lowest_hz > 0.0) {
        return Err(Error::NonpositiveFrequency(lowest_hz));
    }
    Ok((1..)
        .map(|k| k as f64 * lowest_hz)
        .take_while(|f| *f <= max_hz)
        .collect())
}

/// Strongest peak of the frame, if any.
pub fn dominant_peak(frame: &SpectrumFrame) -> Option<SpectralPeak> {
    pick_spectral_peaks(frame, 0.0, 0.0)
        .into_iter()
        .max_by(|a, b| a.power_db.total_cmp(&b.power_db))
}
