//! The noisiness-inharmonicity space: axis normalization, PCA, projection,
//! percentile summaries and the median-polynomial fit.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, HR_EXPONENT};
use crate::stats::percentile_sorted;

pub const MODEL_VERSION: u32 = 1;

/// Inharmonicity axis: `(1 - hr)^0.21`.
pub fn normalize_inharmonicity(hr: f64) -> Result<f64> {
    normalize_inharmonicity_with(hr, HR_EXPONENT)
}

fn normalize_inharmonicity_with(hr: f64, exponent: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&hr) {
        return Err(Error::OutOfRange {
            value: hr,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok((1.0 - hr).powf(exponent))
}

/// Corpus bounds of log flatness (dB) and the inharmonicity exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub flatness_log_min: f64,
    pub flatness_log_max: f64,
    pub hr_exponent: f64,
}

impl CorpusStats {
    pub fn new(flatness_log_min: f64, flatness_log_max: f64) -> Result<Self> {
        if !(flatness_log_min < flatness_log_max) || !flatness_log_max.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "flatness bounds [{flatness_log_min}, {flatness_log_max}] dB"
            )));
        }
        Ok(Self {
            flatness_log_min,
            flatness_log_max,
            hr_exponent: HR_EXPONENT,
        })
    }

    /// Bounds from the 1st and 99th percentiles of a corpus' flatness values.
    pub fn from_flatness(values: &[f64]) -> Result<Self> {
        let mut db = values
            .iter()
            .map(|&f| flatness_db(f))
            .collect::<Result<Vec<_>>>()?;
        if db.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                got: db.len(),
            });
        }
        db.sort_by(f64::total_cmp);
        Self::new(percentile_sorted(&db, 1.0), percentile_sorted(&db, 99.0))
    }
}

fn flatness_db(flatness: f64) -> Result<f64> {
    if !(flatness > 0.0) || !flatness.is_finite() {
        return Err(Error::NonpositiveFlatness(flatness));
    }
    Ok(10.0 * flatness.log10())
}

/// Noisiness axis: log flatness mapped affinely from the corpus bounds to [0, 1], clamped.
pub fn normalize_noisiness(flatness: f64, stats: &CorpusStats) -> Result<f64> {
    let db = flatness_db(flatness)?;
    let t = (db - stats.flatness_log_min) / (stats.flatness_log_max - stats.flatness_log_min);
    Ok(t.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacePoint {
    pub noisiness_norm: f64,
    pub inharmonicity_norm: f64,
}

impl SpacePoint {
    pub fn new(noisiness_norm: f64, inharmonicity_norm: f64) -> Result<Self> {
        for v in [noisiness_norm, inharmonicity_norm] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Self {
            noisiness_norm,
            inharmonicity_norm,
        })
    }

    fn xy(&self) -> [f64; 2] {
        [self.noisiness_norm, self.inharmonicity_norm]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaModel {
    pub mean: [f64; 2],
    /// Rows are PC1 and PC2 as unit vectors in (noisiness, inharmonicity).
    pub components: [[f64; 2]; 2],
    pub variances: [f64; 2],
}

/// Principal axes of a point cloud (sample covariance).
///
/// PC1 is oriented so that it increases noisiness; PC2 is PC1 rotated by +90 degrees.
pub fn fit_pca(points: &[SpacePoint]) -> Result<PcaModel> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mut mean = [0.0; 2];
    for p in points {
        let v = p.xy();
        mean[0] += v[0] / n;
        mean[1] += v[1] / n;
    }
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for p in points {
        let v = p.xy();
        let (dx, dy) = (v[0] - mean[0], v[1] - mean[1]);
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    let (a, b, c) = (a / (n - 1.0), b / (n - 1.0), c / (n - 1.0));
    let trace = a + c;
    if !(trace > 1e-24) {
        return Err(Error::DegenerateCloud);
    }
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let l1 = 0.5 * trace + disc;
    let l2 = (0.5 * trace - disc).max(0.0);

    // Eigenvector of l1, from whichever row of (C - l1 I) is better conditioned.
    let (mut vx, mut vy) = if (l1 - c).abs() >= (l1 - a).abs() {
        (l1 - c, b)
    } else {
        (b, l1 - a)
    };
    let norm = vx.hypot(vy);
    if norm < 1e-300 {
        (vx, vy) = if a >= c { (1.0, 0.0) } else { (0.0, 1.0) };
    } else {
        vx /= norm;
        vy /= norm;
    }
    if vx < 0.0 || (vx == 0.0 && vy < 0.0) {
        vx = -vx;
        vy = -vy;
    }
    Ok(PcaModel {
        mean,
        components: [[vx, vy], [-vy, vx]],
        variances: [l1, l2],
    })
}

/// Coordinates of `point` along PC1 and PC2.
pub fn project(point: &SpacePoint, model: &PcaModel) -> (f64, f64) {
    let v = point.xy();
    let d = [v[0] - model.mean[0], v[1] - model.mean[1]];
    let pc = |r: [f64; 2]| r[0] * d[0] + r[1] * d[1];
    (pc(model.components[0]), pc(model.components[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentileSummary {
    pub percentiles: Vec<f64>,
    pub pc1: Vec<f64>,
    pub pc2: Vec<f64>,
}

/// Percentiles of the projected coordinates along each principal direction.
pub fn percentile_summary(
    points: &[SpacePoint],
    model: &PcaModel,
    percentiles: &[f64],
) -> Result<PercentileSummary> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    let (mut p1, mut p2): (Vec<f64>, Vec<f64>) = points.iter().map(|p| project(p, model)).unzip();
    p1.sort_by(f64::total_cmp);
    p2.sort_by(f64::total_cmp);
    Ok(PercentileSummary {
        percentiles: percentiles.to_vec(),
        pc1: percentiles.iter().map(|&q| percentile_sorted(&p1, q)).collect(),
        pc2: percentiles.iter().map(|&q| percentile_sorted(&p2, q)).collect(),
    })
}

/// Least-squares polynomial `y = c0 + c1 x + ...`; coefficients in ascending order.
pub fn fit_median_polynomial(points: &[(f64, f64)], degree: usize) -> Result<Vec<f64>> {
    let m = points.len();
    let k = degree + 1;
    if m < k {
        return Err(Error::UnderDetermined {
            degree,
            points: m,
        });
    }
    // Householder QR of the Vandermonde matrix, column-major.
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|j| points.iter().map(|p| p.0.powi(j as i32)).collect())
        .collect();
    let mut y: Vec<f64> = points.iter().map(|p| p.1).collect();
    for j in 0..k {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::UnderDetermined {
                degree,
                points: m,
            });
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        if vnorm2 > 0.0 {
            let reflect = |col: &mut [f64]| {
                let dot = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum::<f64>();
                let s = 2.0 * dot / vnorm2;
                col.iter_mut().zip(&v).for_each(|(c, vi)| *c -= s * vi);
            };
            for col in a.iter_mut().skip(j) {
                reflect(&mut col[j..]);
            }
            reflect(&mut y[j..]);
        }
    }
    let mut coef = vec![0.0; k];
    for i in (0..k).rev() {
        let rii = a[i][i];
        if rii.abs() < 1e-12 * a[0][0].abs().max(1.0) {
            return Err(Error::UnderDetermined {
                degree,
                points: m,
            });
        }
        let s: f64 = (i + 1..k).map(|j| a[j][i] * coef[j]).sum();
        coef[i] = (y[i] - s) / rii;
    }
    Ok(coef)
}

pub fn eval_polynomial(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Fitted space: normalization bounds plus principal axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceModel {
    pub stats: CorpusStats,
    pub pca: PcaModel,
}

#[derive(Deserialize)]
struct SpaceModelDoc {
    version: u32,
    mean: [f64; 2],
    components: [[f64; 2]; 2],
    variances: [f64; 2],
    flatness_log_min: f64,
    flatness_log_max: f64,
    hr_exponent: f64,
}

impl SpaceModel {
    /// Normalizes raw features, fitting bounds and axes on the same corpus.
    pub fn fit(features: &[FeatureVector]) -> Result<Self> {
        let flat: Vec<f64> = features.iter().map(|f| f.flatness).collect();
        let stats = CorpusStats::from_flatness(&flat)?;
        let points = features
            .iter()
            .map(|f| point_from_raw(f, &stats))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            stats,
            pca: fit_pca(&points)?,
        })
    }

    pub fn point(&self, f: &FeatureVector) -> Result<SpacePoint> {
        point_from_raw(f, &self.stats)
    }

    /// Fills the normalized fields and returns the projection.
    pub fn apply(&self, f: &mut FeatureVector) -> Result<(f64, f64)> {
        let p = self.point(f)?;
        f.noisiness_norm = Some(p.noisiness_norm);
        f.inharmonicity_norm = Some(p.inharmonicity_norm);
        Ok(project(&p, &self.pca))
    }

    pub fn to_json(&self) -> String {
        let r = |v: f64| format!("{v:.16e}");
        let p = &self.pca;
        let mut s = String::from("{\n");
        let _ = writeln!(s, "  \"version\": {MODEL_VERSION},");
        let _ = writeln!(s, "  \"mean\": [{}, {}],", r(p.mean[0]), r(p.mean[1]));
        let _ = writeln!(
            s,
            "  \"components\": [[{}, {}], [{}, {}]],",
            r(p.components[0][0]),
            r(p.components[0][1]),
            r(p.components[1][0]),
            r(p.components[1][1])
        );
        let _ = writeln!(s, "  \"variances\": [{}, {}],", r(p.variances[0]), r(p.variances[1]));
        let _ = writeln!(s, "  \"flatness_log_min\": {},", r(self.stats.flatness_log_min));
        let _ = writeln!(s, "  \"flatness_log_max\": {},", r(self.stats.flatness_log_max));
        let _ = writeln!(s, "  \"hr_exponent\": {}", r(self.stats.hr_exponent));
        s.push_str("}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: SpaceModelDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("space model: {e}")))?;
        if d.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "space model version {} (expected {MODEL_VERSION})",
                d.version
            )));
        }
        let mut stats = CorpusStats::new(d.flatness_log_min, d.flatness_log_max)?;
        stats.hr_exponent = d.hr_exponent;
        let orthonormal = {
            let [r1, r2] = d.components;
            let dot = r1[0] * r2[0] + r1[1] * r2[1];
            let n1 = r1[0].hypot(r1[1]);
            let n2 = r2[0].hypot(r2[1]);
            dot.abs() < 1e-9 && (n1 - 1.0).abs() < 1e-9 && (n2 - 1.0).abs() < 1e-9
        };
        if !orthonormal || d.variances[0] < d.variances[1] || d.variances[1] < 0.0 {
            return Err(Error::Format("space model components/variances invalid".into()));
        }
        Ok(Self {
            stats,
            pca: PcaModel {
                mean: d.mean,
                components: d.components,
                variances: d.variances,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn point_from_raw(f: &FeatureVector, stats: &CorpusStats) -> Result<SpacePoint> {
    SpacePoint::new(
        normalize_noisiness(f.flatness, stats)?,
        normalize_inharmonicity_with(f.harmonic_ratio, stats.hr_exponent)?,
    )
}
