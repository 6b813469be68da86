use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::TrackReport;
use crate::error::{Error, Result};
use crate::space::SpaceModel;

/// One beat as written to CSV and JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub track_id: String,
    pub beat_index: usize,
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub harmonic_ratio: f64,
    pub flatness: f64,
    pub inharmonicity_norm: Option<f64>,
    pub noisiness_norm: Option<f64>,
    pub pc1: Option<f64>,
    pub pc2: Option<f64>,
    pub degenerate: bool,
}

pub fn report_rows(report: &TrackReport) -> Vec<ReportRow> {
    report
        .beats
        .iter()
        .map(|b| ReportRow {
            track_id: report.track_id.clone(),
            beat_index: b.beat_index,
            t_start_s: b.t_start_s,
            t_end_s: b.t_end_s,
            harmonic_ratio: b.features.harmonic_ratio,
            flatness: b.features.flatness,
            inharmonicity_norm: b.features.inharmonicity_norm,
            noisiness_norm: b.features.noisiness_norm,
            pc1: b.pc.map(|p| p.0),
            pc2: b.pc.map(|p| p.1),
            degenerate: b.degenerate,
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    if rows.is_empty() {
        w.write_record([
            "track_id",
            "beat_index",
            "t_start_s",
            "t_end_s",
            "harmonic_ratio",
            "flatness",
            "inharmonicity_norm",
            "noisiness_norm",
            "pc1",
            "pc2",
            "degenerate",
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

pub fn rows_to_json(rows: &[ReportRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"
}

pub fn rows_from_json(text: &str) -> Result<Vec<ReportRow>> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("report json: {e}")))
}

const W: f64 = 640.0;
const H: f64 = 520.0;
const MARGIN: f64 = 70.0;

/// Self-contained SVG scatter of the normalized beats, one circle per beat
/// that has normalized coordinates. PC arrows are drawn when a model is given.
pub fn svg_scatter(rows: &[ReportRow], model: Option<&SpaceModel>) -> String {
    let plot = W - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + x * plot;
    let py = |y: f64| H - MARGIN - y * (H - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    s.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        s,
        r#"  <rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{}" fill="none" stroke="black"/>"#,
        H - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"  <text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{t:.2}</text>"#,
            px(t),
            H - MARGIN + 16.0
        );
        let _ = writeln!(
            s,
            r#"  <text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{t:.2}</text>"#,
            MARGIN - 6.0,
            py(t) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"  <text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">normalized noisiness</text>"#,
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        s,
        r#"  <text x="20" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.1})">HR-inharmonicity</text>"#,
        H / 2.0,
        H / 2.0
    );
    for r in rows {
        if let (Some(x), Some(y)) = (r.noisiness_norm, r.inharmonicity_norm) {
            let fill = if r.degenerate { "gray" } else { "steelblue" };
            let _ = writeln!(
                s,
                r#"  <circle class="beat" cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}" fill-opacity="0.7"><title>{} beat {}</title></circle>"#,
                px(x),
                py(y),
                xml_escape(&r.track_id),
                r.beat_index
            );
        }
    }
    if let Some(m) = model {
        s.push_str("  <defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"3\" orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"black\"/></marker></defs>\n");
        let [mx, my] = m.pca.mean;
        for (k, label) in ["PC1", "PC2"].iter().enumerate() {
            let len = 2.0 * m.pca.variances[k].sqrt();
            let [cx, cy] = m.pca.components[k];
            let (ex, ey) = (mx + len * cx, my + len * cy);
            let _ = writeln!(
                s,
                r#"  <line class="pc" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2" marker-end="url(#head)"/>"#,
                px(mx),
                py(my),
                px(ex),
                py(ey)
            );
            let _ = writeln!(
                s,
                r#"  <text x="{:.2}" y="{:.2}" font-size="12">{label}</text>"#,
                px(ex) + 4.0,
                py(ey) - 4.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
