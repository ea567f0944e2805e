// SPDX-License-Identifier: Apache-2.0

//! Regime scans over θ: one [`ScanRow`] per grid point, CSV/JSON emitters,
//! and a standalone SVG of the Kesten-Stigum curves.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{log_grid, tisgm_set_with, SolverConfig, TisgmSet};
use crate::chain::{spectrum, transition_matrix, Claim, SpectralReport};
use crate::error::{Error, Result};
use crate::extremality::{certificate_for, ExtremalityReport, DEFAULT_P0};
use crate::model::{BoundaryLaw, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "nonextremal-KS")]
    NonextremalKs,
    #[serde(rename = "extremal-MSW")]
    ExtremalMsw,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl Classification {
    pub fn from_values(ks_value: f64, product: f64) -> Self {
        if ks_value > 1.0 {
            Classification::NonextremalKs
        } else if product < 1.0 {
            Classification::ExtremalMsw
        } else {
            Classification::Undetermined
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::NonextremalKs => "nonextremal-KS",
            Classification::ExtremalMsw => "extremal-MSW",
            Classification::Undetermined => "undetermined",
        }
    }
}

impl FromStr for Classification {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nonextremal-KS" => Ok(Classification::NonextremalKs),
            "extremal-MSW" => Ok(Classification::ExtremalMsw),
            "undetermined" => Ok(Classification::Undetermined),
            other => Err(format!("unknown classification `{other}`")),
        }
    }
}

/// Regime of the symmetric measure at one activity. Spectral and
/// extremality columns all refer to the symmetric law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub theta: f64,
    pub z_sym: f64,
    pub z_asym_1: Option<f64>,
    pub z_asym_2: Option<f64>,
    pub tisgm_count: usize,
    pub s1: f64,
    pub s2: f64,
    pub lambda2: f64,
    pub ks_value: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub product: f64,
    pub classification: Classification,
}

pub const CSV_COLUMNS: [&str; 13] = [
    "theta",
    "z_sym",
    "z_asym_1",
    "z_asym_2",
    "tisgm_count",
    "s1",
    "s2",
    "lambda2",
    "ks_value",
    "kappa",
    "gamma",
    "product",
    "classification",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(format!("unknown scale `{other}` (expected linear or log)")),
        }
    }
}

/// `steps` activities from `min` to `max`; both endpoints are reproduced
/// exactly and every interior point is computed from the endpoints alone.
pub fn theta_grid(min: f64, max: f64, steps: usize, scale: Scale) -> Result<Vec<f64>> {
    if !(min > 0.0 && min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::InvalidParams(format!(
            "need 0 < theta_min < theta_max, got [{min}, {max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    Ok(match scale {
        Scale::Log => log_grid(min, max, steps),
        Scale::Linear => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    max
                } else {
                    min + (max - min) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    })
}

pub fn compute_row(k: u32, theta: f64, cfg: &SolverConfig) -> Result<ScanRow> {
    let params = ModelParams::new(k, theta)?;
    let set = tisgm_set_with(&params, cfg)?;
    let spec = spectrum(&transition_matrix(&set.symmetric, theta), k)?;
    let cert = certificate_for(&params, &set.symmetric, DEFAULT_P0)?;
    let first = set.asymmetric.first();
    Ok(ScanRow {
        theta,
        z_sym: set.symmetric.z1,
        z_asym_1: first.map(|l| l.z1),
        z_asym_2: first.map(|l| l.z2),
        tisgm_count: set.count(),
        s1: spec.s1,
        s2: spec.s2,
        lambda2: spec.lambda2,
        ks_value: spec.ks_value,
        kappa: cert.kappa,
        gamma: cert.gamma_bound,
        product: cert.product,
        classification: Classification::from_values(spec.ks_value, cert.product),
    })
}

/// Rows in grid order; points are evaluated in parallel.
pub fn scan(k: u32, grid: &[f64], cfg: &SolverConfig) -> Result<Vec<ScanRow>> {
    grid.par_iter().map(|&t| compute_row(k, t, cfg)).collect()
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(rows: &[ScanRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        let fields = [
            fmt_num(r.theta),
            fmt_num(r.z_sym),
            opt(r.z_asym_1),
            opt(r.z_asym_2),
            r.tisgm_count.to_string(),
            fmt_num(r.s1),
            fmt_num(r.s2),
            fmt_num(r.lambda2),
            fmt_num(r.ks_value),
            fmt_num(r.kappa),
            fmt_num(r.gamma),
            fmt_num(r.product),
            r.classification.as_str().to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Parse failure with the 1-based line where it happened.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

pub fn parse_csv(text: &str) -> std::result::Result<Vec<ScanRow>, CsvError> {
    let err = |line, message: String| CsvError { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty scan file".into()))?;
    let header_line = text.lines().position(|l| !l.trim().is_empty()).unwrap_or(0) + 1;
    if header.trim() != CSV_COLUMNS.join(",") {
        return Err(err(header_line, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != CSV_COLUMNS.len() {
            return Err(err(
                n,
                format!("expected {} fields, found {}", CSV_COLUMNS.len(), f.len()),
            ));
        }
        let num = |j: usize| -> std::result::Result<f64, CsvError> {
            f[j].parse::<f64>()
                .map_err(|e| err(n, format!("column {}: {e}", CSV_COLUMNS[j])))
        };
        let opt = |j: usize| -> std::result::Result<Option<f64>, CsvError> {
            if f[j].is_empty() {
                Ok(None)
            } else {
                num(j).map(Some)
            }
        };
        rows.push(ScanRow {
            theta: num(0)?,
            z_sym: num(1)?,
            z_asym_1: opt(2)?,
            z_asym_2: opt(3)?,
            tisgm_count: f[4]
                .parse()
                .map_err(|e| err(n, format!("column tisgm_count: {e}")))?,
            s1: num(5)?,
            s2: num(6)?,
            lambda2: num(7)?,
            ks_value: num(8)?,
            kappa: num(9)?,
            gamma: num(10)?,
            product: num(11)?,
            classification: f[12].parse().map_err(|e: String| err(n, e))?,
        });
    }
    if rows.is_empty() {
        return Err(err(
            header_line,
            "scan file has a header but no rows".into(),
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanDocument {
    pub k: u32,
    pub rows: Vec<ScanRow>,
}

pub const SCAN_JSON_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "scan",
  "type": "object",
  "required": ["k", "rows"],
  "properties": {
    "k": {"type": "integer", "minimum": 2},
    "rows": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["theta", "z_sym", "z_asym_1", "z_asym_2", "tisgm_count", "s1", "s2",
                     "lambda2", "ks_value", "kappa", "gamma", "product", "classification"],
        "properties": {
          "theta": {"type": "number"},
          "z_sym": {"type": "number"},
          "z_asym_1": {"type": ["number", "null"]},
          "z_asym_2": {"type": ["number", "null"]},
          "tisgm_count": {"type": "integer"},
          "s1": {"type": "number"},
          "s2": {"type": "number"},
          "lambda2": {"type": "number"},
          "ks_value": {"type": "number"},
          "kappa": {"type": "number"},
          "gamma": {"type": "number"},
          "product": {"type": "number"},
          "classification": {"enum": ["nonextremal-KS", "extremal-MSW", "undetermined"]}
        }
      }
    }
  }
}"#;

/// One law of a solve report with its spectral data; extremality figures
/// exist only for the symmetric law.
#[derive(Debug, Clone, Serialize)]
pub struct LawReport {
    pub role: &'static str,
    pub law: BoundaryLaw,
    pub spectrum: SpectralReport,
    pub extremality: Option<ExtremalityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub k: u32,
    pub theta: f64,
    pub theta_cr: f64,
    pub tisgm_count: usize,
    pub near_critical: bool,
    pub extra_roots: bool,
    pub classification: Classification,
    pub laws: Vec<LawReport>,
}

pub const SOLVE_JSON_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "solve",
  "type": "object",
  "required": ["k", "theta", "theta_cr", "tisgm_count", "near_critical", "extra_roots",
               "classification", "laws"],
  "properties": {
    "k": {"type": "integer", "minimum": 2},
    "theta": {"type": "number", "exclusiveMinimum": 0},
    "theta_cr": {"type": "number"},
    "tisgm_count": {"type": "integer"},
    "near_critical": {"type": "boolean"},
    "extra_roots": {"type": "boolean"},
    "classification": {"enum": ["nonextremal-KS", "extremal-MSW", "undetermined"]},
    "laws": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["role", "law", "spectrum", "extremality"],
        "properties": {
          "role": {"enum": ["symmetric", "asymmetric"]},
          "law": {
            "type": "object",
            "required": ["z1", "z2", "residual"],
            "properties": {"z1": {"type": "number"}, "z2": {"type": "number"}, "residual": {"type": "number"}}
          },
          "spectrum": {
            "type": "object",
            "required": ["s1", "s2", "s3", "lambda2", "ks_value", "claim"],
            "properties": {
              "s1": {"type": "number"}, "s2": {"type": "number"}, "s3": {"type": "number"},
              "lambda2": {"type": "number"}, "ks_value": {"type": "number"},
              "claim": {"enum": ["supported", "no-claim"]}
            }
          },
          "extremality": {
            "type": ["object", "null"],
            "required": ["kappa", "gamma_bound", "product", "p0_used", "fires", "exploratory"]
          }
        }
      }
    }
  }
}"#;

pub fn solve_report(set: &TisgmSet) -> Result<SolveReport> {
    let params = set.params;
    let sym_spec = spectrum(&transition_matrix(&set.symmetric, params.theta), params.k)?;
    let cert = certificate_for(&params, &set.symmetric, DEFAULT_P0)?;
    let mut laws = vec![LawReport {
        role: "symmetric",
        law: set.symmetric,
        spectrum: sym_spec,
        extremality: Some(cert),
    }];
    for law in &set.asymmetric {
        let s = spectrum(&transition_matrix(law, params.theta), params.k)?;
        debug_assert_eq!(s.claim, Claim::NoClaim);
        laws.push(LawReport {
            role: "asymmetric",
            law: *law,
            spectrum: s,
            extremality: None,
        });
    }
    Ok(SolveReport {
        k: params.k,
        theta: params.theta,
        theta_cr: set.theta_cr,
        tisgm_count: set.count(),
        near_critical: set.near_critical,
        extra_roots: set.extra_roots,
        classification: Classification::from_values(sym_spec.ks_value, cert.product),
        laws,
    })
}

/// Infers `k` from `ks_value = k λ₂²`.
pub fn infer_k(rows: &[ScanRow]) -> Option<u32> {
    rows.iter()
        .find(|r| r.lambda2 > 0.0)
        .map(|r| (r.ks_value / (r.lambda2 * r.lambda2)).round() as u32)
}

/// Activities where `ks_value − 1` changes sign between consecutive rows,
/// linearly interpolated.
pub fn ks_crossings(rows: &[ScanRow]) -> Vec<f64> {
    rows.windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].ks_value - 1.0, w[1].ks_value - 1.0);
            if a == 0.0 {
                Some(w[0].theta)
            } else if a.signum() != b.signum() && b != 0.0 {
                Some(w[0].theta + (w[1].theta - w[0].theta) * a / (a - b))
            } else {
                None
            }
        })
        .collect()
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

/// Standalone SVG with `k s1² − 1` and `k s2² − 1` against θ, the zero line
/// and dashed markers at the Kesten-Stigum crossings.
pub fn render_svg(rows: &[ScanRow], k: u32) -> String {
    let kf = f64::from(k);
    let c1: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.theta, kf * r.s1 * r.s1 - 1.0))
        .collect();
    let c2: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.theta, kf * r.s2 * r.s2 - 1.0))
        .collect();

    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (0.0_f64, 0.0_f64);
    for &(x, y) in c1.iter().chain(&c2) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (SVG_WIDTH - 2.0 * MARGIN);
    let py = |y: f64| SVG_HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (SVG_HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" width="{SVG_WIDTH}" height="{SVG_HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        SVG_WIDTH - 2.0 * MARGIN,
        SVG_HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line id="zero" x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray"/>"#,
        SVG_WIDTH - MARGIN,
        y = py(0.0)
    );
    for (id, color, curve) in [
        ("k-s1-sq-minus-1", "#1f77b4", &c1),
        ("k-s2-sq-minus-1", "#d62728", &c2),
    ] {
        if curve.len() == 1 {
            let _ = writeln!(
                s,
                r#"<circle id="{id}" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(curve[0].0),
                py(curve[0].1)
            );
        } else {
            let d: Vec<String> = curve
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| {
                    format!(
                        "{}{:.2},{:.2}",
                        if i == 0 { "M" } else { "L" },
                        px(x),
                        py(y)
                    )
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<path id="{id}" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                d.join(" ")
            );
        }
    }
    for t in ks_crossings(rows) {
        let _ = writeln!(
            s,
            r#"<line class="threshold" x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-dasharray="4 4"/>"#,
            SVG_HEIGHT - MARGIN,
            x = px(t)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{t:.4}</text>"#,
            px(t) + 4.0,
            MARGIN + 14.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">θ</text>"#,
        SVG_WIDTH / 2.0,
        SVG_HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.2}" font-size="12">{x0:.4}</text>"#,
        SVG_HEIGHT - MARGIN + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{x1:.4}</text>"#,
        SVG_WIDTH - MARGIN,
        SVG_HEIGHT - MARGIN + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{y1:.3}</text>"#,
        MARGIN - 4.0,
        MARGIN + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{y0:.3}</text>"#,
        MARGIN - 4.0,
        SVG_HEIGHT - MARGIN
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="30" font-size="13" fill="#1f77b4">k·s1² − 1</text>"##,
        MARGIN
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="30" font-size="13" fill="#d62728">k·s2² − 1</text>"##,
        MARGIN + 120.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = theta_grid(0.1, 3.0, 300, Scale::Linear).unwrap();
        assert_eq!(g.len(), 300);
        assert_eq!((g[0], g[299]), (0.1, 3.0));
        assert!(theta_grid(1.0, 1.0, 10, Scale::Log).is_err());
        assert!(theta_grid(0.0, 1.0, 10, Scale::Log).is_err());
        assert!(theta_grid(0.1, 1.0, 1, Scale::Linear).is_err());
    }

    #[test]
    fn classification_rule() {
        assert_eq!(
            Classification::from_values(1.2, 1.2),
            Classification::NonextremalKs
        );
        assert_eq!(
            Classification::from_values(0.8, 0.8),
            Classification::ExtremalMsw
        );
        assert_eq!(
            Classification::from_values(1.0, 1.0),
            Classification::Undetermined
        );
        for c in [
            Classification::NonextremalKs,
            Classification::ExtremalMsw,
            Classification::Undetermined,
        ] {
            assert_eq!(c.as_str().parse::<Classification>().unwrap(), c);
        }
    }

    #[test]
    fn row_at_symmetric_point() {
        let r = compute_row(3, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(r.z_sym, 1.0);
        assert_eq!(r.tisgm_count, 3);
        assert_eq!((r.ks_value, r.product), (0.75, 0.75));
        assert_eq!(r.classification, Classification::ExtremalMsw);
    }

    #[test]
    fn csv_round_trip() {
        let cfg = SolverConfig::default();
        let rows = scan(2, &[0.5, 1.5], &cfg).unwrap();
        let text = to_csv(&rows);
        assert!(text.starts_with("theta,z_sym,z_asym_1,z_asym_2,tisgm_count,"));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[1].z_asym_1, None);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        assert_eq!(parse_csv("").unwrap_err().line, 1);
        let header = CSV_COLUMNS.join(",");
        assert!(parse_csv(&header).is_err());
        let bad = format!("{header}\n1,2,3\n");
        assert_eq!(parse_csv(&bad).unwrap_err().line, 2);
    }

    #[test]
    fn crossings_and_k() {
        let cfg = SolverConfig::default();
        let grid = theta_grid(0.5, 2.0, 61, Scale::Linear).unwrap();
        let rows = scan(3, &grid, &cfg).unwrap();
        assert_eq!(infer_k(&rows), Some(3));
        let x = ks_crossings(&rows);
        assert_eq!(x.len(), 2);
        assert!((x[0] - 0.83).abs() < 0.01 && (x[1] - 1.226).abs() < 0.01);
    }

    #[test]
    fn schemas_are_json() {
        let a: serde_json::Value = serde_json::from_str(SCAN_JSON_SCHEMA).unwrap();
        let b: serde_json::Value = serde_json::from_str(SOLVE_JSON_SCHEMA).unwrap();
        assert_eq!(a["type"], "object");
        assert_eq!(b["type"], "object");
    }
}
