//! Text formats: fundamental matrices, correspondence tables, calibration
//! files and scene configs.
//!
//! Every float is written with 17 significant digits so values survive a
//! write/read round trip bit for bit.

use std::fs;
use std::path::Path;

use nalgebra::Matrix3x4;

use crate::error::{Error, Result};
use crate::geometry::{CorrSet, FMat, HomoPoint};
use crate::scene::SceneConfig;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(token: &str, what: &str) -> Result<f64> {
    token
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse {token:?} as a number")))
}

/// Nine row-major entries, three per line.
pub fn format_fmat(f: &FMat) -> String {
    let v = f.to_row_major();
    let mut out = String::new();
    for row in v.chunks(3) {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Any whitespace layout of exactly nine numbers.
pub fn parse_fmat(text: &str) -> Result<FMat> {
    let values = text
        .split_whitespace()
        .map(|t| parse_f64(t, "F matrix"))
        .collect::<Result<Vec<f64>>>()?;
    let entries: [f64; 9] = values
        .try_into()
        .map_err(|v: Vec<f64>| Error::Parse(format!("F matrix: expected 9 entries, found {}", v.len())))?;
    Ok(FMat::from_row_major(&entries))
}

pub fn write_fmat(path: &Path, f: &FMat) -> Result<()> {
    Ok(fs::write(path, format_fmat(f))?)
}

pub fn read_fmat(path: &Path) -> Result<FMat> {
    parse_fmat(&fs::read_to_string(path)?)
}

/// `x1,y1,x2,y2[,label]` with a header row; labels are `1` (inlier) or `0`.
pub fn format_corrs(corrs: &CorrSet) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let labels = corrs.labels();
    let mut header = vec!["x1", "y1", "x2", "y2"];
    if labels.is_some() {
        header.push("label");
    }
    w.write_record(&header).expect("in-memory write");
    for (i, (p, q)) in corrs.iter().enumerate() {
        let mut rec = vec![
            fmt_f64(p.x / p.w),
            fmt_f64(p.y / p.w),
            fmt_f64(q.x / q.w),
            fmt_f64(q.y / q.w),
        ];
        if let Some(l) = labels {
            rec.push(if l[i] { "1" } else { "0" }.to_string());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn parse_label(token: &str, line: u64) -> Result<bool> {
    match token.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "inlier" => Ok(true),
        "0" | "false" | "outlier" => Ok(false),
        other => Err(Error::Parse(format!("line {line}: unknown label {other:?}"))),
    }
}

pub fn parse_corrs(text: &str) -> Result<CorrSet> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let labelled = match names.as_slice() {
        ["x1", "y1", "x2", "y2"] => false,
        ["x1", "y1", "x2", "y2", "label"] => true,
        _ => {
            return Err(Error::Parse(format!(
                "correspondence header must be x1,y1,x2,y2[,label], found {}",
                names.join(",")
            )))
        }
    };
    let mut pairs = Vec::new();
    let mut labels = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let v = |i: usize| parse_f64(&rec[i], &format!("line {line}"));
        pairs.push((HomoPoint::from_pixel(v(0)?, v(1)?), HomoPoint::from_pixel(v(2)?, v(3)?)));
        if labelled {
            labels.push(parse_label(&rec[4], line)?);
        }
    }
    if pairs.is_empty() {
        return Err(Error::InsufficientCorrespondences { needed: 1, got: 0 });
    }
    if labelled {
        CorrSet::with_labels(pairs, labels)
    } else {
        CorrSet::new(pairs)
    }
}

pub fn write_corrs(path: &Path, corrs: &CorrSet) -> Result<()> {
    Ok(fs::write(path, format_corrs(corrs))?)
}

pub fn read_corrs(path: &Path) -> Result<CorrSet> {
    parse_corrs(&fs::read_to_string(path)?)
}

/// Camera pair as `P1: <12 numbers>` and `P2: <12 numbers>`, row-major.
pub fn format_calibration(p1: &Matrix3x4<f64>, p2: &Matrix3x4<f64>) -> String {
    let line = |name: &str, p: &Matrix3x4<f64>| {
        let v: Vec<String> = (0..3)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .map(|(r, c)| fmt_f64(p[(r, c)]))
            .collect();
        format!("{name}: {}\n", v.join(" "))
    };
    line("P1", p1) + &line("P2", p2)
}

pub fn parse_calibration(text: &str) -> Result<(Matrix3x4<f64>, Matrix3x4<f64>)> {
    let mut found: [Option<Matrix3x4<f64>>; 2] = [None, None];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(Error::Parse(format!("calibration line {}: expected `P1:` or `P2:`", n + 1)));
        };
        let slot = match key.trim() {
            "P1" => 0,
            "P2" => 1,
            other => {
                return Err(Error::Parse(format!("calibration line {}: unknown key {other:?}", n + 1)))
            }
        };
        let v = rest
            .split_whitespace()
            .map(|t| parse_f64(t, &format!("calibration line {}", n + 1)))
            .collect::<Result<Vec<f64>>>()?;
        if v.len() != 12 {
            return Err(Error::Parse(format!(
                "calibration line {}: expected 12 entries, found {}",
                n + 1,
                v.len()
            )));
        }
        found[slot] = Some(Matrix3x4::from_row_slice(&v));
    }
    match found {
        [Some(a), Some(b)] => Ok((a, b)),
        _ => Err(Error::Parse("calibration needs both P1 and P2".into())),
    }
}

pub fn write_calibration(path: &Path, p1: &Matrix3x4<f64>, p2: &Matrix3x4<f64>) -> Result<()> {
    Ok(fs::write(path, format_calibration(p1, p2))?)
}

pub fn read_calibration(path: &Path) -> Result<(Matrix3x4<f64>, Matrix3x4<f64>)> {
    parse_calibration(&fs::read_to_string(path)?)
}

/// JSON scene config; unknown keys are rejected and omitted keys take their
/// defaults.
pub fn parse_scene_config(text: &str) -> Result<SceneConfig> {
    let cfg: SceneConfig = serde_json::from_str(text).map_err(|e| {
        Error::InvalidConfig(format!("scene config: {e}"))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn format_scene_config(cfg: &SceneConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("plain data serializes")
}

pub fn read_scene_config(path: &Path) -> Result<SceneConfig> {
    parse_scene_config(&fs::read_to_string(path)?)
}
