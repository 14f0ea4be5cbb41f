//! DoRF text records and the one-curve-per-row CSV format.

use std::fmt::Write as _;

use log::warn;

use super::{ResponseCurve, SampleGrid, DEFAULT_SAMPLES};
use crate::error::{Error, Result};

const IRRADIANCE_TAG: &str = "I =";
const BRIGHTNESS_TAG: &str = "B =";
const GRID_WARN_TOL: f64 = 1e-3;

/// Parses a DoRF document with 1024 samples per curve.
pub fn parse_dorf(text: &str) -> Result<Vec<ResponseCurve>> {
    parse_dorf_sized(text, DEFAULT_SAMPLES)
}

/// Parses a DoRF document whose sample lines hold `n` floats.
///
/// Records are six non-blank lines: name, info, `I =`, irradiance floats,
/// `B =`, brightness floats. The brightness row becomes the curve.
pub fn parse_dorf_sized(text: &str, n: usize) -> Result<Vec<ResponseCurve>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let grid = SampleGrid::new(n)?;
    let mut curves = Vec::with_capacity(lines.len() / 6);
    for (index, chunk) in lines.chunks(6).enumerate() {
        let record = index + 1;
        if chunk.len() < 6 {
            return Err(Error::Parse {
                record,
                line: chunk.last().map_or(0, |l| l.0),
                message: format!("truncated record: {} of 6 lines", chunk.len()),
            });
        }
        let name = chunk[0].1;
        expect_tag(record, chunk[2], IRRADIANCE_TAG)?;
        let irradiance = parse_floats(record, chunk[3], n)?;
        expect_tag(record, chunk[4], BRIGHTNESS_TAG)?;
        let brightness = parse_floats(record, chunk[5], n)?;

        let deviation = irradiance
            .iter()
            .zip(grid.positions())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if deviation > GRID_WARN_TOL {
            warn!("record {record} ({name}): irradiance row deviates from the uniform grid by {deviation:.3e}");
        }

        let curve = ResponseCurve::normalize(&brightness).map_err(|e| Error::Parse {
            record,
            line: chunk[5].0,
            message: e.to_string(),
        })?;
        curves.push(curve.with_id(name));
    }
    Ok(curves)
}

fn expect_tag(record: usize, (line, text): (usize, &str), tag: &str) -> Result<()> {
    if text != tag {
        return Err(Error::Parse {
            record,
            line,
            message: format!("expected '{tag}', found '{}'", truncate(text)),
        });
    }
    Ok(())
}

fn parse_floats(record: usize, (line, text): (usize, &str), n: usize) -> Result<Vec<f64>> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                record,
                line,
                message: format!("non-numeric token '{}'", truncate(tok)),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != n {
        return Err(Error::Parse {
            record,
            line,
            message: format!("expected {n} floats, found {}", values.len()),
        });
    }
    Ok(values)
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(40) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Writes curves as a DoRF document (irradiance row = uniform grid).
pub fn write_dorf(curves: &[ResponseCurve]) -> String {
    let mut out = String::new();
    for c in curves {
        let grid = c.grid();
        let _ = writeln!(out, "{}", if c.id().is_empty() { "curve" } else { c.id() });
        let _ = writeln!(out, "graph");
        let _ = writeln!(out, "{IRRADIANCE_TAG}");
        let row: Vec<String> = grid.positions().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
        let _ = writeln!(out, "{BRIGHTNESS_TAG}");
        let row: Vec<String> = c.samples().iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Parses one curve per row: id followed by the samples. A leading header row
/// (second field not numeric) is skipped.
pub fn parse_curve_csv(text: &str) -> Result<Vec<ResponseCurve>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut curves = Vec::new();
    let mut width: Option<usize> = None;
    for (row, result) in reader.records().enumerate() {
        let record = result?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        if row == 0 && record.get(1).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let id = record.get(0).unwrap_or_default().to_string();
        let values = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    record: curves.len() + 1,
                    line,
                    message: format!("non-numeric field '{}'", truncate(f)),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(w) = width {
            if w != values.len() {
                return Err(Error::Parse {
                    record: curves.len() + 1,
                    line,
                    message: format!("expected {w} samples, found {}", values.len()),
                });
            }
        }
        width = Some(values.len());
        let curve = ResponseCurve::normalize(&values).map_err(|e| Error::Parse {
            record: curves.len() + 1,
            line,
            message: e.to_string(),
        })?;
        curves.push(curve.with_id(id));
    }
    Ok(curves)
}

/// Writes curves one per row, `id,s_0,...,s_{N-1}`, without a header.
pub fn write_curve_csv(curves: &[ResponseCurve]) -> String {
    let mut out = String::new();
    for c in curves {
        out.push_str(c.id());
        for v in c.samples() {
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    out
}
