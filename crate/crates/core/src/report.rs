//! Plot-ready curve files and fixed-precision number formatting.

use std::io::{Read, Write};

use thiserror::Error;

use crate::harness::CurvePoint;
use crate::ingest::League;

pub const CURVE_HEADER: [&str; 13] = [
    "league",
    "season",
    "fraction",
    "games_per_team",
    "replicates",
    "mean_bt_acc",
    "sd_bt_acc",
    "mean_mov_acc",
    "sd_mov_acc",
    "baseline_acc",
    "sd_baseline_acc",
    "bt_failures",
    "mov_failures",
];

/// Significant digits used for every number written to disk.
pub const SIGNIFICANT_DIGITS: i32 = 6;

#[derive(Debug, Error)]
pub enum CurveFileError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("curve file has no rows")]
    Empty,
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Format with six significant digits; scientific notation outside `[1e-4, 1e6)`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        format!("{:.*e}", (SIGNIFICANT_DIGITS - 1) as usize, x)
    } else {
        let decimals = (SIGNIFICANT_DIGITS - 1 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

/// Round to the value [`format_sig`] prints.
pub fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

/// One row of a curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub league: League,
    pub season: String,
    pub point: CurvePoint,
}

pub fn write_curve_csv<W: Write>(out: W, rows: &[CurveRow]) -> Result<(), CurveFileError> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    wtr.write_record(CURVE_HEADER)?;
    for r in rows {
        let p = &r.point;
        wtr.write_record([
            r.league.as_str().to_string(),
            r.season.clone(),
            format_sig(p.fraction),
            format_sig(p.games_per_team),
            p.replicates.to_string(),
            format_sig(p.mean_bt_acc),
            format_sig(p.sd_bt_acc),
            format_sig(p.mean_mov_acc),
            format_sig(p.sd_mov_acc),
            format_sig(p.baseline_acc),
            format_sig(p.sd_baseline_acc),
            p.bt_failures.to_string(),
            p.mov_failures.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(source: R) -> Result<Vec<CurveRow>, CurveFileError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(source);
    let mut records = rdr.records();
    let header = records.next().ok_or(CurveFileError::Empty)??;
    if header.iter().ne(CURVE_HEADER) {
        return Err(CurveFileError::Malformed {
            line: 1,
            message: format!("expected header '{}'", CURVE_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| CurveFileError::Malformed { line, message };
        if record.len() != CURVE_HEADER.len() {
            return Err(bad(format!("expected {} columns, found {}", CURVE_HEADER.len(), record.len())));
        }
        let num = |i: usize| -> Result<f64, CurveFileError> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("{} '{}' is not a number", CURVE_HEADER[i], &record[i])))
        };
        let count = |i: usize| -> Result<usize, CurveFileError> {
            record[i]
                .parse::<usize>()
                .map_err(|_| bad(format!("{} '{}' is not a count", CURVE_HEADER[i], &record[i])))
        };
        let league: League = record[0].parse().map_err(bad)?;
        let point = CurvePoint {
            fraction: num(2)?,
            games_per_team: num(3)?,
            replicates: count(4)?,
            mean_bt_acc: num(5)?,
            sd_bt_acc: num(6)?,
            mean_mov_acc: num(7)?,
            sd_mov_acc: num(8)?,
            baseline_acc: num(9)?,
            sd_baseline_acc: num(10)?,
            bt_failures: count(11)?,
            mov_failures: count(12)?,
        };
        if !(point.fraction > 0.0 && point.fraction < 1.0) {
            return Err(bad(format!("fraction {} outside (0, 1)", point.fraction)));
        }
        for (name, v) in [("mean_bt_acc", point.mean_bt_acc), ("mean_mov_acc", point.mean_mov_acc), ("baseline_acc", point.baseline_acc)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(format!("{name} {v} outside [0, 1]")));
            }
        }
        rows.push(CurveRow { league, season: record[1].to_string(), point });
    }
    if rows.is_empty() {
        return Err(CurveFileError::Empty);
    }
    Ok(rows)
}
