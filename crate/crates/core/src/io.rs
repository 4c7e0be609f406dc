//! CSV formats.
//!
//! Sweep curves:
//!
//! ```text
//! delta_lambda_nm,ct_same,ct_diff,err_same,err_diff[,rs_spd1,rs_spd2,rs_spd3]
//! ```
//!
//! Error and singles columns may be empty. Switching tables:
//!
//! ```text
//! n,delta_lambda_diff_nm,delta_lambda_same_nm
//! ```
//!
//! with an empty cell for an unreachable detuning. Power sweeps:
//!
//! ```text
//! power_mw,ct_same,ct_diff,err_same,err_diff,rs_spd1,rs_spd2,rs_spd3
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so files are
//! byte-identical across runs and parse back to the same `f64`.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::design::SwitchingTable;
use crate::detection::{PowerPoint, Spd};
use crate::spectral::{SweepCurve, SweepPoint};

pub const SWEEP_HEADER: [&str; 5] = ["delta_lambda_nm", "ct_same", "ct_diff", "err_same", "err_diff"];
pub const SINGLES_HEADER: [&str; 3] = ["rs_spd1", "rs_spd2", "rs_spd3"];
pub const SWITCHING_HEADER: [&str; 3] = ["n", "delta_lambda_diff_nm", "delta_lambda_same_nm"];
pub const POWER_HEADER: [&str; 5] = ["power_mw", "ct_same", "ct_diff", "err_same", "err_diff"];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint]) -> io::Result<()> {
    let with_singles = points.iter().any(|p| p.singles.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
    if with_singles {
        header.extend(SINGLES_HEADER);
    }
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![
            p.delta_lambda.to_string(),
            p.c_t_same.to_string(),
            p.c_t_diff.to_string(),
            opt(p.err_same),
            opt(p.err_diff),
        ];
        if with_singles {
            match p.singles {
                Some(s) => row.extend(s.iter().map(f64::to_string)),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()
}

fn parse_field(line: u64, name: &str, raw: &str) -> Result<f64, CsvError> {
    raw.trim().parse::<f64>().map_err(|e| CsvError::Parse {
        line,
        message: format!("column {name}: cannot parse {raw:?} as a number ({e})"),
    })
}

fn parse_optional(line: u64, name: &str, raw: Option<&str>) -> Result<Option<f64>, CsvError> {
    match raw.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => parse_field(line, name, s).map(Some),
    }
}

/// Reads sweep points in file order. Order is not validated here; wrap in
/// [`SweepCurve::new`] where strictly increasing detuning is required.
pub fn read_sweep<R: Read>(input: R) -> Result<Vec<SweepPoint>, CsvError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r
        .headers()
        .map_err(|e| CsvError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let has_singles = names.len() == SWEEP_HEADER.len() + SINGLES_HEADER.len()
        && names[SWEEP_HEADER.len()..] == SINGLES_HEADER;
    if names.len() < SWEEP_HEADER.len()
        || names[..SWEEP_HEADER.len()] != SWEEP_HEADER
        || (names.len() > SWEEP_HEADER.len() && !has_singles)
    {
        return Err(CsvError::Parse {
            line: 1,
            message: format!(
                "expected header {:?} optionally followed by {:?}, got {:?}",
                SWEEP_HEADER, SINGLES_HEADER, names
            ),
        });
    }
    let mut points = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = r.position().line();
        match r.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(line);
                return Err(CsvError::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(line);
        let field = |k: usize| record.get(k);
        let required = |k: usize| -> Result<f64, CsvError> {
            let raw = field(k).ok_or_else(|| CsvError::Parse {
                line,
                message: format!("missing column {}", names[k]),
            })?;
            parse_field(line, names[k], raw)
        };
        let singles = if has_singles {
            let s = [
                parse_optional(line, SINGLES_HEADER[0], field(5))?,
                parse_optional(line, SINGLES_HEADER[1], field(6))?,
                parse_optional(line, SINGLES_HEADER[2], field(7))?,
            ];
            match s {
                [Some(a), Some(b), Some(c)] => Some([a, b, c]),
                _ => None,
            }
        } else {
            None
        };
        points.push(SweepPoint {
            delta_lambda: required(0)?,
            c_t_same: required(1)?,
            c_t_diff: required(2)?,
            err_same: parse_optional(line, names[3], field(3))?,
            err_diff: parse_optional(line, names[4], field(4))?,
            singles,
        });
    }
    Ok(points)
}

pub fn read_sweep_file(path: &Path) -> Result<Vec<SweepPoint>, CsvError> {
    let file = File::open(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_sweep(io::BufReader::new(file))
}

pub fn write_sweep_curve<W: Write>(out: W, curve: &SweepCurve) -> io::Result<()> {
    write_sweep(out, curve.points())
}

pub fn write_switching_table<W: Write>(out: W, table: &SwitchingTable) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWITCHING_HEADER)?;
    for row in &table.rows {
        w.write_record([
            row.n.to_string(),
            opt(row.delta_lambda_diff),
            opt(row.delta_lambda_same),
        ])?;
    }
    w.flush()
}

pub fn write_power_sweep<W: Write>(out: W, points: &[PowerPoint], gate_rate_hz: f64) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = POWER_HEADER.iter().chain(&SINGLES_HEADER).copied().collect();
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![
            p.power_mw.to_string(),
            p.same.rate.to_string(),
            p.diff.rate.to_string(),
            p.same.error.to_string(),
            p.diff.error.to_string(),
        ];
        row.extend(
            [Spd::Spd1, Spd::Spd2, Spd::Spd3]
                .map(|s| p.record.singles_rate(s, gate_rate_hz).to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()
}
