//! CSV and JSON interchange.
//!
//! Time series CSV: header row of series labels, then one row per time point.
//! Numbers are written with 17 significant digits so a write/read cycle is
//! lossless.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::TimeSeries;

pub(crate) fn current_schema() -> u32 {
    crate::SCHEMA_VERSION
}

/// `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            msg: format!("{kind:?}"),
        },
    }
}

fn parse_number(field: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("column {}: {field:?} is not a number", column + 1),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("column {}: non-finite value {field:?}", column + 1),
        });
    }
    Ok(v)
}

pub fn read_series<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let labels: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if labels.is_empty() || labels.iter().all(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            msg: "missing header row".into(),
        });
    }
    let mut obs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != labels.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", labels.len(), record.len()),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, f)| parse_number(f, line, c))
            .collect::<Result<Vec<_>>>()?;
        obs.push(row);
    }
    if obs.is_empty() {
        return Err(Error::Parse {
            line: 2,
            msg: "no observations".into(),
        });
    }
    TimeSeries::from_observations(&obs)?.with_labels(labels)
}

pub fn write_series<W: Write>(ts: &TimeSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(ts.labels_or_default()).map_err(csv_error)?;
    for t in 0..ts.n() {
        wtr.write_record(ts.observation(t).into_iter().map(format_f64))
            .map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_series_file(path: &Path) -> Result<TimeSeries> {
    read_series(std::fs::File::open(path)?)
}

pub fn write_series_file(ts: &TimeSeries, path: &Path) -> Result<()> {
    write_series(ts, std::fs::File::create(path)?)
}

/// Reads `label, x, y` rows; a first row whose coordinates do not parse is
/// taken as a header.
pub fn read_coords<R: Read>(reader: R) -> Result<Vec<(String, f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut out = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected label,x,y; found {} fields", record.len()),
            });
        }
        let x = parse_number(&record[1], line, 1);
        let y = parse_number(&record[2], line, 2);
        match (x, y) {
            (Ok(x), Ok(y)) => out.push((record[0].trim().to_string(), x, y)),
            (Err(e), _) | (_, Err(e)) => {
                if idx == 0 {
                    continue;
                }
                return Err(e);
            }
        }
    }
    Ok(out)
}

/// Dense matrix as headerless CSV rows.
pub fn write_matrix<W: Write>(m: &DenseMatrix, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for i in 0..m.rows() {
        wtr.write_record(m.row(i).iter().map(|&v| format_f64(v)))
            .map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push(
            record
                .iter()
                .enumerate()
                .map(|(c, f)| parse_number(f, line, c))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    DenseMatrix::from_rows(&rows)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}
