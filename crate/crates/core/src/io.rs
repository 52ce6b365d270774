//! CSV ingestion and export.
//!
//! The input format is UTF-8 with the header `group,order_value`, one visit
//! per row, `group` in `{control, treatment}` and `order_value` a plain
//! non-negative decimal (`0` means no purchase).

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ExperimentData;

pub const HEADER: [&str; 2] = ["group", "order_value"];

/// Parses a plain decimal literal (`123`, `12.50`, `.5`).
///
/// The decimal text is converted with correct rounding, so any value written
/// with at most 15 significant digits reads back as the nearest double.
pub fn parse_decimal(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let body = t.strip_prefix('+').unwrap_or(t);
    if body.starts_with('-') {
        return Err(format!("negative order value {t:?}"));
    }
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    let valid = digits(int)
        && match frac {
            None => !int.is_empty(),
            Some(f) => digits(f) && !(int.is_empty() && f.is_empty()),
        };
    if !valid {
        return Err(format!("not a decimal number: {t:?}"));
    }
    body.parse::<f64>()
        .map_err(|e| format!("{t:?}: {e}"))
        .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("{t:?} overflows")) })
}

/// Reads experiment data from CSV text.
pub fn read_csv(reader: impl Read) -> Result<ExperimentData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Format {
        row: None,
        message: e.to_string(),
    })?;
    let names: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if names != HEADER {
        return Err(Error::Format {
            row: Some(1),
            message: format!("expected header `group,order_value`, found `{}`", names.join(",")),
        });
    }

    let mut control = Vec::new();
    let mut treatment = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = record.map_err(|e| Error::Format {
            row: Some(row),
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Format {
                row: Some(row),
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let value = parse_decimal(&record[1]).map_err(|message| Error::Format {
            row: Some(row),
            message,
        })?;
        match &record[0] {
            "control" => control.push(value),
            "treatment" => treatment.push(value),
            other => {
                return Err(Error::Format {
                    row: Some(row),
                    message: format!("unknown group label {other:?}"),
                })
            }
        }
    }
    ExperimentData::new(control, treatment)
}

/// Reads experiment data from a CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<ExperimentData> {
    let file = File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(BufReader::new(file))
}

/// Writes experiment data as CSV, control rows first.
///
/// Values use the shortest decimal that reads back to the same double.
pub fn write_csv(data: &ExperimentData, mut out: impl Write) -> Result<()> {
    writeln!(out, "{}", HEADER.join(","))?;
    for (label, values) in [("control", &data.control), ("treatment", &data.treatment)] {
        for v in values.iter() {
            writeln!(out, "{label},{v}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn to_csv_string(data: &ExperimentData) -> String {
    let mut buf = Vec::new();
    write_csv(data, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is ASCII")
}

/// SHA-256 (hex) of the canonical CSV form of `data`.
pub fn digest(data: &ExperimentData) -> String {
    let mut hasher = Sha256::new();
    hasher.update(to_csv_string(data).as_bytes());
    hex::encode(hasher.finalize())
}
