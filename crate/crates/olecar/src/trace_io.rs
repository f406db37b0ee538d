//! Trace file parsing.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use olecar_core::harness::{Trace, TraceSource};

use crate::config::TraceFormat;

/// Failure to load a trace file.
#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    /// Path does not exist.
    #[error("trace file not found: {}", .0.display())]
    Missing(PathBuf),
    /// Any other read failure.
    #[error("cannot read trace {}: {source}", path.display())]
    Io {
        /// File.
        path: PathBuf,
        /// Cause.
        source: io::Error,
    },
    /// No keys after filtering.
    #[error("empty trace")]
    Empty,
    /// A row is too short for the key column.
    #[error("row {row}: column {column} out of range ({found} columns)")]
    ColumnOutOfRange {
        /// 1-based row number in the file.
        row: u64,
        /// Requested column.
        column: usize,
        /// Columns in the row.
        found: usize,
    },
    /// Malformed CSV.
    #[error("malformed csv trace: {0}")]
    Csv(#[from] csv::Error),
}

/// Read a trace in the given layout.
pub fn parse_trace(path: &Path, format: &TraceFormat) -> Result<Trace, TraceError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => TraceError::Missing(path.to_path_buf()),
        _ => TraceError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let keys = match format {
        TraceFormat::Lines => parse_lines(&text),
        TraceFormat::Csv { column, skip_header } => parse_csv(&text, *column, *skip_header)?,
    };
    Trace::new(keys, TraceSource::File).map_err(|_| TraceError::Empty)
}

fn parse_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn parse_csv(text: &str, column: usize, skip_header: bool) -> Result<Vec<String>, TraceError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(skip_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut keys = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let key = record.get(column).ok_or_else(|| TraceError::ColumnOutOfRange {
            row: record.position().map_or(0, |p| p.line()),
            column,
            found: record.len(),
        })?;
        keys.push(key.to_owned());
    }
    Ok(keys)
}
