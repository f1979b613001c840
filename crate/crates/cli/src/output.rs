//! JSON and CSV writers, and CSV merging.

use std::cmp::Ordering;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'a str,
    seed: u64,
    results: &'a [T],
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes `rows` as CSV when `out` ends in `.csv`, else as a JSON envelope.
pub fn emit<T: Serialize>(command: &str, seed: u64, out: Option<&PathBuf>, rows: &[T]) -> Result<(), CliError> {
    match out {
        Some(path) if is_csv(path) => {
            let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
            for row in rows {
                w.serialize(row).map_err(|e| io_err(path, e))?;
            }
            w.flush().map_err(|e| io_err(path, e))
        }
        Some(path) => {
            let text = json_text(command, seed, rows)?;
            std::fs::write(path, text).map_err(|e| io_err(path, e))
        }
        None => {
            let text = json_text(command, seed, rows)?;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn json_text<T: Serialize>(command: &str, seed: u64, rows: &[T]) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(&Envelope { command, seed, results: rows })
        .map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn field_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<i128>(), b.parse::<i128>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Concatenates CSV files with one header. Rows are stably ordered by the
/// `key` column, then the remaining columns left to right; duplicates stay.
pub fn merge(paths: &[PathBuf], out: Option<&PathBuf>) -> Result<usize, CliError> {
    let mut header: Option<csv::StringRecord> = None;
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for path in paths {
        let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
        let h = r.headers().map_err(|e| io_err(path, e))?.clone();
        match &header {
            None => header = Some(h),
            Some(first) if *first != h => {
                return Err(CliError::SchemaMismatch(format!(
                    "{}: columns [{}] differ from [{}]",
                    path.display(),
                    h.iter().collect::<Vec<_>>().join(","),
                    first.iter().collect::<Vec<_>>().join(",")
                )))
            }
            Some(_) => {}
        }
        for rec in r.records() {
            rows.push(rec.map_err(|e| io_err(path, e))?);
        }
    }
    let header = header.ok_or_else(|| CliError::Usage("merge needs at least one input".into()))?;
    let key_col = header.iter().position(|h| h == "key");
    rows.sort_by(|x, y| {
        let by_key = key_col.map_or(Ordering::Equal, |k| x[k].cmp(&y[k]));
        by_key.then_with(|| {
            x.iter()
                .zip(y.iter())
                .enumerate()
                .filter(|(i, _)| Some(*i) != key_col)
                .map(|(_, (a, b))| field_cmp(a, b))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    });
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| io_err(path, e))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let werr = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(werr)?;
    for row in &rows {
        w.write_record(row).map_err(werr)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(rows.len())
}
