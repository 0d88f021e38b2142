//! Corpus loading and writing.
//!
//! The canonical input is a CSV file with header `meme_id,t,value`, one row
//! per observed tick. A JSON array of `{"meme_id": .., "values": [..]}` is
//! also accepted. Ticks are re-based so each meme starts at 0 and missing
//! ticks are filled with zeros.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{Granularity, ModelError, TimeSeries};

/// Series shorter than this cannot hold eight ordered stamps with sleeping
/// ticks in between and are skipped.
pub const MIN_TICKS: usize = 12;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: expected header `meme_id,t,value`, found `{found}`")]
    Header { path: PathBuf, found: String },
    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: negative value {value} for `{meme_id}`")]
    Negative {
        path: PathBuf,
        line: u64,
        meme_id: String,
        value: f64,
    },
    #[error("{path}:{line}: duplicate row for `{meme_id}` at t={t}")]
    Duplicate {
        path: PathBuf,
        line: u64,
        meme_id: String,
        t: u64,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("{path}: duplicate meme_id `{meme_id}`")]
    DuplicateMeme { path: PathBuf, meme_id: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    /// Sorted by meme_id; ids are unique.
    pub series: Vec<TimeSeries>,
    pub source_label: String,
}

impl Corpus {
    pub fn get(&self, meme_id: &str) -> Option<&TimeSeries> {
        self.series
            .binary_search_by(|s| s.meme_id().cmp(meme_id))
            .ok()
            .map(|i| &self.series[i])
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn source_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads a CSV corpus, or a JSON one when the extension is `.json`.
pub fn load_corpus(path: &Path, granularity: Granularity) -> Result<Corpus, IngestError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let raw = if is_json {
        parse_json(path, &bytes)?
    } else {
        parse_csv(path, &bytes)?
    };
    if raw.is_empty() {
        warn!("{}: no series found", path.display());
    }
    let mut series = Vec::with_capacity(raw.len());
    for (meme_id, values) in raw {
        if values.len() < MIN_TICKS {
            warn!(
                "{}: skipping `{meme_id}` with {} ticks (minimum {MIN_TICKS})",
                path.display(),
                values.len()
            );
            continue;
        }
        let s = TimeSeries::new(meme_id, granularity, values).map_err(|source| {
            IngestError::Model {
                path: path.to_path_buf(),
                source,
            }
        })?;
        series.push(s);
    }
    Ok(Corpus {
        series,
        source_label: source_label(path),
    })
}

fn parse_csv(path: &Path, bytes: &[u8]) -> Result<BTreeMap<String, Vec<f64>>, IngestError> {
    let mut out = BTreeMap::new();
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Ok(out);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader.headers().map_err(|e| IngestError::Row {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != ["meme_id", "t", "value"] {
        return Err(IngestError::Header {
            path: path.to_path_buf(),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    // meme_id -> tick -> value
    let mut rows: BTreeMap<String, BTreeMap<u64, f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Row {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |message: String| IngestError::Row {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() != 3 {
            return Err(row_err(format!("expected 3 fields, found {}", record.len())));
        }
        let meme_id = record[0].to_string();
        if meme_id.is_empty() {
            return Err(row_err("empty meme_id".into()));
        }
        let t: u64 = record[1]
            .parse()
            .map_err(|_| row_err(format!("tick `{}` is not a non-negative integer", &record[1])))?;
        let value: f64 = record[2]
            .parse()
            .map_err(|_| row_err(format!("value `{}` is not a number", &record[2])))?;
        if !value.is_finite() {
            return Err(row_err(format!("value `{}` is not finite", &record[2])));
        }
        if value < 0.0 {
            return Err(IngestError::Negative {
                path: path.to_path_buf(),
                line,
                meme_id,
                value,
            });
        }
        let ticks = rows.entry(meme_id.clone()).or_default();
        if ticks.insert(t, value).is_some() {
            return Err(IngestError::Duplicate {
                path: path.to_path_buf(),
                line,
                meme_id,
                t,
            });
        }
    }

    for (meme_id, ticks) in rows {
        let first = *ticks.keys().next().expect("at least one row per meme");
        let last = *ticks.keys().next_back().expect("at least one row per meme");
        let mut values = vec![0.0; (last - first + 1) as usize];
        for (t, v) in ticks {
            values[(t - first) as usize] = v;
        }
        out.insert(meme_id, values);
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonSeries {
    meme_id: String,
    values: Vec<f64>,
}

fn parse_json(path: &Path, bytes: &[u8]) -> Result<BTreeMap<String, Vec<f64>>, IngestError> {
    let mut out = BTreeMap::new();
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Ok(out);
    }
    let items: Vec<JsonSeries> = serde_json::from_slice(bytes).map_err(|source| IngestError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    for item in items {
        if out.contains_key(&item.meme_id) {
            return Err(IngestError::DuplicateMeme {
                path: path.to_path_buf(),
                meme_id: item.meme_id,
            });
        }
        out.insert(item.meme_id, item.values);
    }
    Ok(out)
}

/// CSV text of a corpus, one row per tick including zeros. Values use the
/// shortest representation that parses back to the same number.
pub fn corpus_to_csv(series: &[TimeSeries]) -> String {
    let mut out = String::from("meme_id,t,value\n");
    let mut sorted: Vec<&TimeSeries> = series.iter().collect();
    sorted.sort_by(|a, b| a.meme_id().cmp(b.meme_id()));
    for s in sorted {
        let id = csv_field(s.meme_id());
        for (t, v) in s.values().iter().enumerate() {
            out.push_str(&format!("{id},{t},{v}\n"));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.trim() != s {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_corpus_csv(series: &[TimeSeries], path: &Path) -> Result<(), IngestError> {
    fs::write(path, corpus_to_csv(series)).map_err(io_err(path))
}
