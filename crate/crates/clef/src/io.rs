//! CSV ingestion and JSON artifacts.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clef_core::damex::ConeMass;
use clef_core::sim::{DependenceStructure, StructureGenConfig};
use clef_core::{DataMatrix, DiscoveryReport, FeatureSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot open {path}: {source}")]
    Open { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: row {row}: column {column} has non-numeric value {value:?}")]
    NotNumeric { path: PathBuf, row: usize, column: String, value: String },
    #[error("{path}: expected {expected} columns, row {row} has {found}")]
    Ragged { path: PathBuf, row: usize, expected: usize, found: usize },
    #[error("{path}: no data rows")]
    Empty { path: PathBuf },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Data { path: PathBuf, source: clef_core::Error },
}

/// Whether the first CSV record names the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Header {
    /// A header is assumed when no field of the first record parses as a number.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: Header,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { delimiter: b',', header: Header::Auto }
    }
}

/// Reads one observation per row. Non-numeric fields are an error naming
/// the column (by header name when there is one, else by 1-based index).
pub fn read_csv(path: &Path, opts: CsvOptions) -> Result<DataMatrix, IoError> {
    let file = File::open(path).map_err(|source| IoError::Open { path: path.into(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let csv_err = |source| IoError::Csv { path: path.into(), source };

    let mut records = reader.records();
    let Some(first) = records.next().transpose().map_err(csv_err)? else {
        return Err(IoError::Empty { path: path.into() });
    };
    let has_header = match opts.header {
        Header::Present => true,
        Header::Absent => false,
        Header::Auto => first.iter().all(|f| f.parse::<f64>().is_err()),
    };
    let d = first.len();
    let names: Vec<String> =
        if has_header { first.iter().map(str::to_owned).collect() } else { (1..=d).map(|j| j.to_string()).collect() };

    let mut values = Vec::new();
    let mut n = 0;
    let mut push = |record: &csv::StringRecord, row: usize| -> Result<(), IoError> {
        if record.len() != d {
            return Err(IoError::Ragged { path: path.into(), row, expected: d, found: record.len() });
        }
        for (j, field) in record.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|_| IoError::NotNumeric {
                path: path.into(),
                row,
                column: names[j].clone(),
                value: field.to_owned(),
            })?;
            values.push(v);
        }
        Ok(())
    };
    if !has_header {
        push(&first, 1)?;
        n += 1;
    }
    for (offset, record) in records.enumerate() {
        let record = record.map_err(csv_err)?;
        push(&record, offset + 2)?;
        n += 1;
    }
    if n == 0 {
        return Err(IoError::Empty { path: path.into() });
    }
    DataMatrix::new(n, d, values).map_err(|source| IoError::Data { path: path.into(), source })
}

/// Writes the matrix with an `x1,…,xd` header, values in shortest
/// round-trip form.
pub fn write_csv<W: Write>(out: W, data: &DataMatrix) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=data.d()).map(|j| format!("x{j}")))?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, data: &DataMatrix) -> Result<(), IoError> {
    let file = File::create(path).map_err(|source| IoError::Write { path: path.into(), source })?;
    write_csv(BufWriter::new(file), data).map_err(|source| IoError::Csv { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let file = File::create(path).map_err(|source| IoError::Write { path: path.into(), source })?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| IoError::Json { path: path.into(), source })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|source| IoError::Write { path: path.into(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let file = File::open(path).map_err(|source| IoError::Open { path: path.into(), source })?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| IoError::Json { path: path.into(), source })
}

/// Ground truth written next to a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFile {
    pub subsets: Vec<FeatureSet>,
    pub w: f64,
    pub seed: u64,
    pub stream_id: u64,
    pub config: StructureGenConfig,
}

impl StructureFile {
    pub fn new(structure: &DependenceStructure, seed: u64, stream_id: u64, config: StructureGenConfig) -> Self {
        Self { subsets: structure.subsets.clone(), w: structure.w, seed, stream_id, config }
    }
}

/// Anything `score` knows how to read a discovered family from: a discover
/// report, a damex cone list, or a plain list of index lists.
#[derive(Debug, Clone)]
pub enum Found {
    Discovery(Box<DiscoveryReport>),
    Cones(Vec<ConeMass>),
    Sets(Vec<FeatureSet>),
}

impl Found {
    pub fn from_value(value: serde_json::Value) -> Result<Self, serde_json::Error> {
        let cones = value.as_array().is_some_and(|a| a.first().is_some_and(|v| v.is_object()));
        if value.is_object() {
            serde_json::from_value(value).map(|r| Found::Discovery(Box::new(r)))
        } else if cones {
            serde_json::from_value(value).map(Found::Cones)
        } else {
            serde_json::from_value(value).map(Found::Sets)
        }
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let value: serde_json::Value = read_json(path)?;
        Found::from_value(value).map_err(|source| IoError::Json { path: path.into(), source })
    }

    pub fn family(&self) -> Vec<FeatureSet> {
        match self {
            Found::Discovery(r) => r.maximal.clone(),
            Found::Cones(c) => c.iter().map(|c| c.features).collect(),
            Found::Sets(s) => s.clone(),
        }
    }
}
