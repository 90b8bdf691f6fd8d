//! Table writers and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Format, RunConfig};
use crate::error::{Error, Result};

/// A rectangular numeric table written as one file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; the extension follows the output format.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Nine significant digits; `-0` prints as `0`.
pub fn format_number(x: f64) -> String {
    format!("{:.8e}", x + 0.0)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&table.columns).map_err(fail)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_number(x))).map_err(fail)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Array of objects; numbers are rounded exactly as in CSV.
pub fn to_json(table: &Table) -> Result<Vec<u8>> {
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
        .rows
        .iter()
        .map(|row| {
            table
                .columns
                .iter()
                .zip(row)
                .map(|(c, &x)| {
                    let v = format_number(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64);
                    (c.to_string(), v.map_or(serde_json::Value::Null, serde_json::Value::Number))
                })
                .collect()
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&rows).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

/// Writes every table, the effective config and `manifest.json` into the
/// output directory. Returns the paths written.
pub fn write_all(cfg: &RunConfig, command: &str, tables: &[Table]) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let ext = match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut files = Vec::new();
    let mut written = Vec::new();
    let mut emit = |name: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(&name);
        fs::write(&path, &bytes).map_err(|e| io_err(&path, e))?;
        log::info!("wrote {}", path.display());
        files.push(FileEntry {
            name,
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        written.push(path);
        Ok(())
    };
    for t in tables {
        let bytes = match cfg.format {
            Format::Csv => to_csv(t)?,
            Format::Json => to_json(t)?,
        };
        emit(format!("{}.{ext}", t.name), bytes)?;
    }
    emit("config.toml".into(), cfg.to_toml()?.into_bytes())?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        seed: cfg.seed,
        config_sha256: cfg.hash()?,
        files,
    };
    let path = dir.join("manifest.json");
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    written.push(path);
    Ok(written)
}
