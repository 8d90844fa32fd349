//! CSV tables and the JSON sidecar describing a run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// Shortest round-trip formatting, so equal floats always print equal bytes.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub point: String,
    pub module: &'static str,
    pub status: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    subcommand: &'a str,
    code_version: &'static str,
    config_sha256: String,
    config: &'a RunConfig,
    grid_sizes: &'a serde_json::Value,
    points: usize,
    tables: Vec<TableInfo>,
    failures: &'a [Failure],
    notes: &'a [String],
}

#[derive(Serialize)]
struct TableInfo {
    file: String,
    columns: Vec<&'static str>,
    rows: usize,
}

pub struct RunOutput {
    pub tables: Vec<Table>,
    pub grid_sizes: serde_json::Value,
    pub points: usize,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn render_csv(table: &Table, header: &str) -> std::io::Result<Vec<u8>> {
    let mut buf = format!("{header}\r\n").into_bytes();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(&mut buf);
        w.write_record(&table.columns)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// Writes every table plus `<subcommand>.json`; returns the paths written.
pub fn write_run(dir: &Path, subcommand: &str, cfg: &RunConfig, run: &RunOutput) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let hash = config_hash(cfg);
    let sidecar_name = format!("{subcommand}.json");
    let mut written = Vec::new();
    for t in &run.tables {
        let header = format!("# wqed {subcommand}; metadata: {sidecar_name}; config_sha256: {hash}");
        let path = dir.join(t.file_name());
        fs::write(&path, render_csv(t, &header)?)?;
        written.push(path);
    }
    let sidecar = Sidecar {
        subcommand,
        code_version: env!("CARGO_PKG_VERSION"),
        config_sha256: hash,
        config: cfg,
        grid_sizes: &run.grid_sizes,
        points: run.points,
        tables: run
            .tables
            .iter()
            .map(|t| TableInfo {
                file: t.file_name(),
                columns: t.columns.clone(),
                rows: t.rows.len(),
            })
            .collect(),
        failures: &run.failures,
        notes: &run.notes,
    };
    let path = dir.join(sidecar_name);
    let mut json = serde_json::to_string_pretty(&sidecar).map_err(std::io::Error::other)?;
    json.push('\n');
    fs::write(&path, json)?;
    written.push(path);
    Ok(written)
}
