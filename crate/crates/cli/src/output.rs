//! Atomic writing of reports and CSV files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::common::{Assertion, Table};
use crate::config::Command;
use crate::error::Result;

/// The JSON report of one run.
#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub command: Command,
    pub seed: u64,
    pub inputs: &'a serde_json::Value,
    pub results: &'a serde_json::Value,
    pub assertions: &'a [Assertion],
    pub passed: bool,
}

/// Writes `bytes` to `dir/name` through a temporary file in `dir`.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

pub fn table_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&table.header)?;
    for row in &table.rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    writer.into_inner().map_err(|e| e.into_error().into())
}

/// CSV files first, then the report, so a present report means complete
/// artifacts.
pub fn write_outputs(dir: &Path, report: &Report, tables: &[Table]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for table in tables {
        write_atomic(dir, &table.file, &table_bytes(table)?)?;
    }
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    write_atomic(dir, "report.json", &json)
}
