use std::path::{Path, PathBuf};

use crate::config::Config;
use crate::error::CliError;

/// One CSV file: a header and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip form, so equal numbers print equally: plain decimals
/// for moderate magnitudes, scientific notation otherwise.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// What a command produced: its table and the `[results]` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub results: Vec<(String, String)>,
}

impl Output {
    pub fn new(table: Table) -> Self {
        Self {
            table,
            results: Vec::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }
}

pub struct Artifacts {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// Writes `<command>.csv` and the manifest `<command>.manifest`: the
/// effective configuration plus `[manifest]` and `[results]` sections, in
/// the configuration format itself.
pub fn write_artifacts(
    out_dir: &Path,
    command: &str,
    effective: &Config,
    output: &Output,
) -> Result<Artifacts, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv = out_dir.join(format!("{command}.csv"));
    output.table.write(&csv)?;
    let mut manifest = effective.clone();
    manifest.set("manifest", "command", command);
    manifest.set("manifest", "csv", format!("{command}.csv"));
    manifest.set("manifest", "rows", output.table.rows.len().to_string());
    manifest.set("manifest", "fewbody_version", env!("CARGO_PKG_VERSION"));
    for (k, v) in &output.results {
        manifest.set("results", k, v.clone());
    }
    let path = out_dir.join(format!("{command}.manifest"));
    std::fs::write(&path, format!("# fewbody run manifest\n{manifest}"))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(Artifacts { csv, manifest: path })
}
