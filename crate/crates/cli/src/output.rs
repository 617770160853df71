//! CSV tables with `#` metadata lines, and JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    /// Written as `# ...` lines before the header.
    pub meta: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        for m in &self.meta {
            out.extend_from_slice(format!("# {m}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }
}

/// Shortest round-trip formatting; NaN for missing values.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// `out.csv` -> `out<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.into()))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text + "\n")?;
    Ok(())
}
