//! Report files: one CSV table per data product and a `summary.toml`.
//!
//! CSV floats are written in scientific notation with 17 significant digits,
//! which round-trips every `f64`. The summary uses TOML's own float format,
//! which is the shortest representation that round-trips.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= tolerance,
            value,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    /// An integer, or a string for seeds beyond the TOML integer range.
    pub seed: toml::Value,
    pub config: P,
    pub metrics: toml::Table,
    pub checks: Vec<Check>,
}

impl<P: Serialize> Summary<P> {
    pub fn new(experiment: &'static str, seed: u64, config: P) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            seed: i64::try_from(seed)
                .map(toml::Value::Integer)
                .unwrap_or_else(|_| toml::Value::String(seed.to_string())),
            config,
            metrics: toml::Table::new(),
            checks: Vec::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("summary.toml");
        let text = toml::to_string(self).map_err(|e| Error::Io(format!("cannot serialize summary: {e}")))?;
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))
}
