//! Report files with a provenance header.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub const TOOLKIT: &str = "drivesim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub command: String,
    /// SHA-256 of the config file bytes; empty without a config file.
    pub config_sha256: String,
    /// SHA-256 of every input file by role.
    pub inputs: BTreeMap<String, String>,
    pub overrides: BTreeMap<String, String>,
    pub seed: u64,
}

impl Provenance {
    /// Comment line opening every CSV report.
    pub fn csv_comment(&self) -> String {
        let mut line = format!(
            "# {} {} {} config_sha256={} seed={}",
            self.toolkit, self.version, self.command, self.config_sha256, self.seed
        );
        for (k, v) in &self.overrides {
            line.push_str(&format!(" {k}={v}"));
        }
        line.push('\n');
        line
    }
}

/// Collects report files and writes them in one pass.
#[derive(Debug)]
pub struct Writer {
    dir: PathBuf,
    provenance: Provenance,
    written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: impl Into<PathBuf>, provenance: Provenance) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::Output {
            path: dir.clone(),
            message: e.to_string(),
        })?;
        Ok(Writer {
            dir,
            provenance,
            written: Vec::new(),
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::Output {
            path: path.clone(),
            message: e.to_string(),
        })?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// `{"provenance": …, key: value}`, pretty-printed.
    pub fn json(&mut self, name: &str, key: &str, value: &impl Serialize) -> Result<PathBuf> {
        let fail = |e: serde_json::Error| Error::Output {
            path: Path::new(name).to_path_buf(),
            message: e.to_string(),
        };
        let mut doc = serde_json::Map::new();
        doc.insert(
            "provenance".into(),
            serde_json::to_value(&self.provenance).map_err(fail)?,
        );
        doc.insert(key.into(), serde_json::to_value(value).map_err(fail)?);
        let mut text = serde_json::to_string_pretty(&doc).map_err(fail)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Rows serialised with a header from their field names.
    pub fn csv<R: Serialize>(
        &mut self,
        name: &str,
        rows: impl IntoIterator<Item = R>,
    ) -> Result<PathBuf> {
        let fail = |e: csv::Error| Error::Output {
            path: Path::new(name).to_path_buf(),
            message: e.to_string(),
        };
        let mut out = self.provenance.csv_comment().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in rows {
                w.serialize(r).map_err(fail)?;
            }
            w.flush().map_err(|e| Error::Output {
                path: Path::new(name).to_path_buf(),
                message: e.to_string(),
            })?;
        }
        self.write(name, &out)
    }

    /// Explicit header and string records.
    pub fn csv_records(
        &mut self,
        name: &str,
        header: &[String],
        rows: &[Vec<String>],
    ) -> Result<PathBuf> {
        let fail = |e: csv::Error| Error::Output {
            path: Path::new(name).to_path_buf(),
            message: e.to_string(),
        };
        let mut out = self.provenance.csv_comment().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(header).map_err(fail)?;
            for r in rows {
                w.write_record(r).map_err(fail)?;
            }
            w.flush().map_err(|e| Error::Output {
                path: Path::new(name).to_path_buf(),
                message: e.to_string(),
            })?;
        }
        self.write(name, &out)
    }

    pub fn finish(self) -> Vec<PathBuf> {
        self.written
    }
}
