//! Output files: tables in CSV or JSON, JSON reports and the run manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub struct Output {
    dir: PathBuf,
    format: Format,
}

impl Output {
    pub fn new(dir: &Path, format: Format) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Output { dir: dir.to_path_buf(), format })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn create(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        let path = self.path(name);
        File::create(&path).map(BufWriter::new).map_err(|e| Failure::io(&path, e))
    }

    /// Writes `rows` as `<stem>.csv` with a header row or as `<stem>.json`
    /// holding an array of records.
    pub fn table<T: Serialize>(&self, stem: &str, rows: &[T]) -> Result<(), Failure> {
        match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(self.create(&format!("{stem}.csv"))?);
                for row in rows {
                    w.serialize(row).map_err(Failure::output)?;
                }
                w.flush().map_err(Failure::output)?;
            }
            Format::Json => self.json(&format!("{stem}.json"), &rows)?,
        }
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(Failure::output)?;
        writeln!(w).and_then(|_| w.flush()).map_err(Failure::output)?;
        Ok(())
    }
}

/// Provenance record written next to every command's results.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    /// SHA-256 of the compact JSON encoding of `config`.
    pub config_hash: String,
    /// Formula constants the results depend on.
    pub constants: BTreeMap<String, Value>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: &impl Serialize) -> Result<Self, Failure> {
        let config = serde_json::to_value(config).map_err(Failure::output)?;
        let encoded = serde_json::to_string(&config).map_err(Failure::output)?;
        Ok(Manifest {
            tool: "corrmine",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            seed,
            config,
            config_hash: hex::encode(Sha256::digest(encoded.as_bytes())),
            constants: BTreeMap::new(),
        })
    }

    pub fn constant(mut self, name: &str, value: impl Serialize) -> Self {
        self.constants.insert(name.to_owned(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}
