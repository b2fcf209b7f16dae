//! Artifact writing. Numbers are printed in shortest round-trip form, so
//! identical runs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Output directory plus the formats requested for it.
#[derive(Clone, Debug)]
pub struct Sink {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn create(dir: &Path, formats: &[Format]) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
        Ok(Sink { dir: dir.to_path_buf(), formats: formats.to_vec(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        self.written.push(path);
        Ok(())
    }

    /// Binary artifacts are written whatever the formats.
    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        self.written.push(path);
        Ok(())
    }
}

/// File-name key of a `κ̄` value.
pub fn kappa_key(k: f64) -> String {
    format!("kappa_{k:e}")
}
