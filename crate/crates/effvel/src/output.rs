//! CSV/JSON writers and the checksummed run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::RunError;

/// Seventeen significant digits: lossless for `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects the files of one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        fs::write(self.root.join(name), bytes)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// Header row, then one row per record.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), RunError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.put(name, text.as_bytes())
    }

    /// Pre-rendered CSV text (for tables with non-numeric cells).
    pub fn csv_text(&mut self, name: &str, text: &str) -> Result<(), RunError> {
        self.put(name, text.as_bytes())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Config(e.to_string()))?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(mut self, config: &ExperimentConfig, wall_time: Duration) -> Result<RunManifest, RunError> {
        self.files.sort();
        let files = self
            .files
            .iter()
            .map(|name| {
                let bytes = fs::read(self.root.join(name))?;
                Ok(ManifestEntry {
                    path: name.clone(),
                    bytes: bytes.len() as u64,
                    sha256: sha256_hex(&bytes),
                })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            files,
            wall_time,
        };
        self.put("manifest.json", manifest.to_json().as_bytes())?;
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub files: Vec<ManifestEntry>,
    /// Reported on the console only, so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    /// Names of listed files that are missing or whose checksum differs.
    pub fn mismatches(&self, root: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| match fs::read(root.join(&f.path)) {
                Ok(bytes) => sha256_hex(&bytes) != f.sha256,
                Err(_) => true,
            })
            .map(|f| f.path.clone())
            .collect()
    }
}
