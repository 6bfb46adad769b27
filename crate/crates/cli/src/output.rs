//! Atomic artifact writes, digests and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// One produced file and its content digest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProducedFile {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Everything a run wrote, with enough context to reproduce it.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub kind: &'static str,
    pub command: String,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub tolerance_scale: f64,
    pub node_budget: u64,
    pub timestamp_unix: u64,
    pub config: serde_json::Value,
    pub files: Vec<ProducedFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the files of one run in an output directory.
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<ProducedFile>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(ArtifactWriter { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `name` through a temporary file in the same directory, then renames.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.dir.join(name);
        write_atomic(&target, contents)?;
        self.files.push(ProducedFile { path: name.to_string(), bytes: contents.len(), sha256: sha256_hex(contents) });
        Ok(target)
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(
        mut self,
        command: &str,
        seed: Option<u64>,
        tolerance_scale: f64,
        node_budget: u64,
        config: serde_json::Value,
    ) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            kind: "manifest",
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            tolerance_scale,
            node_budget,
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config,
            files: std::mem::take(&mut self.files),
        };
        self.write_json("manifest.json", &manifest)
    }
}

pub fn write_atomic(target: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", target.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(target).map_err(|e| io(e.error))?;
    Ok(())
}
