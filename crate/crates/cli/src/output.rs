//! Output directory handling: data files with checksums and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG_COPY: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// sha256 of `config.json`, the resolved configuration.
    pub config_hash: String,
    pub seed: u64,
    pub trials: usize,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    pub wall_seconds: f64,
    pub exit_code: i32,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
    started: DateTime<Utc>,
}

impl RunDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), started: Utc::now() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serialisable");
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn jsonl<'a, T: Serialize + 'a>(&mut self, name: &str, rows: impl IntoIterator<Item = &'a T>) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        for r in rows {
            serde_json::to_writer(&mut bytes, r).expect("serialisable");
            bytes.push(b'\n');
        }
        self.write_bytes(name, &bytes)
    }

    /// CSV with an explicit header, so an empty table is still a valid file.
    pub fn csv<'a, T: Serialize + 'a>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = &'a T>,
    ) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(&self.dir.join(name), std::io::Error::other(e.to_string())))?;
        self.write_bytes(name, &bytes)
    }

    /// Writes the manifest through a temporary file and a rename.
    pub fn finish(
        self,
        command: &str,
        config_hash: String,
        seed: u64,
        trials: usize,
        threads: usize,
        exit_code: i32,
    ) -> Result<RunManifest, CliError> {
        let finished = Utc::now();
        let mut files = self.files;
        files.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = RunManifest {
            tool: "msalab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash,
            seed,
            trials,
            threads,
            started: self.started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished: finished.to_rfc3339_opts(SecondsFormat::Millis, true),
            wall_seconds: (finished - self.started).num_milliseconds() as f64 / 1000.0,
            exit_code,
            files,
        };
        let tmp = self.dir.join(format!("{MANIFEST}.tmp"));
        let dst = self.dir.join(MANIFEST);
        let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        serde_json::to_writer_pretty(&mut f, &manifest).expect("serialisable");
        f.write_all(b"\n").and_then(|_| f.sync_all()).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &dst).map_err(|e| CliError::io(&dst, e))?;
        Ok(manifest)
    }
}

/// Re-hashes every file listed in a manifest; returns the names that differ.
pub fn verify(dir: &Path, manifest: &RunManifest) -> Result<Vec<String>, CliError> {
    let mut bad = Vec::new();
    for f in &manifest.files {
        let path = dir.join(&f.name);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        if sha256_hex(&bytes) != f.sha256 {
            bad.push(f.name.clone());
        }
    }
    Ok(bad)
}
