//! Run manifests: what ran, with which inputs and seed, and the SHA-256 of
//! every output file. Outputs never embed wall-clock data, so a replay can
//! compare digests byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::Command;
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// The parsed subcommand with its flags.
    pub command: Command,
    pub tool_version: String,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub input: Option<InputDigest>,
    /// Echo of the scenario document, when there is one.
    pub config: Option<serde_json::Value>,
    pub wall_clock_ms: u128,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the files a subcommand writes into its output directory.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<FileDigest>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?;
        self.files.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn into_digests(self) -> Vec<FileDigest> {
        self.files
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: shown.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: shown,
        message: e.to_string(),
    })
}

/// Differences between two digest lists, empty when identical.
pub fn compare(expected: &[FileDigest], actual: &[FileDigest]) -> Vec<String> {
    let mut out = Vec::new();
    for e in expected {
        match actual.iter().find(|a| a.path == e.path) {
            None => out.push(format!("{}: missing", e.path)),
            Some(a) if a.sha256 != e.sha256 => out.push(format!("{}: {} != {}", e.path, a.sha256, e.sha256)),
            _ => {}
        }
    }
    for a in actual {
        if !expected.iter().any(|e| e.path == a.path) {
            out.push(format!("{}: unexpected output", a.path));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn compare_reports_each_kind() {
        let d = |p: &str, h: &str| FileDigest {
            path: p.into(),
            sha256: h.into(),
        };
        assert!(compare(&[d("a", "1")], &[d("a", "1")]).is_empty());
        let diff = compare(&[d("a", "1"), d("b", "2")], &[d("a", "9"), d("c", "3")]);
        assert_eq!(diff.len(), 3);
    }
}
