//! Atomic file output and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Collects the files written by one command.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileHash>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(FileHash {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn files(&self) -> &[FileHash] {
        &self.files
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Subcommand and its arguments, without global flags.
    pub command: Vec<String>,
    pub seed: u64,
    pub config: RunConfig,
    #[serde(default)]
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    /// Wall-clock timings; not part of any hashed output.
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn file_name(command: &[String]) -> String {
        let tag: Vec<&str> = command
            .iter()
            .take_while(|a| !a.starts_with('-'))
            .take(2)
            .map(|s| s.as_str())
            .collect();
        let tag = if command.first().map(String::as_str) == Some("fit") {
            let model = command
                .iter()
                .position(|a| a == "--model")
                .and_then(|i| command.get(i + 1))
                .map_or("fit", String::as_str);
            format!("fit-{model}")
        } else {
            tag.join("-")
        };
        format!("manifest-{tag}.json")
    }
}
