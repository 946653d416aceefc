//! Run manifests and the file writes they record.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: impl Into<String>, contents: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: sha256_hex(contents),
            bytes: contents.len() as u64,
        }
    }
}

/// Written as `<command>.manifest.json` next to a command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Command-line arguments after the program name, verbatim.
    pub arguments: Vec<String>,
    /// The fully resolved configuration the command ran with.
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    /// Output files relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_input(path: &Path) -> CliResult<(Vec<u8>, FileDigest)> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let digest = FileDigest::of(path.display().to_string(), &bytes);
    Ok((bytes, digest))
}

/// Collects the files of one run inside its output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<FileDigest>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::write(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::write(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::write(&path, e))?;
        self.written.push(FileDigest::of(name, contents));
        Ok(path)
    }

    pub fn finish(
        self,
        command: &str,
        config: impl Serialize,
        inputs: Vec<FileDigest>,
    ) -> CliResult<()> {
        let manifest = RunManifest {
            tool: "mstphase".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            arguments: std::env::args().skip(1).collect(),
            config: serde_json::to_value(config).map_err(|e| CliError::Internal(e.to_string()))?,
            inputs,
            outputs: self.written,
        };
        let mut text = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push(b'\n');
        let path = self.root.join(format!("{command}.manifest.json"));
        fs::write(&path, text).map_err(|e| CliError::write(&path, e))
    }
}
