//! Run manifest: hashed inputs and outputs plus the echoed parameters.
//!
//! Contains nothing time- or host-dependent, so unchanged inputs give an
//! identical manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Path shown relative to `root` when possible, with forward slashes.
fn display_path(root: &Path, p: &Path) -> String {
    let shown = p.strip_prefix(root).unwrap_or(p);
    shown.to_string_lossy().replace('\\', "/")
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn input(&mut self, root: &Path, path: &Path) -> Result<(), Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
        self.inputs.push(FileDigest { path: display_path(root, path), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    /// Hashes a bundled text that has no file of its own.
    pub fn builtin_input(&mut self, label: &str, text: &str) {
        self.inputs.push(FileDigest { path: label.to_string(), sha256: sha256_hex(text.as_bytes()) });
    }

    pub fn output(&mut self, root: &Path, path: &Path, bytes: &[u8]) {
        self.outputs.push(FileDigest { path: display_path(root, path), sha256: sha256_hex(bytes) });
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, Failure> {
        let path = dir.join(format!("manifest-{}.json", self.command));
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
        Ok(path)
    }
}
