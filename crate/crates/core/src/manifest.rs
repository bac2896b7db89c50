//! Run manifests: enough to re-run a command and check its output bytes.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Command parameters in canonical units, excluding the output path.
    pub params: Value,
    pub seed: Option<u64>,
    /// Hash of `(version, command, params, seed)`; also printed in table headers.
    pub manifest_checksum: String,
    pub outputs: Vec<OutputChecksum>,
}

impl RunManifest {
    pub fn new(command: &str, params: Value, seed: Option<u64>) -> Self {
        let mut m = Self {
            tool: "qmdisc".into(),
            version: VERSION.into(),
            command: command.into(),
            params,
            seed,
            manifest_checksum: String::new(),
            outputs: Vec::new(),
        };
        m.manifest_checksum = m.compute_checksum();
        m
    }

    /// SHA-256 over the compact JSON of the parameter section. `serde_json`
    /// maps keep keys sorted, so the encoding is canonical.
    pub fn compute_checksum(&self) -> String {
        let key = serde_json::json!({
            "version": self.version,
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
        });
        sha256_hex(key.to_string().as_bytes())
    }

    pub fn short_checksum(&self) -> &str {
        &self.manifest_checksum[..16]
    }

    pub fn record_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(OutputChecksum { path: path.to_path_buf(), sha256: sha256_hex(bytes) });
    }

    /// Manifest path for an output file: `<out>.manifest.json`.
    pub fn path_for(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let expected = m.compute_checksum();
        if m.manifest_checksum != expected {
            return Err(Error::Config(format!(
                "manifest checksum {} does not match its parameters ({expected})",
                m.manifest_checksum
            )));
        }
        Ok(m)
    }
}
