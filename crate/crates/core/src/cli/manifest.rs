use crate::error::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Sidecar record written next to every output file as
/// `<output>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub inputs: Vec<InputDigest>,
    /// Settings the user did not give explicitly.
    pub defaults_used: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        let now = chrono::Utc::now().to_rfc3339();
        Self {
            command: command.into(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_at: now.clone(),
            finished_at: now,
            inputs: Vec::new(),
            defaults_used: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn default_used(&mut self, what: impl Into<String>) {
        self.defaults_used.push(what.into());
    }

    pub fn write_for(mut self, output: &Path) -> Result<()> {
        self.finished_at = chrono::Utc::now().to_rfc3339();
        let path = sidecar_path(output, "manifest.json");
        std::fs::write(path, serde_json::to_string_pretty(&self)? + "\n")?;
        Ok(())
    }
}

/// `<output>.<suffix>`.
pub fn sidecar_path(output: &Path, suffix: &str) -> PathBuf {
    let mut s = output.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}
