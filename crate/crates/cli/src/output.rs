//! Artifacts written under the output directory.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const REPORT: &str = "report.json";
pub const TRAJECTORY: &str = "trajectory.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    /// Write every artifact, then a manifest with their hashes.
    pub fn write(mut self, out: &Path, header: Value) -> Result<(), CliError> {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        self.files.sort_by(|a, b| a.0.cmp(&b.0));
        let mut entries = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = out.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            entries.push(json!({
                "path": name,
                "bytes": bytes.len(),
                "sha256": sha256(bytes),
            }));
        }
        let mut manifest = header;
        manifest["files"] = Value::Array(entries);
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = out.join(MANIFEST);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
    }
}

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
