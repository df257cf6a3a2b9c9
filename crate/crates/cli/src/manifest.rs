//! Run manifest written next to every command's outputs. It is the only
//! output that varies between identical runs (timestamp).

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("SYMRNN_GIT_DESCRIBE"));

pub struct Manifest {
    command: &'static str,
    options: Value,
    effective: Value,
    inputs: Vec<Value>,
    outputs: Vec<Value>,
}

fn sha256_of(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn file_entry(path: &Path) -> Result<Value, CliError> {
    Ok(json!({ "path": path.display().to_string(), "sha256": sha256_of(path)? }))
}

impl Manifest {
    /// `options` are the merged flags; `effective` the resolved configuration.
    pub fn new(command: &'static str, options: &impl Serialize, effective: Value) -> Self {
        Self {
            command,
            options: serde_json::to_value(options).expect("options serialise"),
            effective,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path) -> Result<Self, CliError> {
        self.inputs.push(file_entry(path)?);
        Ok(self)
    }

    pub fn output(mut self, path: &Path) -> Result<Self, CliError> {
        self.outputs.push(file_entry(path)?);
        Ok(self)
    }

    pub fn write(self, path: &Path) -> Result<(), CliError> {
        let doc = json!({
            "tool": "symrnn",
            "version": VERSION,
            "command": self.command,
            "created": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "options": self.options,
            "effective": self.effective,
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        let text = serde_json::to_string_pretty(&doc).expect("manifest serialises") + "\n";
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
