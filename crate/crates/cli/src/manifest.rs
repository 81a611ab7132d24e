use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command: what ran, on which bytes, with
/// which settings.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub inputs: Vec<InputDigest>,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Value>,
    pub started_at: String,
    pub finished_at: String,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &'static str, config: Value) -> Self {
        RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: Vec::new(),
            config,
            diagnostics: None,
            started_at: timestamp(),
            finished_at: String::new(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs.push(InputDigest {
            path: path.to_owned(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    /// Writes the manifest next to `output`, or to stderr without one.
    pub fn finish(mut self, output: Option<&Path>) -> Result<()> {
        self.finished_at = timestamp();
        let text = serde_json::to_string_pretty(&self)?;
        match output {
            Some(out) => {
                let mut name = out.as_os_str().to_owned();
                name.push(".manifest.json");
                fs::write(&name, text + "\n").with_context(|| format!("cannot write {}", Path::new(&name).display()))
            }
            None => {
                eprintln!("{}", text);
                Ok(())
            }
        }
    }
}
