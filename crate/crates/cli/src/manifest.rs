use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Provenance record written next to every output file as `<out>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: &'static str,
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_owned(),
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: BTreeMap::new(),
            parameters: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_owned(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.inputs
            .insert(path.display().to_string(), digest_file(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self> {
        self.outputs
            .insert(path.display().to_string(), digest_file(path)?);
        Ok(self)
    }

    /// Writes the manifest next to `primary_output` and returns its path.
    pub fn write_beside(&self, primary_output: &Path) -> Result<PathBuf> {
        let mut name = primary_output.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("sha256:{}", hex::encode(Sha256::digest(&bytes))))
}
