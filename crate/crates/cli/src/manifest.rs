//! Run manifests: a small JSON record written next to every command's
//! outputs so a result can be traced back to the exact inputs and
//! parameters that produced it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Provenance record for one CLI invocation.
///
/// Keys in `inputs` and `outputs` are role names ("ms", "pan", "fused", ...)
/// mapped to the paths that were read or written. `params` holds the
/// command-specific knobs as free-form JSON so each command can record
/// whatever it needs without a shared schema fighting it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Which subcommand produced this record.
    pub command: String,
    /// Version of the tool that ran.
    pub version: String,
    /// RFC 3339 timestamp of the run (UTC).
    pub created_utc: String,
    /// Input role -> path.
    pub inputs: BTreeMap<String, String>,
    /// Command parameters, as JSON.
    pub params: serde_json::Value,
    /// Output role -> path.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            inputs: BTreeMap::new(),
            params: serde_json::Value::Null,
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> &mut Self {
        self.inputs
            .insert(role.to_string(), path.display().to_string());
        self
    }

    pub fn output(&mut self, role: &str, path: &Path) -> &mut Self {
        self.outputs
            .insert(role.to_string(), path.display().to_string());
        self
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .with_context(|| "serializing run manifest".to_string())?;
        text.push('\n');
        fs::write(path, text)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(())
    }
}
