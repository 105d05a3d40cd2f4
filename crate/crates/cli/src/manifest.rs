//! Run manifest written before compute starts.

use anyhow::{Context, Result};
use serde::Serialize;
use std::path::Path;

/// Provenance record for one CLI run. The manifest carries the fully
/// resolved configuration, so re-running with it reproduces the data files
/// bit-exactly within one build (the manifest itself holds the timestamp).
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub subcommand: String,
    pub created_utc: String,
    pub build: BuildId,
    pub seed: Option<u64>,
    /// Resolved configuration as a TOML document.
    pub config_toml: String,
    /// Files this run writes, relative to the output directory.
    pub outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct BuildId {
    pub name: &'static str,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: Option<u64>, config_toml: String, outputs: &[&str]) -> Self {
        Self {
            schema: "blindsr.manifest.v1",
            subcommand: subcommand.to_string(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            build: BuildId {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            seed,
            config_toml,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Serialize to `manifest.json` in `dir` before any computation runs.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).context("serializing manifest")?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
