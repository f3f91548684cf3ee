//! Per-run manifest: resolved configuration, outputs, timings, diagnostics.
//! Timings live here and nowhere else, so data files stay reproducible.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    pub n_atoms: u32,
    pub gamma: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub failed_points: Vec<FailedPoint>,
    pub degenerate_points: usize,
    /// Atom numbers whose critical point sits next to a degenerate point.
    pub flagged: Vec<u32>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub label: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub status: String,
    pub error: Option<String>,
    pub config: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub timings: Vec<Timing>,
    pub total_seconds: f64,
    pub diagnostics: Diagnostics,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: "running".into(),
            error: None,
            config,
            outputs: Vec::new(),
            timings: Vec::new(),
            total_seconds: 0.0,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn path_in(out_dir: &Path, command: &str) -> PathBuf {
        out_dir.join(format!("{command}.manifest.json"))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::CliError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
