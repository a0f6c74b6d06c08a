//! Run manifest: config hash, per-stage diagnostics and wall times.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: String,
    pub stages: Vec<StageRecord>,
    /// true once the final requested stage has run to completion
    pub completed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub wall_time_s: f64,
    pub diagnostics: serde_json::Value,
}

impl Manifest {
    /// Continue the manifest of a previous invocation with the same config;
    /// start fresh otherwise.
    pub fn load_or_new(dir: &Path, config_hash: &str) -> Self {
        let path = dir.join("manifest.json");
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(m) = serde_json::from_str::<Manifest>(&text) {
                if m.config_hash == config_hash {
                    return Manifest {
                        completed: false,
                        ..m
                    };
                }
            }
        }
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            config_hash: config_hash.to_owned(),
            stages: Vec::new(),
            completed: false,
        }
    }

    pub fn record(&mut self, name: &str, wall_time_s: f64, diagnostics: serde_json::Value) {
        self.stages.retain(|s| s.name != name);
        self.stages.push(StageRecord {
            name: name.to_owned(),
            wall_time_s,
            diagnostics,
        });
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(CliError::numeric)?;
        let text = serde_json::to_string_pretty(self).map_err(CliError::numeric)?;
        std::fs::write(dir.join("manifest.json"), text).map_err(CliError::numeric)
    }
}
