//! Run manifest written next to every sweep's outputs.

use std::path::Path;

use coexist_core::beamforming::DofWarning;
use coexist_core::config::ScenarioConfig;
use serde::{Deserialize, Serialize};

pub const MANIFEST_SCHEMA: &str = "coexist-manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFiles {
    pub rates: String,
    pub sir_cdf: String,
    pub trials: String,
}

/// Everything needed to regenerate a sweep's CSVs bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub base_seed: u64,
    pub config: ScenarioConfig,
    pub outputs: OutputFiles,
    pub num_trials: usize,
    pub dof_warnings: Vec<DofWarning>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
        let manifest: Self = serde_json::from_str(&text)
            .map_err(|e| format!("malformed manifest {}: {e}", path.display()))?;
        if manifest.schema != MANIFEST_SCHEMA {
            return Err(format!(
                "unsupported manifest schema `{}` (expected `{MANIFEST_SCHEMA}`)",
                manifest.schema
            ));
        }
        Ok(manifest)
    }
}
