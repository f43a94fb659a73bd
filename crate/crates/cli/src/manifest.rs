//! Run manifests: what was run, with which seeds, and what it produced.

use std::path::Path;

use floquet_junction::{JunctionError, ModelConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// `ok`, `config_error`, `numerical_error` or `error`.
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub config: Option<ModelConfig>,
    pub config_sha256: Option<String>,
    pub master_seed: Option<u64>,
    pub realization_seeds: Vec<u64>,
    pub steps_per_period: Option<usize>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, workers: usize) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            status: "ok".into(),
            exit_code: 0,
            error: None,
            config: None,
            config_sha256: None,
            master_seed: None,
            realization_seeds: Vec::new(),
            steps_per_period: None,
            workers,
            wall_clock_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn set_config(&mut self, config: &ModelConfig) {
        self.config_sha256 = Some(sha256_hex(config.to_toml().as_bytes()));
        self.master_seed = Some(config.disorder.seed);
        self.config = Some(config.clone());
    }

    pub fn record_failure(&mut self, err: &JunctionError, exit_code: i32) {
        self.status = match exit_code {
            2 => "config_error",
            3 => "numerical_error",
            _ => "error",
        }
        .into();
        self.exit_code = exit_code;
        self.error = Some(err.to_string());
    }

    pub fn write(&self, dir: &Path) -> Result<(), JunctionError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(dir, MANIFEST_FILE, text.as_bytes()).map(|_| ())
    }
}

/// Writes `bytes` to `dir/name` and returns its manifest entry.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputFile, JunctionError> {
    let path = dir.join(name);
    let io = |source| JunctionError::Io { path: path.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(&path, bytes).map_err(io)?;
    Ok(OutputFile { name: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() })
}
