use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use steerkit::io::to_rounded_value;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowTiming {
    pub m: usize,
    pub seconds: f64,
}

/// Provenance of one command run. Timestamps live here and nowhere else.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub started_at: String,
    pub wall_time_seconds: f64,
    pub result_sha256: String,
    pub outputs: Vec<OutputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<RowTiming>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub struct Run {
    command: &'static str,
    params: Value,
    seed: Option<u64>,
    started_at: String,
    clock: Instant,
    outputs: Vec<OutputDigest>,
    timings: Option<Vec<RowTiming>>,
}

impl Run {
    pub fn start<P: Serialize>(command: &'static str, params: &P, seed: Option<u64>) -> Result<Self, CliError> {
        Ok(Run {
            command,
            params: serde_json::to_value(params).map_err(CliError::internal)?,
            seed,
            started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            clock: Instant::now(),
            outputs: Vec::new(),
            timings: None,
        })
    }

    /// Writes an auxiliary output file and records its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(path, bytes).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(OutputDigest { path: path.display().to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn set_timings(&mut self, timings: Vec<RowTiming>) {
        self.timings = Some(timings);
    }

    /// Builds `{"manifest", "result"}` with the result rounded to 12 digits.
    pub fn finish<T: Serialize>(self, result: &T) -> Result<String, CliError> {
        let result = to_rounded_value(result).map_err(CliError::internal)?;
        let compact = serde_json::to_string(&result).map_err(CliError::internal)?;
        let manifest = RunManifest {
            command: self.command.to_string(),
            params: self.params,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            wall_time_seconds: self.clock.elapsed().as_secs_f64(),
            result_sha256: sha256_hex(compact.as_bytes()),
            outputs: self.outputs,
            timings: self.timings,
        };
        let envelope = serde_json::json!({ "manifest": manifest, "result": result });
        let mut text = serde_json::to_string_pretty(&envelope).map_err(CliError::internal)?;
        text.push('\n');
        Ok(text)
    }
}
