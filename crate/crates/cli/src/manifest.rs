//! Per-run manifest: what was run, on which inputs, producing which files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub elapsed_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub timings: Timings,
}

/// Collects a run's inputs and outputs and writes them, plus the manifest,
/// under one output directory.
pub struct Run {
    out: PathBuf,
    command: String,
    config: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    started: SystemTime,
    clock: Instant,
}

fn unix_ms(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl Run {
    pub fn new(out: &Path, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(|e| CliError::internal(format!("{}: {e}", out.display())))?;
        Ok(Run {
            out: out.to_path_buf(),
            command: command.to_string(),
            config: serde_json::Value::Null,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        })
    }

    pub fn set_config<T: Serialize>(&mut self, config: &T) -> Result<(), CliError> {
        self.config = serde_json::to_value(config).map_err(|e| CliError::internal(e.to_string()))?;
        Ok(())
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value);
    }

    /// Records the digest of an input file.
    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write(&mut self, rel: &str, body: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        let path = self.out.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
        }
        fs::write(&path, body).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        self.outputs.push(rel.to_string());
        Ok(path)
    }

    /// Writes a result document that points back at this run's manifest.
    /// Nothing time-dependent goes in here, so repeated runs match byte for
    /// byte.
    pub fn write_result<T: Serialize>(&mut self, rel: &str, result: &T) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            manifest: &'a str,
            command: &'a str,
            result: &'a T,
        }
        let doc = Envelope {
            manifest: MANIFEST_FILE,
            command: &self.command,
            result,
        };
        let mut body = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::internal(e.to_string()))?;
        body.push(b'\n');
        self.write(rel, body)
    }

    /// Records files written by library code directly into the run directory.
    pub fn record(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.out).unwrap_or(path);
        self.outputs.push(rel.display().to_string());
    }

    pub fn out(&self) -> &Path {
        &self.out
    }

    pub fn finish(self) -> Result<(), CliError> {
        let finished = SystemTime::now();
        let manifest = Manifest {
            tool: "stagewise",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: self.config,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.outputs,
            timings: Timings {
                started_unix_ms: unix_ms(self.started),
                finished_unix_ms: unix_ms(finished),
                elapsed_ms: self.clock.elapsed().as_millis(),
            },
        };
        let mut body = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::internal(e.to_string()))?;
        body.push(b'\n');
        let path = self.out.join(MANIFEST_FILE);
        fs::write(&path, body).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
    }
}
