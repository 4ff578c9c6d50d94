//! Run directories, parameter hashes, CSV files and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// First 12 hex digits of the SHA-256 of the canonical JSON parameters.
pub fn parameter_hash(params: &Value) -> String {
    let digest = Sha256::digest(params.to_string().as_bytes());
    hex::encode(&digest[..6])
}

pub struct Run {
    pub command: &'static str,
    pub dir: PathBuf,
    pub hash: String,
    params: Value,
    started: Instant,
    started_unix: f64,
    outputs: Vec<String>,
    seeds: Vec<u64>,
    counters: Vec<Value>,
}

impl Run {
    /// Create `<root>/<command>-<hash>`; `params` must exclude anything that
    /// does not affect the numbers (output root, worker count).
    pub fn create(root: &Path, command: &'static str, params: Value) -> Result<Self> {
        let hash = parameter_hash(&json!({ "command": command, "params": params }));
        let dir = root.join(format!("{command}-{hash}"));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Ok(Self {
            command,
            dir,
            hash,
            params,
            started: Instant::now(),
            started_unix,
            outputs: Vec::new(),
            seeds: Vec::new(),
            counters: Vec::new(),
        })
    }

    /// `<command>_<hash><suffix>` inside the run directory.
    pub fn file(&mut self, suffix: &str) -> PathBuf {
        let name = format!("{}_{}{}", self.command.replace('-', "_"), self.hash, suffix);
        self.outputs.push(name.clone());
        self.dir.join(name)
    }

    pub fn write_csv<R: Serialize>(&mut self, suffix: &str, rows: &[R]) -> Result<PathBuf> {
        let path = self.file(suffix);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn write_json(&mut self, suffix: &str, value: &Value) -> Result<PathBuf> {
        let path = self.file(suffix);
        std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(path)
    }

    pub fn record_seeds(&mut self, seeds: Vec<u64>) {
        self.seeds = seeds;
    }

    pub fn record_counters(&mut self, counters: Value) {
        self.counters.push(counters);
    }

    /// Write `manifest.json` and return its path.
    pub fn finish(self, master_seed: u64, threads: usize) -> Result<PathBuf> {
        let manifest = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "parameter_hash": self.hash,
            "config": self.params,
            "master_seed": master_seed,
            "realization_seeds": self.seeds,
            "threads": threads,
            "started_unix": self.started_unix,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "counters": self.counters,
            "outputs": self.outputs,
        });
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}
