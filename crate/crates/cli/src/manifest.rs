//! Run manifests and output bookkeeping.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use approxconvex::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub approxconvex: &'static str,
    pub rustc_target: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Command-line arguments after the program name; replaying them
    /// (with another `--out`) reproduces every output but this manifest.
    pub arguments: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub timings: Timings,
    pub outputs: Vec<PathBuf>,
    pub verifications: Vec<Check>,
    pub passed: bool,
}

/// Collects outputs and checks for one command.
pub struct Run {
    command: String,
    parameters: serde_json::Value,
    seed: Option<u64>,
    out_dir: PathBuf,
    started: Instant,
    outputs: Vec<PathBuf>,
    checks: Vec<Check>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Parameter(format!("cannot write {}: {e}", path.display()))
}

impl Run {
    pub fn new(command: &str, parameters: serde_json::Value, seed: Option<u64>, out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
        Ok(Run {
            command: command.to_string(),
            parameters,
            seed,
            out_dir: out_dir.to_path_buf(),
            started: Instant::now(),
            outputs: Vec::new(),
            checks: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.outputs.push(path);
        Ok(())
    }

    /// Writes through a closure that renders into a buffer.
    pub fn write_with(&mut self, name: &str, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    /// Writes `manifest.json` and returns the failed checks.
    pub fn finish(mut self) -> Result<Vec<Check>> {
        let failed: Vec<Check> = self.checks.iter().filter(|c| !c.passed).cloned().collect();
        let manifest_path = self.out_dir.join("manifest.json");
        let mut outputs = std::mem::take(&mut self.outputs);
        outputs.push(manifest_path);
        let manifest = RunManifest {
            command: self.command,
            arguments: std::env::args().skip(1).collect(),
            parameters: self.parameters,
            seed: self.seed,
            versions: Versions {
                approxconvex: env!("CARGO_PKG_VERSION"),
                rustc_target: std::env::consts::ARCH,
            },
            timings: Timings {
                total_seconds: self.started.elapsed().as_secs_f64(),
            },
            outputs,
            passed: failed.is_empty(),
            verifications: self.checks,
        };
        let path = self.out_dir.join("manifest.json");
        let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        s.push('\n');
        fs::write(&path, s).map_err(|e| io_err(&path, e))?;
        Ok(failed)
    }
}
