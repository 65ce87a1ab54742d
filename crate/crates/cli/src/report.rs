//! Checks, the job report and artifact emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// One pass/fail line, always backed by the measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub module: String,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64, module: &str) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold, module: module.into() }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64, module: &str) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold, module: module.into() }
    }

    /// Passes when `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64, module: &str) -> Self {
        Self { name: name.into(), value, threshold, pass: value < threshold, module: module.into() }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: &str, value: f64, threshold: f64, module: &str) -> Self {
        Self { name: name.into(), value, threshold, pass: value > threshold, module: module.into() }
    }
}

/// A file produced by a job, held in memory until emission.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serialization");
        bytes.push(b'\n');
        Self::new(name, bytes)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct JobReport {
    pub config: Value,
    pub checks: Vec<Check>,
    /// Norms and certificates worth keeping next to the checks.
    pub results: Value,
    pub artifacts: Vec<Artifact>,
    pub wall_seconds: f64,
    /// Set when the job stopped on an error.
    pub error: Option<String>,
}

impl JobReport {
    pub fn all_pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifacts: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// On-disk form of the report.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub timing: Timing,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub results: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path.display(), e))
}

/// Writes the artifacts, `manifest.json` when there are any, and `report.json`.
/// Returns the paths written, report last.
pub fn emit_report(rep: &JobReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut written = Vec::new();
    let mut listed = Vec::new();
    for a in &rep.artifacts {
        let path = dir.join(&a.name);
        write(&path, &a.bytes)?;
        written.push(path);
        listed.push(a.name.clone());
    }
    if !rep.artifacts.is_empty() {
        let manifest = Manifest {
            artifacts: rep
                .artifacts
                .iter()
                .map(|a| ManifestEntry { file: a.name.clone(), sha256: sha256_hex(&a.bytes), bytes: a.bytes.len() })
                .collect(),
        };
        let m = Artifact::json("manifest.json", &manifest);
        let path = dir.join(&m.name);
        write(&path, &m.bytes)?;
        written.push(path);
        listed.push(m.name);
    }
    let file = ReportFile {
        config: rep.config.clone(),
        checks: rep.checks.clone(),
        artifacts: listed,
        timing: Timing { wall_seconds: rep.wall_seconds },
        results: rep.results.clone(),
        error: rep.error.clone(),
    };
    let r = Artifact::json("report.json", &file);
    let path = dir.join(&r.name);
    write(&path, &r.bytes)?;
    written.push(path);
    Ok(written)
}
