//! Deterministic file output: CSV tables, run manifests, hashing.
//!
//! Every float is printed with 12 significant digits in scientific
//! notation, so reruns and thread-count changes diff clean. The manifest
//! is the one file that is not byte-stable across runs: it records the
//! wall clock.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// 12 significant digits, locale-free; negative zero normalized.
pub fn sig(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// One CSV cell from an optional value; absent prints empty.
pub fn sig_opt(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

/// Commas and newlines would break the row structure; status messages get
/// them replaced.
pub fn sanitize(msg: &str) -> String {
    msg.replace(['\n', '\r'], " ").replace(',', ";")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            header: columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Record of one CLI invocation, written next to its outputs.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 over the canonical serialization of every numeric input.
    pub config_sha256: String,
    /// The parameter grid the command swept, in evaluation order.
    pub grid: Vec<f64>,
    /// Files this run wrote, relative to the out dir unless absolute.
    pub outputs: Vec<String>,
    pub per_point_status: Vec<String>,
    /// Elapsed time; the only field that varies between identical runs.
    pub wall_clock_ms: u64,
}

/// Manifest entry for a written file: relative to the out dir when
/// inside it, so the manifest does not depend on where the run pointed.
pub fn manifest_entry(out_dir: &Path, path: &Path) -> String {
    match path.strip_prefix(out_dir) {
        Ok(rel) => rel.display().to_string(),
        Err(_) => path.display().to_string(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Canonical hash of any serializable input bundle.
pub fn hash_inputs<T: Serialize>(inputs: &T) -> String {
    let text = serde_json::to_string(inputs).expect("inputs serialize");
    sha256_hex(text.as_bytes())
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, text)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(dir, name, &text)
}
