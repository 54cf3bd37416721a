//! File emission: atomic writes, CSV formatting and run manifests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::jobs::RunConfig;
use super::CliError;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Failure(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Hex SHA-256 of the canonical JSON encoding of a resolved configuration.
pub fn digest(config: &RunConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Comment-prefixed metadata block shared by all CSV outputs.
pub fn csv_header(kind: &str, config: &RunConfig, extra: &[(String, String)]) -> String {
    let mut s = format!("# {kind}\n# tool: {TOOL} {VERSION}\n# config_digest: {}\n", digest(config));
    for (k, v) in extra {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_digest: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
    pub files: Vec<String>,
    pub config: RunConfig,
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

pub fn write_manifest(dir: &Path, config: &RunConfig, files: &[PathBuf]) -> Result<PathBuf, CliError> {
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        config_digest: digest(config),
        timestamp: timestamp(),
        files: files
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).to_string_lossy().into_owned())
            .collect(),
        config: config.clone(),
    };
    let path = dir.join("manifest.json");
    write_atomic(&path, &json(&manifest)?)?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Failure(format!("{}: not a run manifest: {e}", path.display())))?;
    if manifest.tool != TOOL {
        return Err(CliError::Failure(format!("manifest was written by {:?}, not {TOOL}", manifest.tool)));
    }
    Ok(manifest)
}
