//! Atomic report writing and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Writes `bytes` to `path` via a temp file and rename, so readers never see
/// a partial report.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .with_context(|| format!("creating temp file next to {}", path.display()))?;
    tmp.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
    bytes: u64,
}

/// Provenance record written next to every command's outputs. Contains no
/// wall-clock data, so reruns with identical inputs are byte-identical.
#[derive(Debug, Serialize)]
pub struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    seed: Option<u64>,
    params: serde_json::Value,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        Manifest {
            tool: "semlens",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            params,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let (sha256, bytes) = sha256_path(path)?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
            bytes,
        });
        Ok(())
    }

    pub fn add_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Digest list for embedding into report sidecars.
    pub fn input_digests(&self) -> serde_json::Value {
        serde_json::json!(self
            .inputs
            .iter()
            .map(|i| serde_json::json!({ "path": i.path, "sha256": i.sha256 }))
            .collect::<Vec<_>>())
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Serializes to `<dir>/manifest.json`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        atomic_write(&path, &bytes)?;
        Ok(path)
    }
}

/// SHA-256 of a file, or of a directory's files (each hashed, then the
/// name+hash list hashed, names sorted).
pub fn sha256_path(path: &Path) -> Result<(String, u64)> {
    let meta = fs::metadata(path).with_context(|| format!("stat {}", path.display()))?;
    if meta.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        let mut outer = Sha256::new();
        let mut total = 0u64;
        for entry in entries {
            let (digest, bytes) = sha256_path(&entry)?;
            let name = entry
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            outer.update(name.as_bytes());
            outer.update(b"\0");
            outer.update(digest.as_bytes());
            total += bytes;
        }
        Ok((hex(&outer.finalize()), total))
    } else {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        Ok((hex(&hasher.finalize()), bytes.len() as u64))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Renders a CSV-producing writer into a buffer and writes it atomically,
/// registering the file name in the manifest.
pub fn emit<F>(dir: &Path, name: &str, manifest: &mut Manifest, render: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    render(&mut buf)?;
    atomic_write(&dir.join(name), &buf)?;
    manifest.add_output(name);
    Ok(())
}

/// Serializes a value as pretty JSON and writes it atomically.
pub fn emit_json<T: Serialize>(
    dir: &Path,
    name: &str,
    manifest: &mut Manifest,
    value: &T,
) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(&dir.join(name), &bytes)?;
    manifest.add_output(name);
    Ok(())
}
