//! Output directories: every file written through [`OutputDir`] is listed in
//! the manifest with its SHA-256.

use std::fs;
use std::path::{Path, PathBuf};

use annulus_core::StepDiagnostics;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::failure::{Class, Classify, Failure, Outcome};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub counters: StepDiagnostics,
    pub vacuum_contaminated: bool,
    pub dt_min: f64,
    pub dt_max: f64,
    pub snapshots: Vec<SnapshotRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Hash of the configuration and its tables, or of the input manifest.
    pub input_sha256: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_manifest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub files: Vec<FileRecord>,
}

impl Manifest {
    pub fn new(subcommand: &str, input_sha256: String, seed: u64, config: ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            input_sha256,
            seed,
            config,
            source_manifest: None,
            run: None,
            wall_time_s: None,
            files: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> Outcome<Self> {
        let bytes = fs::read(path).class_with(Class::Io, || format!("reading {}", path.display()))?;
        serde_json::from_slice(&bytes).class_with(Class::Io, || format!("parsing {}", path.display()))
    }

    /// Recomputes every listed checksum relative to `dir`.
    pub fn check_files(&self, dir: &Path) -> Outcome<()> {
        for f in &self.files {
            let p = dir.join(&f.path);
            let got = sha256_file(&p)?;
            if got != f.sha256 {
                return Err(Failure::msg(
                    Class::Io,
                    format!(
                        "checksum mismatch for {}: manifest {}, file {got}",
                        p.display(),
                        f.sha256
                    ),
                ));
            }
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Outcome<String> {
    let bytes = fs::read(path).class_with(Class::Io, || format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Single writer for one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Outcome<Self> {
        fs::create_dir_all(root).class_with(Class::Io, || format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Absolute path of `rel`, creating its parent directory.
    pub fn path(&self, rel: &str) -> Outcome<PathBuf> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).class_with(Class::Io, || format!("creating {}", parent.display()))?;
        }
        Ok(p)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Outcome<()> {
        let p = self.path(rel)?;
        fs::write(&p, bytes).class_with(Class::Io, || format!("writing {}", p.display()))?;
        self.files.push(FileRecord {
            path: rel.into(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Outcome<()> {
        let mut text = serde_json::to_string_pretty(value).class(Class::Io)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Records a file that another routine wrote under the root.
    pub fn adopt(&mut self, rel: &str) -> Outcome<()> {
        let sha256 = sha256_file(&self.root.join(rel))?;
        self.files.push(FileRecord {
            path: rel.into(),
            sha256,
        });
        Ok(())
    }

    /// Writes the manifest with the file list and returns its path.
    pub fn finish(self, mut manifest: Manifest) -> Outcome<PathBuf> {
        manifest.files = self.files;
        let path = self.root.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest).class(Class::Io)?;
        text.push('\n');
        fs::write(&path, text).class_with(Class::Io, || format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// CSV text with a header row; floats use the shortest round-trip format.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).class(Class::Io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).class(Class::Io)?;
    }
    w.into_inner().map_err(|e| Failure::msg(Class::Io, e))
}
