//! Staged output directories and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RUN_MANIFEST_FILE: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the configuration bytes the run consumed.
    pub config_digest: String,
    pub seed: Option<u64>,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
    pub tool_version: String,
    pub duration_secs: f64,
}

/// An output directory that only appears once the run has finished.
///
/// Files are written into a hidden sibling directory which is renamed onto
/// the final path by [`Staging::commit`]. Dropping an uncommitted staging
/// area removes it.
pub struct Staging {
    target: PathBuf,
    dir: PathBuf,
    artifacts: Vec<String>,
    started: Instant,
    force: bool,
    committed: bool,
}

impl Staging {
    /// Claims `target`, failing if it already exists and `force` is off.
    pub fn new(target: &Path, force: bool) -> Result<Staging> {
        if target.exists() && !force {
            return Err(Error::config(format!(
                "{} already exists; pass --force to overwrite",
                target.display()
            )));
        }
        let name = target
            .file_name()
            .ok_or_else(|| Error::config(format!("{} is not a usable output path", target.display())))?
            .to_string_lossy()
            .into_owned();
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
        let dir = parent.join(format!(".{name}.staging-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Staging { target: target.to_path_buf(), dir, artifacts: Vec::new(), started: Instant::now(), force, committed: false })
    }

    /// Directory to write into.
    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn join(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Writes `contents` to `rel` and records it as an artifact.
    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.record(rel);
        Ok(())
    }

    /// Records a file written by other means.
    pub fn record(&mut self, rel: &str) {
        self.artifacts.push(rel.replace('\\', "/"));
    }

    /// Writes `run.json` and moves the staged directory into place.
    pub fn commit(mut self, command: &str, config_digest: String, seed: Option<u64>) -> Result<RunManifest> {
        self.artifacts.sort();
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest,
            seed,
            artifacts: self.artifacts.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.dir.join(RUN_MANIFEST_FILE);
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;

        if self.target.exists() {
            if !self.force {
                return Err(Error::config(format!(
                    "{} appeared during the run; pass --force to overwrite",
                    self.target.display()
                )));
            }
            let removed = if self.target.is_dir() { fs::remove_dir_all(&self.target) } else { fs::remove_file(&self.target) };
            removed.map_err(|e| Error::io(&self.target, e))?;
        }
        fs::rename(&self.dir, &self.target).map_err(|e| Error::io(&self.target, e))?;
        self.committed = true;
        Ok(manifest)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}
