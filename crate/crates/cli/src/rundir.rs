//! Run directories are filled in a staging directory and renamed into place
//! once every file and the manifest have been written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const OUT_ROOT_ENV: &str = "HOSTILITY_OUT_ROOT";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    command: &'a str,
    tool_version: &'a str,
    seed: u64,
    config: &'a RunConfig,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

/// Default location: `$HOSTILITY_OUT_ROOT/<command>-<config digest>`, with
/// `runs` as the root when the variable is unset.
pub fn default_out(command: &str, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    let digest = sha256_hex(serde_json::to_string(cfg)?.as_bytes());
    Ok(root.join(format!("{command}-{}", &digest[..12])))
}

pub struct RunDir {
    target: PathBuf,
    staging: PathBuf,
    files: Vec<String>,
    inputs: Vec<(PathBuf, String)>,
}

impl RunDir {
    pub fn create(target: PathBuf) -> Result<Self, CliError> {
        if target.exists() && !target.join(MANIFEST).exists() {
            let non_empty = fs::read_dir(&target).map(|mut d| d.next().is_some()).unwrap_or(true);
            if non_empty {
                return Err(CliError::Config(format!(
                    "output directory {} exists and is not a run directory",
                    target.display()
                )));
            }
        }
        let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        let parent = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(parent)?;
        let staging = parent.join(format!(".{name}.staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        Ok(RunDir { target, staging, files: Vec::new(), inputs: Vec::new() })
    }

    pub fn staging(&self) -> &Path {
        &self.staging
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.staging.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Registers a file written directly into the staging directory.
    pub fn track(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let digest = file_digest(path)?;
        self.inputs.push((path.to_path_buf(), digest));
        Ok(())
    }

    /// Writes the manifest and moves the staged directory into place,
    /// replacing a previous run at the same location.
    pub fn finish(mut self, command: &str, cfg: &RunConfig) -> Result<PathBuf, CliError> {
        self.files.sort();
        self.files.dedup();
        let outputs = self
            .files
            .iter()
            .map(|f| Ok(FileDigest { path: f.clone(), sha256: file_digest(&self.staging.join(f))? }))
            .collect::<Result<Vec<_>, CliError>>()?;
        let inputs = self
            .inputs
            .iter()
            .map(|(p, d)| FileDigest { path: p.display().to_string(), sha256: d.clone() })
            .collect();
        let manifest = Manifest {
            manifest_version: 1,
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            config: cfg,
            inputs,
            outputs,
        };
        fs::write(self.staging.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
        if self.target.exists() {
            fs::remove_dir_all(&self.target)?;
        }
        fs::rename(&self.staging, &self.target)?;
        Ok(self.target.clone())
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        if self.staging.exists() {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
