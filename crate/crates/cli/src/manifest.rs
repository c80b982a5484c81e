//! Work-directory bookkeeping: content hashes, the stage manifest and the
//! pipeline lock.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::stage::artifact;

pub const MANIFEST_VERSION: u32 = 1;

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_hash: String,
    /// Input name (artifact file name, or `corpus`) to content hash.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to content hash.
    pub outputs: BTreeMap<String, String>,
    pub duration_secs: f64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            version: MANIFEST_VERSION,
            stages: BTreeMap::new(),
        }
    }
}

impl Manifest {
    pub fn load(work_dir: &Path) -> Result<Self, CliError> {
        let path = work_dir.join(artifact::MANIFEST);
        match fs::read(&path) {
            Ok(bytes) => {
                let m: Manifest = serde_json::from_slice(&bytes)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
                if m.version != MANIFEST_VERSION {
                    return Err(CliError::Validation(format!(
                        "{}: manifest version {} is not supported",
                        path.display(),
                        m.version
                    )));
                }
                Ok(m)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, work_dir: &Path) -> io::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(&work_dir.join(artifact::MANIFEST), &bytes)
    }

    pub fn get(&self, stage: &str) -> Option<&StageRecord> {
        self.stages.get(stage)
    }

    /// Records (or replaces) the entry for `stage`.
    pub fn record(&mut self, stage: &str, rec: StageRecord) {
        self.stages.insert(stage.to_owned(), rec);
    }

    /// Hash of `name` as recorded by whichever stage wrote it.
    pub fn output_hash(&self, name: &str) -> Option<&str> {
        self.stages
            .values()
            .find_map(|r| r.outputs.get(name))
            .map(String::as_str)
    }
}

/// Outputs of `rec` whose current content differs from the recorded hash.
pub fn changed_outputs(work_dir: &Path, rec: &StageRecord) -> Vec<String> {
    rec.outputs
        .iter()
        .filter(|(name, hash)| sha256_file(&work_dir.join(name)).ok().as_deref() != Some(hash.as_str()))
        .map(|(name, _)| name.clone())
        .collect()
}

/// Exclusive hold on a work directory, released on drop.
#[derive(Debug)]
pub struct PipelineLock {
    path: PathBuf,
}

impl PipelineLock {
    pub fn acquire(work_dir: &Path) -> Result<Self, CliError> {
        let path = work_dir.join(artifact::LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(CliError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for PipelineLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
