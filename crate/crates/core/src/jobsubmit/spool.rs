use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

use super::SubmitScript;

pub const SCRIPT_EXTENSION: &str = "sbatch";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpooledJob {
    pub job_id: String,
    pub path: PathBuf,
}

/// Directory that receives generated batch scripts as `<jobid>.sbatch`.
#[derive(Debug, Clone)]
pub struct Spool {
    dir: PathBuf,
}

impl Spool {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes the script under a fresh job id.
    ///
    /// Ids are `<UTC timestamp>-<content hash>`, with a numeric suffix when
    /// that file already exists, so identical inputs and clock give
    /// identical ids in an empty spool.
    pub fn submit(&self, script: &SubmitScript, submitted_at: DateTime<Utc>) -> io::Result<SpooledJob> {
        fs::create_dir_all(&self.dir)?;
        let body = script.render();
        let digest = Sha256::digest(body.as_bytes());
        let base = format!(
            "{}-{}",
            submitted_at.format("%Y%m%dT%H%M%SZ"),
            hex8(&digest)
        );
        for attempt in 0u32.. {
            let job_id = match attempt {
                0 => base.clone(),
                n => format!("{base}-{n}"),
            };
            let path = self.dir.join(format!("{job_id}.{SCRIPT_EXTENSION}"));
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut file) => {
                    file.write_all(body.as_bytes())?;
                    return Ok(SpooledJob { job_id, path });
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e),
            }
        }
        unreachable!("job id space exhausted")
    }
}

fn hex8(bytes: &[u8]) -> String {
    bytes.iter().take(4).map(|b| format!("{b:02x}")).collect()
}
