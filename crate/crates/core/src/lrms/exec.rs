use std::path::PathBuf;
use std::process::Command;

use parking_lot::Mutex;

use super::{extract_gres_lines, LrmsBackend, LrmsError, GRES_FORMAT};

/// Queries a real SLURM installation by running
/// `sinfo -a -h -o "gresinfo=%G"`.
#[derive(Debug)]
pub struct SinfoExecBackend {
    cluster_name: String,
    sinfo: PathBuf,
    // one sinfo process at a time
    lock: Mutex<()>,
}

impl SinfoExecBackend {
    /// `sinfo` is the path to the binary, or just `"sinfo"` to search `PATH`.
    pub fn new(cluster_name: impl Into<String>, sinfo: impl Into<PathBuf>) -> Self {
        Self {
            cluster_name: cluster_name.into(),
            sinfo: sinfo.into(),
            lock: Mutex::new(()),
        }
    }

    fn command_line(&self) -> String {
        format!("{} -a -h -o \"{GRES_FORMAT}\"", self.sinfo.display())
    }
}

impl LrmsBackend for SinfoExecBackend {
    fn flavour(&self) -> &str {
        "slurm"
    }

    fn cluster_name(&self) -> &str {
        &self.cluster_name
    }

    fn read_gres_info(&self) -> Result<Vec<String>, LrmsError> {
        let output = {
            let _guard = self.lock.lock();
            Command::new(&self.sinfo)
                .args(["-a", "-h", "-o", GRES_FORMAT])
                .output()
                .map_err(|source| LrmsError::Exec {
                    command: self.command_line(),
                    source,
                })?
        };
        if !output.status.success() {
            return Err(LrmsError::ExecStatus {
                command: self.command_line(),
                status: output.status,
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
            });
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        Ok(extract_gres_lines(stdout.lines()))
    }
}

#[cfg(all(test, unix))]
mod tests {
    use std::fs;
    use std::os::unix::fs::PermissionsExt;

    use super::*;

    fn fake_sinfo(dir: &tempfile::TempDir, body: &str) -> PathBuf {
        let path = dir.path().join("sinfo");
        fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    #[test]
    fn runs_sinfo_with_expected_arguments() {
        let dir = tempfile::tempdir().unwrap();
        let sinfo = fake_sinfo(
            &dir,
            r#"[ "$*" = "-a -h -o gresinfo=%G" ] || { echo "bad args: $*" >&2; exit 9; }
printf 'gresinfo=(null)\ngresinfo=gpu:v100:2\ngresinfo=hbm:16G\n'"#,
        );
        let backend = SinfoExecBackend::new("test", sinfo);
        assert_eq!(backend.read_gres_info().unwrap(), vec!["gpu:v100:2", "hbm:16G"]);
        assert_eq!(backend.collect().unwrap().cluster_name, "test");
    }

    #[test]
    fn nonzero_exit_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let sinfo = fake_sinfo(&dir, "echo 'slurm_load_partitions: down' >&2; exit 1");
        let err = SinfoExecBackend::new("test", sinfo).read_gres_info().unwrap_err();
        assert!(matches!(err, LrmsError::ExecStatus { ref stderr, .. } if stderr.contains("down")));
    }

    #[test]
    fn missing_binary() {
        let err = SinfoExecBackend::new("t", "/nonexistent/sinfo").read_gres_info().unwrap_err();
        assert!(matches!(err, LrmsError::Exec { .. }));
    }
}
