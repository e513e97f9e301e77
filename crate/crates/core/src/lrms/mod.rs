//! Local resource management system (LRMS) queries.
//!
//! Only the GRES discovery path is modelled: ask the batch system for the
//! general resources of every node class and keep the non-null answers.

mod exec;
mod fixture;

use chrono::{DateTime, SubsecRound, Utc};
use thiserror::Error;

pub use exec::SinfoExecBackend;
pub use fixture::{ClusterFixture, ClusterTotals, FixtureError, NodeClass, NULL_GRES};

/// The only `sinfo` output template this backend understands.
pub const GRES_FORMAT: &str = "gresinfo=%G";

const GRES_KEY: &str = "gresinfo";

#[derive(Debug, Error)]
pub enum LrmsError {
    #[error("unsupported sinfo format {0:?}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    InvalidFixture(#[from] FixtureError),
    #[error("failed to run {command}")]
    Exec {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{command} exited with {status}: {stderr}")]
    ExecStatus {
        command: String,
        status: std::process::ExitStatus,
        stderr: String,
    },
}

/// Cluster-level information record handed to the information provider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSnapshot {
    pub cluster_name: String,
    /// Raw GRES expressions, one per node class with general resources.
    pub gres: Vec<String>,
    pub collected_at: DateTime<Utc>,
}

/// A batch system that can report its general resources.
pub trait LrmsBackend: Send + Sync {
    /// LRMS flavour, e.g. `"slurm"`.
    fn flavour(&self) -> &str;

    fn cluster_name(&self) -> &str;

    fn read_gres_info(&self) -> Result<Vec<String>, LrmsError>;

    fn collect_at(&self, collected_at: DateTime<Utc>) -> Result<ClusterSnapshot, LrmsError> {
        Ok(ClusterSnapshot {
            cluster_name: self.cluster_name().to_owned(),
            gres: self.read_gres_info()?,
            collected_at: collected_at.trunc_subsecs(0),
        })
    }

    fn collect(&self) -> Result<ClusterSnapshot, LrmsError> {
        self.collect_at(Utc::now())
    }
}

/// Emulates `sinfo -a -h -o <format>` over a fixture.
///
/// One line per node class in fixture order, no header.
pub fn sinfo_query(fixture: &ClusterFixture, format: &str) -> Result<Vec<String>, LrmsError> {
    if format != GRES_FORMAT {
        return Err(LrmsError::UnsupportedFormat(format.to_owned()));
    }
    Ok(fixture
        .node_classes
        .iter()
        .map(|class| format.replace("%G", &class.gres_line))
        .collect())
}

/// Pulls the value out of a `key=value` sinfo output line. The template
/// has a single key, so the value runs to the end of the line.
fn get_variable<'a>(key: &str, line: &'a str) -> Option<&'a str> {
    line.trim_end_matches(['\n', '\r'])
        .strip_prefix(key)?
        .strip_prefix('=')
}

/// Turns raw `gresinfo=%G` lines into GRES expressions.
///
/// Any line containing `(null)` is dropped before extraction; remaining
/// lines keep their order and duplicates.
pub fn extract_gres_lines<I, S>(lines: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    lines
        .into_iter()
        .filter(|line| !line.as_ref().contains(NULL_GRES))
        .filter_map(|line| get_variable(GRES_KEY, line.as_ref()).map(str::to_owned))
        .filter(|gres| !gres.is_empty())
        .collect()
}

pub fn read_gres_info(fixture: &ClusterFixture) -> Result<Vec<String>, LrmsError> {
    Ok(extract_gres_lines(sinfo_query(fixture, GRES_FORMAT)?))
}

pub fn collect_cluster_info(fixture: &ClusterFixture) -> Result<ClusterSnapshot, LrmsError> {
    SlurmFixtureBackend::new(fixture.clone())?.collect()
}

/// SLURM emulation over a validated [`ClusterFixture`].
#[derive(Debug, Clone)]
pub struct SlurmFixtureBackend {
    fixture: ClusterFixture,
}

impl SlurmFixtureBackend {
    pub fn new(fixture: ClusterFixture) -> Result<Self, LrmsError> {
        fixture.validate()?;
        Ok(Self { fixture })
    }

    pub fn fixture(&self) -> &ClusterFixture {
        &self.fixture
    }
}

impl LrmsBackend for SlurmFixtureBackend {
    fn flavour(&self) -> &str {
        "slurm"
    }

    fn cluster_name(&self) -> &str {
        &self.fixture.cluster_name
    }

    fn read_gres_info(&self) -> Result<Vec<String>, LrmsError> {
        read_gres_info(&self.fixture)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn kebnekaise() -> ClusterFixture {
        ClusterFixture::parse(
            "\
cluster_name = kebnekaise
batch|432|(null)
gpu-k80|32|gpu:k80ce:4,mps:no_consume:1,gpuexcl:no_consume:1
gpu-k80-x8|4|gpu:k80ce:8,mps:no_consume:1,gpuexcl:no_consume:1
gpu-v100|10|gpu:v100:2,mps:no_consume:1,gpuexcl:no_consume:1
knl|20|hbm:16G
knl-cache|16|hbm:0
",
            "x",
        )
        .unwrap()
    }

    fn class(gres: &str) -> NodeClass {
        NodeClass {
            partition: "p".into(),
            node_count: 1,
            gres_line: gres.into(),
        }
    }

    #[test]
    fn sinfo_lines_carry_prefix() {
        let lines = sinfo_query(&kebnekaise(), GRES_FORMAT).unwrap();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "gresinfo=(null)");
        assert_eq!(lines[1], "gresinfo=gpu:k80ce:4,mps:no_consume:1,gpuexcl:no_consume:1");
        assert_eq!(lines[5], "gresinfo=hbm:0");
    }

    #[test]
    fn unsupported_format() {
        assert!(matches!(
            sinfo_query(&kebnekaise(), "cpus=%c"),
            Err(LrmsError::UnsupportedFormat(f)) if f == "cpus=%c"
        ));
    }

    #[test]
    fn null_only_fixture() {
        let f = ClusterFixture::new("c", vec![class("(null)")]);
        assert_eq!(sinfo_query(&f, GRES_FORMAT).unwrap(), vec!["gresinfo=(null)"]);
        assert!(read_gres_info(&f).unwrap().is_empty());
        let snap = collect_cluster_info(&f).unwrap();
        assert!(snap.gres.is_empty());
    }

    #[test]
    fn reads_kebnekaise() {
        assert_eq!(
            read_gres_info(&kebnekaise()).unwrap(),
            vec![
                "gpu:k80ce:4,mps:no_consume:1,gpuexcl:no_consume:1",
                "gpu:k80ce:8,mps:no_consume:1,gpuexcl:no_consume:1",
                "gpu:v100:2,mps:no_consume:1,gpuexcl:no_consume:1",
                "hbm:16G",
                "hbm:0",
            ]
        );
    }

    #[test]
    fn duplicates_are_kept() {
        let f = ClusterFixture::new(
            "c",
            vec![class("gpu:2"), class("(null)"), class("gpu:2"), class("hbm:0"), class("gpu:2")],
        );
        let got = read_gres_info(&f).unwrap();
        let naive: Vec<&str> = f
            .node_classes
            .iter()
            .map(|c| c.gres_line.as_str())
            .filter(|g| *g != "(null)")
            .collect();
        assert_eq!(got, naive);
        assert_eq!(got.iter().filter(|g| *g == "gpu:2").count(), 3);
    }

    #[test]
    fn null_filter_is_substring_match() {
        let lines = ["gresinfo=gpu:2", "gresinfo=x(null)y:1", "gresinfo=(null)"];
        assert_eq!(extract_gres_lines(lines), vec!["gpu:2"]);
    }

    #[test]
    fn get_variable_strips_key() {
        assert_eq!(get_variable("gresinfo", "gresinfo=gpu:2\r\n"), Some("gpu:2"));
        assert_eq!(get_variable("gresinfo", "gresinfo=a b=c"), Some("a b=c"));
        assert_eq!(get_variable("gresinfo", "gresinfo"), None);
        assert_eq!(get_variable("gresinfo", "cpus=4"), None);
    }

    #[test]
    fn collect_snapshot() {
        let at = DateTime::parse_from_rfc3339("2019-06-01T12:00:00.750Z").unwrap().to_utc();
        let backend = SlurmFixtureBackend::new(kebnekaise()).unwrap();
        let snap = backend.collect_at(at).unwrap();
        assert_eq!(snap.cluster_name, "kebnekaise");
        assert_eq!(snap.gres.len(), 5);
        assert_eq!(snap.collected_at.timestamp_subsec_nanos(), 0);
        assert_eq!(backend.flavour(), "slurm");
    }

    #[test]
    fn malformed_fixture_is_rejected() {
        let f = ClusterFixture::new("c", vec![class("gpu:a:b:c:1")]);
        assert!(matches!(collect_cluster_info(&f), Err(LrmsError::InvalidFixture(_))));
    }
}
