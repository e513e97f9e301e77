//! Line-oriented cluster fixture files.
//!
//! ```text
//! # comment
//! cluster_name = kebnekaise
//! total_nodes = 602
//! batch|432|(null)
//! gpu-k80|32|gpu:k80ce:4,mps:no_consume:1,gpuexcl:no_consume:1
//! ```
//!
//! Records are `partition|node_count|gres_line`. Lines without a `|` are
//! `key = value` metadata (`cluster_name`, `total_nodes`, `total_cpus`).

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::infoprovider::xml::is_xml_forbidden;
use crate::gres::parse_gres_expression;

/// Literal `sinfo` prints for a node class without general resources.
pub const NULL_GRES: &str = "(null)";

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid fixture: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeClass {
    pub partition: String,
    pub node_count: u32,
    /// GRES expression, or [`NULL_GRES`].
    pub gres_line: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClusterTotals {
    pub total_nodes: Option<u64>,
    pub total_cpus: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterFixture {
    pub cluster_name: String,
    pub node_classes: Vec<NodeClass>,
    pub totals: ClusterTotals,
}

impl ClusterFixture {
    pub fn new(cluster_name: impl Into<String>, node_classes: Vec<NodeClass>) -> Self {
        Self {
            cluster_name: cluster_name.into(),
            node_classes,
            totals: ClusterTotals::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FixtureError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| FixtureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let default_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&text, &default_name)
    }

    /// Parses fixture text. `default_name` is used when the file has no
    /// `cluster_name` line.
    ///
    /// Only the syntax is checked here; see [`ClusterFixture::validate`].
    pub fn parse(text: &str, default_name: &str) -> Result<Self, FixtureError> {
        let mut fixture = Self::new(default_name, Vec::new());
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| FixtureError::Syntax {
                line: line_no,
                message,
            };
            if line.contains('|') {
                let fields: Vec<&str> = line.splitn(3, '|').map(str::trim).collect();
                let [partition, count, gres] = fields[..] else {
                    return Err(syntax("expected partition|node_count|gres_line".into()));
                };
                let node_count = count
                    .parse()
                    .map_err(|_| syntax(format!("bad node count {count:?}")))?;
                fixture.node_classes.push(NodeClass {
                    partition: partition.to_owned(),
                    node_count,
                    gres_line: gres.to_owned(),
                });
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(syntax(format!("unrecognised line {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            let number = || {
                value
                    .parse::<u64>()
                    .map_err(|_| syntax(format!("{key} must be an integer")))
            };
            match key {
                "cluster_name" => fixture.cluster_name = value.to_owned(),
                "total_nodes" => fixture.totals.total_nodes = Some(number()?),
                "total_cpus" => fixture.totals.total_cpus = Some(number()?),
                _ => return Err(syntax(format!("unknown key {key:?}"))),
            }
        }
        Ok(fixture)
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        if self.node_classes.is_empty() {
            return Err(FixtureError::Invalid("no node classes".into()));
        }
        for class in &self.node_classes {
            let ctx = |msg: String| {
                FixtureError::Invalid(format!("partition {:?}: {msg}", class.partition))
            };
            if class.node_count == 0 {
                return Err(ctx("node_count must be positive".into()));
            }
            if class.gres_line.contains(['\n', '\r']) || class.gres_line.chars().any(is_xml_forbidden) {
                return Err(ctx("gres_line contains control characters".into()));
            }
            if class.gres_line.is_empty() {
                return Err(ctx(format!("empty gres_line (use {NULL_GRES})")));
            }
            if class.gres_line != NULL_GRES {
                parse_gres_expression(&class.gres_line)
                    .map_err(|e| ctx(format!("gres_line {:?}: {e}", class.gres_line)))?;
            }
        }
        Ok(())
    }
}
