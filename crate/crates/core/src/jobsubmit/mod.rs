//! Job submission: XRSL parsing, runtime-environment expansion, batch script
//! generation and GRES matchmaking.

mod matchmaking;
mod rte;
mod script;
mod spool;
mod xrsl;

use thiserror::Error;

pub use matchmaking::{match_target, requested_gres};
pub use rte::{RteError, RteManifest, RteRegistry, RTE_EXTENSION};
pub use script::{generate_submit_script, SubmitScript, DIRECTIVE_PREFIX};
pub use spool::{Spool, SpooledJob, SCRIPT_EXTENSION};
pub use xrsl::{parse_xrsl, parse_xrsl_with_warnings, XrslError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobDescription {
    pub executable: String,
    pub arguments: Vec<String>,
    pub job_name: Option<String>,
    /// Requested task count, at least 1.
    pub count: u32,
    pub runtime_environments: Vec<String>,
    pub stdout_name: Option<String>,
    pub stderr_name: Option<String>,
}

impl JobDescription {
    pub fn new(executable: impl Into<String>) -> Self {
        Self {
            executable: executable.into(),
            arguments: Vec::new(),
            job_name: None,
            count: 1,
            runtime_environments: Vec::new(),
            stdout_name: None,
            stderr_name: None,
        }
    }
}

/// A job description plus the node properties its runtime environments
/// contributed, in the order they were applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobOptions {
    pub base: JobDescription,
    pub node_properties: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubmitError {
    #[error("unknown runtime environment {0:?}")]
    UnknownRte(String),
}

/// Applies the job's runtime environments in request order, appending each
/// manifest's node properties. Duplicates across manifests are kept.
pub fn apply_rtes(job: &JobDescription, registry: &RteRegistry) -> Result<JobOptions, SubmitError> {
    let mut node_properties = Vec::new();
    for name in &job.runtime_environments {
        let manifest = registry
            .get(name)
            .ok_or_else(|| SubmitError::UnknownRte(name.clone()))?;
        node_properties.extend(manifest.node_properties.iter().cloned());
    }
    Ok(JobOptions {
        base: job.clone(),
        node_properties,
    })
}
