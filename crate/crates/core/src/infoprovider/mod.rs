//! GLUE2 computing-service records, their XML rendering and the HTTP info
//! endpoint.
//!
//! Only the element spine leading to `GeneralResources` is produced:
//!
//! ```text
//! InfoRoot/Domains/AdminDomain/Services/ComputingService/ComputingManager/GeneralResources/Resource
//! ```

mod config;
mod server;
pub mod xml;

use thiserror::Error;

use crate::lrms::ClusterSnapshot;

pub use config::{ConfigError, SiteConfig};
pub use server::{serve_info, EndpointConfig, InfoServer, RecordSource, ServeError, SourceError, PipelineSource};
use xml::XmlWriter;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error("bad site configuration: {0}")]
    BadConfig(String),
    #[error("invalid general resource {0:?}")]
    InvalidResource(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComputingManagerRecord {
    /// LRMS flavour label, e.g. `slurm`.
    pub manager_name: String,
    pub general_resources: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComputingServiceRecord {
    pub admin_domain: String,
    pub service_id: String,
    pub manager: ComputingManagerRecord,
}

impl ComputingServiceRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.service_id.is_empty() {
            return Err(RecordError::BadConfig("service_id is empty".into()));
        }
        if let Some(bad) = self
            .manager
            .general_resources
            .iter()
            .find(|r| r.is_empty() || r.chars().any(xml::is_xml_forbidden))
        {
            return Err(RecordError::InvalidResource(bad.clone()));
        }
        Ok(())
    }
}

/// Wraps a cluster snapshot into a computing service. The manager's general
/// resources are the snapshot's GRES strings, unchanged and in order.
pub fn build_computing_service(
    snapshot: &ClusterSnapshot,
    site: &SiteConfig,
) -> Result<ComputingServiceRecord, RecordError> {
    let required = |key: &str, value: &Option<String>| match value.as_deref() {
        Some(v) if !v.is_empty() => Ok(v.to_owned()),
        _ => Err(RecordError::BadConfig(format!("missing required key {key}"))),
    };
    let record = ComputingServiceRecord {
        admin_domain: required("admin_domain", &site.admin_domain)?,
        service_id: required("service_id", &site.service_id)?,
        manager: ComputingManagerRecord {
            manager_name: required("manager_name", &site.manager_name)?,
            general_resources: snapshot.gres.clone(),
        },
    };
    record.validate()?;
    Ok(record)
}

pub fn render_glue2_xml(record: &ComputingServiceRecord) -> String {
    let mut w = XmlWriter::new();
    w.begin("InfoRoot", &[]);
    w.begin("Domains", &[]);
    w.begin("AdminDomain", &[("id", &record.admin_domain)]);
    w.begin("Services", &[]);
    w.begin("ComputingService", &[("id", &record.service_id)]);
    w.begin("ComputingManager", &[("id", &record.manager.manager_name)]);
    let resources = &record.manager.general_resources;
    if resources.is_empty() {
        w.empty("GeneralResources", &[]);
    } else {
        w.begin("GeneralResources", &[]);
        w.properties("Resource", resources.iter().map(String::as_str));
        w.end("GeneralResources");
    }
    w.end("ComputingManager");
    w.end("ComputingService");
    w.end("Services");
    w.end("AdminDomain");
    w.end("Domains");
    w.end("InfoRoot");
    w.finish()
}
