//! Client side of the info endpoint: fetch the GLUE2 document, turn it back
//! into computing-service records and print them the way `arcinfo` does.

use std::fmt::Write as _;
use std::time::Duration;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::infoprovider::{ComputingManagerRecord, ComputingServiceRecord};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed XML")]
    MalformedXml(#[from] roxmltree::Error),
    #[error("document contains no ComputingService element")]
    NoServices,
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("unsupported URL {0:?} (expected http://)")]
    InvalidUrl(String),
    #[error("cannot reach {url}")]
    Unreachable {
        url: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("{url} answered HTTP {status}")]
    BadStatus { url: String, status: u16 },
    #[error("{url} returned content type {content_type:?}, expected XML")]
    BadContentType { url: String, content_type: String },
    #[error("reading response from {url}")]
    Transport {
        url: String,
        #[source]
        source: reqwest::Error,
    },
}

fn child<'a, 'input>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    node.children()
        .find(|n| n.is_element() && n.tag_name().name() == name)
}

fn children<'a, 'input: 'a>(
    node: Node<'a, 'input>,
    name: &'a str,
) -> impl Iterator<Item = Node<'a, 'input>> + 'a {
    node.children()
        .filter(move |n| n.is_element() && n.tag_name().name() == name)
}

/// Direct text content; nested elements are skipped.
fn own_text(node: Node) -> String {
    node.children()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect()
}

/// `id`/`ID` attribute, or an `ID` child element.
fn identifier(node: Node) -> String {
    node.attribute("id")
        .or_else(|| node.attribute("ID"))
        .map(str::to_owned)
        .or_else(|| child(node, "ID").map(own_text))
        .unwrap_or_default()
}

fn parse_manager(manager: Node) -> ComputingManagerRecord {
    let general_resources = child(manager, "GeneralResources")
        .map(|gr| children(gr, "Resource").map(own_text).collect())
        .unwrap_or_default();
    ComputingManagerRecord {
        manager_name: identifier(manager),
        general_resources,
    }
}

/// Reads every computing service in a GLUE2 document.
///
/// One record is returned per (service, manager) pair, in document order. A
/// service without a `ComputingManager` still yields one record with an
/// empty manager. Element names are matched without namespaces and unknown
/// elements are ignored.
pub fn parse_execution_targets(xml_text: &str) -> Result<Vec<ComputingServiceRecord>, ParseError> {
    let doc = Document::parse(xml_text)?;
    let mut records = Vec::new();
    for service in doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "ComputingService")
    {
        let admin_domain = service
            .ancestors()
            .find(|n| n.is_element() && n.tag_name().name() == "AdminDomain")
            .map(identifier)
            .unwrap_or_default();
        let service_id = identifier(service);
        let mut managers = children(service, "ComputingManager").peekable();
        if managers.peek().is_none() {
            records.push(ComputingServiceRecord {
                admin_domain,
                service_id,
                manager: ComputingManagerRecord::default(),
            });
            continue;
        }
        for manager in managers {
            records.push(ComputingServiceRecord {
                admin_domain: admin_domain.clone(),
                service_id: service_id.clone(),
                manager: parse_manager(manager),
            });
        }
    }
    if records.is_empty() {
        return Err(ParseError::NoServices);
    }
    Ok(records)
}

pub fn format_arcinfo(records: &[ComputingServiceRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str("Computing service:\n");
        out.push_str("  Batch System Information:\n");
        let resources = &record.manager.general_resources;
        if !resources.is_empty() {
            out.push_str("    General resources:\n");
            for resource in resources {
                let _ = writeln!(out, "      {resource}");
            }
        }
        out.push('\n');
    }
    out
}

fn is_xml_content_type(value: &str) -> bool {
    let mime = value.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    mime == "application/xml" || mime == "text/xml" || mime.ends_with("+xml")
}

/// Fetches an info document over plain HTTP.
pub fn fetch_info(url: &str) -> Result<String, FetchError> {
    if !url.starts_with("http://") {
        return Err(FetchError::InvalidUrl(url.to_owned()));
    }
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(30))
        .build()
        .map_err(|source| FetchError::Transport {
            url: url.to_owned(),
            source,
        })?;
    let response = client.get(url).send().map_err(|source| {
        if source.is_builder() {
            FetchError::InvalidUrl(url.to_owned())
        } else {
            FetchError::Unreachable {
                url: url.to_owned(),
                source,
            }
        }
    })?;
    let status = response.status();
    if status != reqwest::StatusCode::OK {
        return Err(FetchError::BadStatus {
            url: url.to_owned(),
            status: status.as_u16(),
        });
    }
    let content_type = response
        .headers()
        .get(reqwest::header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .to_owned();
    if !is_xml_content_type(&content_type) {
        return Err(FetchError::BadContentType {
            url: url.to_owned(),
            content_type,
        });
    }
    response.text().map_err(|source| FetchError::Transport {
        url: url.to_owned(),
        source,
    })
}
