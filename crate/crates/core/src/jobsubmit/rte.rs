//! Runtime environments as declarative manifests.
//!
//! A manifest names the RTE and lists the batch options it appends to the
//! job's node properties:
//!
//! ```toml
//! name = "KGPU6"
//! node_properties = [
//!     "--gres=gpu:k80:1",
//! ]
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

/// File extension of manifests inside an RTE directory.
pub const RTE_EXTENSION: &str = "rte";

#[derive(Debug, Error)]
pub enum RteError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid runtime environment {name:?}: {message}")]
    Invalid { name: String, message: String },
    #[error("runtime environment {0:?} defined more than once")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RteManifest {
    pub name: String,
    #[serde(default)]
    pub node_properties: Vec<String>,
}

impl RteManifest {
    pub fn new(name: impl Into<String>, node_properties: Vec<String>) -> Result<Self, RteError> {
        let manifest = Self {
            name: name.into(),
            node_properties,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self, RteError> {
        let manifest: Self = toml::from_str(text).map_err(|source| RteError::Parse {
            path: origin.to_owned(),
            source,
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RteError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| RteError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<(), RteError> {
        let invalid = |message: &str| RteError::Invalid {
            name: self.name.clone(),
            message: message.to_owned(),
        };
        let name_ok = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'));
        if !name_ok {
            return Err(invalid("name must match [A-Za-z0-9_.-]+"));
        }
        for prop in &self.node_properties {
            if prop.trim().is_empty() {
                return Err(invalid("empty node property"));
            }
            if prop.contains(['\n', '\r']) {
                return Err(invalid("node property spans several lines"));
            }
        }
        Ok(())
    }
}

/// Known runtime environments by name.
#[derive(Debug, Clone, Default)]
pub struct RteRegistry {
    manifests: BTreeMap<String, RteManifest>,
}

impl RteRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, manifest: RteManifest) -> Result<(), RteError> {
        if self.manifests.contains_key(&manifest.name) {
            return Err(RteError::Duplicate(manifest.name));
        }
        self.manifests.insert(manifest.name.clone(), manifest);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&RteManifest> {
        self.manifests.get(name)
    }

    pub fn len(&self) -> usize {
        self.manifests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifests.is_empty()
    }

    /// Loads every `*.rte` file in `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, RteError> {
        let dir = dir.as_ref();
        let io = |source| RteError::Io {
            path: dir.to_owned(),
            source,
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .map(|entry| entry.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == RTE_EXTENSION));
        paths.sort();
        let mut registry = Self::new();
        for path in paths {
            registry.insert(RteManifest::load(&path)?)?;
        }
        Ok(registry)
    }
}

impl FromIterator<RteManifest> for RteRegistry {
    /// Later manifests replace earlier ones with the same name.
    fn from_iter<I: IntoIterator<Item = RteManifest>>(iter: I) -> Self {
        Self {
            manifests: iter.into_iter().map(|m| (m.name.clone(), m)).collect(),
        }
    }
}
