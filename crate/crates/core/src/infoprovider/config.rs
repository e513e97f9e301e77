use std::fs;
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Site settings read from a `key=value` file.
///
/// Recognised keys: `admin_domain`, `service_id`, `manager_name`, `bind`,
/// `refresh_interval_seconds`. Lines starting with `#` are comments.
/// Every key is optional at parse time; consumers check what they need.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteConfig {
    pub admin_domain: Option<String>,
    pub service_id: Option<String>,
    pub manager_name: Option<String>,
    pub bind: Option<String>,
    pub refresh_interval_seconds: Option<u64>,
}

impl SiteConfig {
    pub const DEFAULT_REFRESH_SECONDS: u64 = 60;

    /// Fallback used when no config file is given.
    pub fn for_cluster(cluster_name: &str, manager_name: &str) -> Self {
        Self {
            admin_domain: Some(cluster_name.to_owned()),
            service_id: Some(format!("urn:ogf:ComputingService:{cluster_name}")),
            manager_name: Some(manager_name.to_owned()),
            bind: None,
            refresh_interval_seconds: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| ConfigError::Syntax {
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim().to_owned());
            match key {
                "admin_domain" => cfg.admin_domain = Some(value),
                "service_id" => cfg.service_id = Some(value),
                "manager_name" => cfg.manager_name = Some(value),
                "bind" => cfg.bind = Some(value),
                "refresh_interval_seconds" => {
                    let secs = value
                        .parse()
                        .map_err(|_| syntax(format!("refresh_interval_seconds: bad integer {value:?}")))?;
                    cfg.refresh_interval_seconds = Some(secs);
                }
                _ => return Err(syntax(format!("unknown key {key:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn refresh_interval(&self) -> Duration {
        Duration::from_secs(
            self.refresh_interval_seconds
                .unwrap_or(Self::DEFAULT_REFRESH_SECONDS),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let cfg = SiteConfig::parse(
            "# site\nadmin_domain = HPC2N\nservice_id=urn:x\nmanager_name = slurm\n\
             bind = 127.0.0.1:8080\nrefresh_interval_seconds = 30\n",
        )
        .unwrap();
        assert_eq!(cfg.admin_domain.as_deref(), Some("HPC2N"));
        assert_eq!(cfg.service_id.as_deref(), Some("urn:x"));
        assert_eq!(cfg.bind.as_deref(), Some("127.0.0.1:8080"));
        assert_eq!(cfg.refresh_interval(), Duration::from_secs(30));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            SiteConfig::parse("admin_domain=a\nnonsense"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
        assert!(SiteConfig::parse("colour=red").is_err());
        assert!(SiteConfig::parse("refresh_interval_seconds=soon").is_err());
    }

    #[test]
    fn default_refresh() {
        assert_eq!(SiteConfig::default().refresh_interval(), Duration::from_secs(60));
    }
}
