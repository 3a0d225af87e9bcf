use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use coach_core::catalog::CatalogSpec;
use coach_core::Catalog;
use serde::Deserialize;

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    /// Directory holding `events.jsonl`.
    pub data_dir: PathBuf,
    /// Honor the `X-Test-Clock` header.
    pub test_mode: bool,
    /// JSON catalog file; the built-in catalog when absent.
    pub catalog_path: Option<PathBuf>,
    /// Static bearer token required on every route except `/healthz`.
    pub api_token: Option<String>,
    /// Seed of the condition assignment sequence.
    pub assignment_seed: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("data"),
            test_mode: false,
            catalog_path: None,
            api_token: None,
            assignment_seed: 0,
        }
    }
}

impl ServiceConfig {
    /// Reads a TOML file (if given), then applies `COACH_*` environment
    /// overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ServiceError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ServiceError::Config(format!("{}: {e}", p.display())))?;
                Self::from_toml_str(&text)?
            }
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ServiceError> {
        toml::from_str(s).map_err(|e| ServiceError::Config(e.to_string()))
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ServiceError> {
        let bad = |k: &str, v: &str| ServiceError::Config(format!("{k}={v:?} is invalid"));
        if let Some(v) = get("COACH_BIND") {
            self.bind = v.parse().map_err(|_| bad("COACH_BIND", &v))?;
        }
        if let Some(v) = get("COACH_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some(v) = get("COACH_TEST_MODE") {
            self.test_mode = match v.as_str() {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => return Err(bad("COACH_TEST_MODE", &v)),
            };
        }
        if let Some(v) = get("COACH_CATALOG") {
            self.catalog_path = Some(v.into());
        }
        if let Some(v) = get("COACH_API_TOKEN") {
            self.api_token = Some(v).filter(|t| !t.is_empty());
        }
        if let Some(v) = get("COACH_ASSIGNMENT_SEED") {
            self.assignment_seed = v.parse().map_err(|_| bad("COACH_ASSIGNMENT_SEED", &v))?;
        }
        Ok(())
    }

    pub fn catalog(&self) -> Result<Catalog, ServiceError> {
        let Some(path) = &self.catalog_path else {
            return Ok(Catalog::bootstrap());
        };
        let text = std::fs::read_to_string(path).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let spec: CatalogSpec = serde_json::from_str(&text).map_err(|e| ServiceError::Config(format!("catalog: {e}")))?;
        Catalog::from_spec(spec).map_err(|e| ServiceError::Config(format!("catalog: {e}")))
    }

    pub fn log_path(&self) -> PathBuf {
        self.data_dir.join("events.jsonl")
    }
}
