//! Engine configuration file.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::engine::http::HttpProvider;
use crate::engine::mock::{MockBehavior, MockProvider, OracleCache};
use crate::engine::prompt::{DEFAULT_MAX_FUNCTION_LOC, DEFAULT_SOFT_WARNING_LOC};
use crate::engine::replay::ReplayProvider;
use crate::engine::{EngineSettings, Provider, RefactorEngine, SelectionPolicy};
use crate::health::HealthWeights;
use crate::lang::{default_extensions, LanguageRegistry};
use crate::smells::Thresholds;
use crate::validation::Validator;

pub const DEFAULT_CONFIG_FILE: &str = "refactor-guard.json";
pub const CONFIG_ENV: &str = "REFACTOR_GUARD_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderType {
    Mock,
    Replay,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: ProviderType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Mock providers only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<MockBehavior>,
    /// Replay providers only: directory of recorded responses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixtures: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<u64>,
}

impl ProviderConfig {
    pub fn mock(id: impl Into<String>, behavior: MockBehavior) -> Self {
        Self {
            id: id.into(),
            kind: ProviderType::Mock,
            endpoint: None,
            headers: BTreeMap::new(),
            model: None,
            behavior: Some(behavior),
            fixtures: None,
            timeout_secs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub thresholds: Thresholds,
    pub health_weights: HealthWeights,
    pub providers: Vec<ProviderConfig>,
    pub policy: SelectionPolicy,
    pub max_function_loc: u32,
    pub soft_warning_loc: u32,
    pub pool_size: usize,
    pub max_output_size: usize,
    pub store_dir: PathBuf,
    /// Filename suffix → language tag.
    pub languages: BTreeMap<String, String>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            health_weights: HealthWeights::default(),
            providers: vec![ProviderConfig::mock("oracle", MockBehavior::Oracle)],
            policy: SelectionPolicy::fixed("oracle"),
            max_function_loc: DEFAULT_MAX_FUNCTION_LOC,
            soft_warning_loc: DEFAULT_SOFT_WARNING_LOC,
            pool_size: 3,
            max_output_size: EngineSettings::default().max_output_size,
            store_dir: PathBuf::from(".refactor-guard"),
            languages: default_extensions(),
        }
    }
}

impl EngineConfig {
    /// Parses and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config: EngineConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in &mut config.providers {
            if let Some(dir) = &p.fixtures {
                if dir.is_relative() {
                    p.fixtures = Some(base.join(dir));
                }
            }
        }
        if config.store_dir.is_relative() {
            config.store_dir = base.join(&config.store_dir);
        }
        config.validate()?;
        Ok(config)
    }

    /// Config at `explicit`, else `$REFACTOR_GUARD_CONFIG`, else
    /// `./refactor-guard.json` when present, else the defaults.
    pub fn discover(explicit: Option<&Path>) -> Result<Self, ConfigError> {
        if let Some(p) = explicit {
            return Self::load(p);
        }
        if let Some(p) = std::env::var_os(CONFIG_ENV) {
            return Self::load(Path::new(&p));
        }
        let local = Path::new(DEFAULT_CONFIG_FILE);
        if local.is_file() {
            return Self::load(local);
        }
        Ok(Self::default())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.thresholds.validate().map_err(ConfigError::Invalid)?;
        self.health_weights.validate().map_err(ConfigError::Invalid)?;
        if self.pool_size == 0 {
            return invalid("pool_size must be at least 1".into());
        }
        if self.max_function_loc == 0 || self.max_output_size == 0 {
            return invalid("max_function_loc and max_output_size must be positive".into());
        }
        let mut ids = HashSet::new();
        for p in &self.providers {
            if !ids.insert(p.id.as_str()) {
                return invalid(format!("duplicate provider id '{}'", p.id));
            }
            let needs = |field: &str, present: bool| {
                if present {
                    Ok(())
                } else {
                    Err(ConfigError::Invalid(format!("provider '{}' needs '{field}'", p.id)))
                }
            };
            match p.kind {
                ProviderType::Mock => needs("behavior", p.behavior.is_some())?,
                ProviderType::Replay => needs("fixtures", p.fixtures.is_some())?,
                ProviderType::Http => {
                    needs("endpoint", p.endpoint.is_some())?;
                    needs("model", p.model.is_some())?;
                }
            }
        }
        if let Some(unknown) = self.policy.provider_ids().find(|id| !ids.contains(id)) {
            return invalid(format!("policy refers to unknown provider '{unknown}'"));
        }
        let registry = self.registry();
        for (suffix, tag) in &self.languages {
            if registry.adapter(tag).is_err() {
                return invalid(format!("extension '{suffix}' maps to unknown language '{tag}'"));
            }
        }
        Ok(())
    }

    pub fn registry(&self) -> LanguageRegistry {
        LanguageRegistry::with_extensions(self.languages.clone())
    }

    pub fn validator(&self) -> Validator {
        Validator::new(self.registry(), self.thresholds.clone(), self.health_weights.clone())
    }

    pub fn settings(&self) -> EngineSettings {
        EngineSettings {
            max_function_loc: self.max_function_loc,
            soft_warning_loc: self.soft_warning_loc,
            pool_size: self.pool_size,
            max_output_size: self.max_output_size,
        }
    }

    pub fn build_providers(&self) -> Result<Vec<Arc<dyn Provider>>, ConfigError> {
        let cache = OracleCache::default();
        self.providers
            .iter()
            .map(|p| -> Result<Arc<dyn Provider>, ConfigError> {
                Ok(match p.kind {
                    ProviderType::Mock => Arc::new(
                        MockProvider::new(&p.id, p.behavior.expect("validated"), self.registry(), self.thresholds.clone())
                            .with_cache(cache.clone()),
                    ),
                    ProviderType::Replay => {
                        let dir = p.fixtures.as_deref().expect("validated");
                        Arc::new(ReplayProvider::load(&p.id, dir).map_err(|e| ConfigError::Invalid(e.to_string()))?)
                    }
                    ProviderType::Http => Arc::new(
                        HttpProvider::new(
                            &p.id,
                            p.endpoint.clone().expect("validated"),
                            p.model.clone().expect("validated"),
                            p.headers.clone(),
                            Duration::from_secs(p.timeout_secs.unwrap_or(120)),
                        )
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?,
                    ),
                })
            })
            .collect()
    }

    pub fn build_engine(&self) -> Result<RefactorEngine, ConfigError> {
        Ok(RefactorEngine::new(
            self.validator(),
            self.build_providers()?,
            Box::new(self.policy.clone()),
            self.settings(),
        ))
    }
}
