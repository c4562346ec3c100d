//! Serves recorded responses keyed by prompt hash.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::provider::{Completion, Provider, ProviderError, ProviderRequest};

/// One recorded exchange, stored as its own JSON file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub prompt_sha256: String,
    pub response: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("cannot read replay fixtures in {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid replay fixture {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub struct ReplayProvider {
    id: String,
    responses: HashMap<String, String>,
}

impl ReplayProvider {
    pub fn new(id: impl Into<String>, fixtures: impl IntoIterator<Item = ReplayFixture>) -> Self {
        Self {
            id: id.into(),
            responses: fixtures.into_iter().map(|f| (f.prompt_sha256.to_ascii_lowercase(), f.response)).collect(),
        }
    }

    /// Loads every `*.json` file in `dir`.
    pub fn load(id: impl Into<String>, dir: &Path) -> Result<Self, ReplayError> {
        let io = |source| ReplayError::Io { path: dir.to_path_buf(), source };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut fixtures = Vec::with_capacity(paths.len());
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(|source| ReplayError::Io { path: path.clone(), source })?;
            fixtures.push(serde_json::from_str(&text).map_err(|source| ReplayError::Json { path, source })?);
        }
        Ok(Self::new(id, fixtures))
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Provider for ReplayProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &ProviderRequest) -> Result<Completion, ProviderError> {
        let sha = request.prompt_sha256();
        let text = self.responses.get(&sha).ok_or_else(|| ProviderError::NoFixture(sha.clone()))?;
        Ok(Completion { text: text.clone(), response_id: format!("replay-{}", &sha[..12]) })
    }
}
