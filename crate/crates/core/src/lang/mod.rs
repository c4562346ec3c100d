//! Language adapters and the built-in MiniLang front-end.

mod lexer;
pub mod lint;
pub mod parser;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{SourceFunction, SourceSpan, SourceUnit};

pub use lexer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(line: u32, col: u32, message: impl Into<String>) -> Self {
        Self {
            span: SourceSpan::new(PathBuf::new(), (line, col), (line, col)),
            message: message.into(),
        }
    }

    fn in_file(mut self, file: &Path) -> Self {
        self.span.file = file.to_path_buf();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LintFinding {
    pub rule_id: String,
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.span, self.rule_id, self.message)
    }
}

/// A pluggable front-end for one language.
pub trait LanguageAdapter: Send + Sync {
    fn language_tag(&self) -> &str;

    fn parse(&self, source: &str, file: &Path) -> Result<Vec<SourceFunction>, ParseError>;

    fn lint(&self, source: &str, file: &Path) -> Result<Vec<LintFinding>, ParseError>;

    fn list_functions(&self, source: &str, file: &Path) -> Result<Vec<(String, SourceSpan)>, ParseError> {
        Ok(self.parse(source, file)?.into_iter().map(|f| (f.name, f.span)).collect())
    }

    /// Language-specific instructions for the refactoring prompt.
    fn prompt_guidance(&self) -> Option<&str> {
        None
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct MiniLang;

impl LanguageAdapter for MiniLang {
    fn language_tag(&self) -> &str {
        parser::LANGUAGE_TAG
    }

    fn parse(&self, source: &str, file: &Path) -> Result<Vec<SourceFunction>, ParseError> {
        parser::parse_unit(source, file).map_err(|e| e.in_file(file))
    }

    fn lint(&self, source: &str, file: &Path) -> Result<Vec<LintFinding>, ParseError> {
        Ok(lint::lint_functions(&self.parse(source, file)?))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FrontendError {
    #[error("no language adapter registered for '{0}'")]
    UnknownLanguage(String),
    #[error("no language mapped to file {0}")]
    UnmappedFile(PathBuf),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Read-only adapter registry, populated once at startup.
#[derive(Clone)]
pub struct LanguageRegistry {
    adapters: HashMap<String, Arc<dyn LanguageAdapter>>,
    /// Filename suffix → language tag, longest suffix wins.
    extensions: BTreeMap<String, String>,
}

impl fmt::Debug for LanguageRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LanguageRegistry")
            .field("adapters", &self.adapters.keys().collect::<Vec<_>>())
            .field("extensions", &self.extensions)
            .finish()
    }
}

pub fn default_extensions() -> BTreeMap<String, String> {
    [(".ml.js", parser::LANGUAGE_TAG), (".mini", parser::LANGUAGE_TAG)]
        .into_iter()
        .map(|(e, t)| (e.to_string(), t.to_string()))
        .collect()
}

impl Default for LanguageRegistry {
    fn default() -> Self {
        Self::with_extensions(default_extensions())
    }
}

impl LanguageRegistry {
    pub fn with_extensions(extensions: BTreeMap<String, String>) -> Self {
        let mut registry = Self { adapters: HashMap::new(), extensions };
        registry.register(Arc::new(MiniLang));
        registry
    }

    pub fn register(&mut self, adapter: Arc<dyn LanguageAdapter>) {
        self.adapters.insert(adapter.language_tag().to_string(), adapter);
    }

    pub fn adapter(&self, tag: &str) -> Result<&Arc<dyn LanguageAdapter>, FrontendError> {
        self.adapters.get(tag).ok_or_else(|| FrontendError::UnknownLanguage(tag.to_string()))
    }

    pub fn language_for_path(&self, path: &Path) -> Option<&str> {
        let name = path.file_name()?.to_str()?;
        self.extensions
            .iter()
            .filter(|(suffix, _)| name.ends_with(suffix.as_str()))
            .max_by_key(|(suffix, _)| suffix.len())
            .map(|(_, tag)| tag.as_str())
    }

    pub fn parse_unit(&self, source: &str, tag: &str) -> Result<Vec<SourceFunction>, FrontendError> {
        Ok(self.adapter(tag)?.parse(source, Path::new(""))?)
    }

    pub fn lint(&self, source: &str, tag: &str) -> Result<Vec<LintFinding>, FrontendError> {
        Ok(self.adapter(tag)?.lint(source, Path::new(""))?)
    }

    /// Parses in-memory text as a unit for `path`.
    pub fn unit_from_text(&self, path: &Path, text: &str, tag: &str) -> Result<SourceUnit, FrontendError> {
        let text = normalize_newlines(text);
        let functions = self.adapter(tag)?.parse(&text, path)?;
        Ok(SourceUnit { path: path.to_path_buf(), language: tag.to_string(), text, functions })
    }

    /// Reads and parses a file using the extension map.
    pub fn load_unit(&self, path: &Path) -> Result<SourceUnit, FrontendError> {
        let tag = self
            .language_for_path(path)
            .ok_or_else(|| FrontendError::UnmappedFile(path.to_path_buf()))?
            .to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|source| FrontendError::Io { path: path.to_path_buf(), source })?;
        self.unit_from_text(path, &text, &tag)
    }
}

pub fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n")
}

/// Findings in `refactored` that have no counterpart in `original`, matched
/// as a multiset on (rule_id, message). Spans are ignored since refactoring
/// moves code around.
pub fn warning_diff(original: &[LintFinding], refactored: &[LintFinding]) -> Vec<LintFinding> {
    let mut available: HashMap<(&str, &str), usize> = HashMap::new();
    for f in original {
        *available.entry((&f.rule_id, &f.message)).or_default() += 1;
    }
    refactored
        .iter()
        .filter(|f| match available.get_mut(&(f.rule_id.as_str(), f.message.as_str())) {
            Some(n) if *n > 0 => {
                *n -= 1;
                false
            }
            _ => true,
        })
        .cloned()
        .collect()
}
