//! Baseline snapshots and the CodeHealth quality gate.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::analysis::{analyze_unit, FileReport};
use crate::health::{HealthWeights, MAX_SCORE};
use crate::lang::LanguageRegistry;
use crate::smells::{CodeSmell, Thresholds};

pub const BASELINE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum GateError {
    #[error("no parseable source files under the given paths")]
    NoParseableFiles,
    #[error("baseline was recorded with different thresholds or weights (fingerprint {found}, current {expected}); record a new baseline")]
    StaleBaseline { expected: String, found: String },
    #[error("unsupported baseline version {0}")]
    UnsupportedVersion(u32),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid baseline file {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFile {
    pub score: f64,
    pub functions: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub version: u32,
    pub created_at: DateTime<Utc>,
    pub fingerprint: String,
    pub files: BTreeMap<String, BaselineFile>,
    pub skipped: Vec<Skipped>,
}

/// Hash of everything that influences scores.
pub fn fingerprint(thresholds: &Thresholds, weights: &HealthWeights) -> String {
    let canonical = serde_json::json!({ "thresholds": thresholds, "weights": weights });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

/// Source files under `paths` that map to a registered language, sorted.
pub fn collect_sources(paths: &[PathBuf], registry: &LanguageRegistry) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = paths
        .iter()
        .flat_map(|p| WalkDir::new(p).sort_by_file_name())
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| registry.language_for_path(p).is_some())
        .collect();
    files.sort();
    files.dedup();
    files
}

pub fn path_key(path: &Path) -> String {
    path.to_string_lossy().replace('\\', "/")
}

/// Function names made unique within a file: repeated names get `#2`, `#3`...
pub fn function_keys<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    names
        .into_iter()
        .map(|n| {
            let count = seen.entry(n).or_default();
            *count += 1;
            if *count == 1 {
                n.to_string()
            } else {
                format!("{n}#{count}")
            }
        })
        .collect()
}

/// Per-file reports for every parseable source, plus the skipped ones.
pub fn scan(
    paths: &[PathBuf],
    registry: &LanguageRegistry,
    thresholds: &Thresholds,
    weights: &HealthWeights,
) -> (Vec<FileReport>, Vec<Skipped>) {
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for path in collect_sources(paths, registry) {
        match registry.load_unit(&path) {
            Ok(unit) => reports.push(analyze_unit(&unit, thresholds, weights)),
            Err(e) => skipped.push(Skipped { path: path_key(&path), reason: e.to_string() }),
        }
    }
    (reports, skipped)
}

pub fn snapshot_baseline(
    paths: &[PathBuf],
    registry: &LanguageRegistry,
    thresholds: &Thresholds,
    weights: &HealthWeights,
) -> Result<Baseline, GateError> {
    let (reports, skipped) = scan(paths, registry, thresholds, weights);
    if reports.is_empty() {
        return Err(GateError::NoParseableFiles);
    }
    let files = reports
        .iter()
        .map(|r| {
            let keys = function_keys(r.functions.iter().map(|f| f.name.as_str()));
            let functions = keys.into_iter().zip(&r.functions).map(|(k, f)| (k, f.score.value)).collect();
            (path_key(&r.path), BaselineFile { score: r.score.value, functions })
        })
        .collect();
    Ok(Baseline {
        version: BASELINE_VERSION,
        created_at: Utc::now(),
        fingerprint: fingerprint(thresholds, weights),
        files,
        skipped,
    })
}

impl Baseline {
    pub fn load(path: &Path) -> Result<Self, GateError> {
        let text = std::fs::read_to_string(path).map_err(|source| GateError::Io { path: path.into(), source })?;
        let baseline: Baseline =
            serde_json::from_str(&text).map_err(|source| GateError::Json { path: path.into(), source })?;
        if baseline.version != BASELINE_VERSION {
            return Err(GateError::UnsupportedVersion(baseline.version));
        }
        Ok(baseline)
    }

    pub fn save(&self, path: &Path) -> Result<(), GateError> {
        let text = serde_json::to_string_pretty(self).expect("baseline serializes");
        std::fs::write(path, text + "\n").map_err(|source| GateError::Io { path: path.into(), source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decline {
    pub file: String,
    pub function: String,
    pub before: f64,
    pub after: f64,
    /// The function is not in the baseline and was measured against 10.0.
    pub new_function: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub status: GateStatus,
    pub declines: Vec<Decline>,
    pub targets: Vec<CodeSmell>,
    pub skipped: Vec<Skipped>,
}

pub fn evaluate_gate(
    baseline: &Baseline,
    paths: &[PathBuf],
    registry: &LanguageRegistry,
    thresholds: &Thresholds,
    weights: &HealthWeights,
) -> Result<GateResult, GateError> {
    let expected = fingerprint(thresholds, weights);
    if baseline.fingerprint != expected {
        return Err(GateError::StaleBaseline { expected, found: baseline.fingerprint.clone() });
    }
    let (reports, skipped) = scan(paths, registry, thresholds, weights);
    let mut declines = Vec::new();
    let mut targets = Vec::new();
    for report in &reports {
        let file = path_key(&report.path);
        let recorded = baseline.files.get(&file);
        let keys = function_keys(report.functions.iter().map(|f| f.name.as_str()));
        for (key, function) in keys.into_iter().zip(&report.functions) {
            let previous = recorded.and_then(|r| r.functions.get(&key)).copied();
            let before = previous.unwrap_or(MAX_SCORE);
            let after = function.score.value;
            if after < before {
                declines.push(Decline {
                    file: file.clone(),
                    function: key,
                    before,
                    after,
                    new_function: previous.is_none(),
                });
                targets.extend(function.smells.iter().cloned());
            }
        }
    }
    let status = if declines.is_empty() { GateStatus::Pass } else { GateStatus::Fail };
    Ok(GateResult { status, declines, targets, skipped })
}
