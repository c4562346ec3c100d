//! File-per-proposal JSON store.
//!
//! Layout: `<store>/proposals/<id>.json`. Every write goes to a hidden
//! temp file in the same directory and is renamed into place, so a reader
//! never sees a partial document under a canonical name. Mutations are
//! serialized by an in-process mutex plus an advisory lock on
//! `<store>/.lock`, which also covers two CLI processes sharing a store.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::Utc;
use refactor_guard_core::analysis::analyze_unit;
use refactor_guard_core::lang::normalize_newlines;
use refactor_guard_core::model::LineIndex;
use refactor_guard_core::validation::{ConfidenceLevel, Validator};
use serde::{Deserialize, Serialize};
use ulid::Generator;

use crate::proposal::{ProposalStatus, ProposalSummary, RefactoringProposal};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("proposal {0} not found")]
    NotFound(String),
    #[error("proposal {id} was already {status:?}")]
    AlreadyDecided { id: String, status: ProposalStatus },
    #[error("{file} changed since proposal {id} was created; the proposal was rejected")]
    SourceDrifted { id: String, file: String },
    #[error("invalid proposal: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt proposal file {path}: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// A document written to its temp file but not yet renamed into place.
/// Dropping it without `commit` removes the temp file.
#[derive(Debug)]
pub struct Staged {
    temp: PathBuf,
    target: PathBuf,
    committed: bool,
}

impl Staged {
    pub fn temp_path(&self) -> &Path {
        &self.temp
    }

    pub fn commit(mut self) -> Result<(), StoreError> {
        fs::rename(&self.temp, &self.target).map_err(io(&self.target))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_file(&self.temp);
        }
    }
}

/// Writes `bytes` next to `target` under a hidden temp name and syncs it.
pub fn stage(target: &Path, bytes: &[u8]) -> Result<Staged, StoreError> {
    let dir = target.parent().unwrap_or(Path::new("."));
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let temp = dir.join(format!(".{name}.{}.tmp", ulid::Ulid::new()));
    let mut f = File::create(&temp).map_err(io(&temp))?;
    f.write_all(bytes).map_err(io(&temp))?;
    f.sync_all().map_err(io(&temp))?;
    Ok(Staged { temp, target: target.to_path_buf(), committed: false })
}

pub fn write_atomic(target: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    stage(target, bytes)?.commit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyResult {
    pub file: String,
    pub new_file_health: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSummary {
    pub pending: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Mean validated file CodeHealth change over accepted proposals.
    pub mean_health_delta: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Filter {
    pub status: Option<ProposalStatus>,
    pub confidence: Option<ConfidenceLevel>,
}

pub struct Store {
    root: PathBuf,
    analyzer: Validator,
    writer: Mutex<Generator>,
}

impl Store {
    /// Opens (creating if needed) the store at `root`. `analyzer` supplies
    /// the scoring setup used to re-measure a file after an accepted
    /// proposal is applied.
    pub fn open(root: impl Into<PathBuf>, analyzer: Validator) -> Result<Self, StoreError> {
        let root = root.into();
        let proposals = root.join("proposals");
        fs::create_dir_all(&proposals).map_err(io(&proposals))?;
        Ok(Self { root, analyzer, writer: Mutex::new(Generator::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn proposals_dir(&self) -> PathBuf {
        self.root.join("proposals")
    }

    fn path_for(&self, id: &str) -> Result<PathBuf, StoreError> {
        // Ids are ULIDs; anything else cannot name a stored proposal.
        if ulid::Ulid::from_string(id).is_err() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        Ok(self.proposals_dir().join(format!("{id}.json")))
    }

    /// Runs `f` holding both the in-process and the cross-process lock.
    fn exclusive<T>(&self, f: impl FnOnce(&mut Generator) -> Result<T, StoreError>) -> Result<T, StoreError> {
        let mut generator = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let lock_path = self.root.join(".lock");
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(&lock_path).map_err(io(&lock_path))?;
        lock.lock().map_err(io(&lock_path))?;
        let out = f(&mut generator);
        let _ = lock.unlock();
        out
    }

    fn write(&self, proposal: &RefactoringProposal) -> Result<(), StoreError> {
        let path = self.path_for(&proposal.id)?;
        let json = serde_json::to_vec_pretty(proposal).expect("proposal serializes");
        write_atomic(&path, &json)
    }

    /// Assigns an id and writes the proposal. Discarded candidates and
    /// proposals whose diff does not replay are refused.
    pub fn persist(&self, mut proposal: RefactoringProposal) -> Result<String, StoreError> {
        proposal.check().map_err(StoreError::Invariant)?;
        self.exclusive(|generator| {
            let id = generator.generate().map_err(|e| StoreError::Invariant(e.to_string()))?;
            proposal.id = id.to_string();
            proposal.status = ProposalStatus::Pending;
            proposal.decided_at = None;
            self.write(&proposal)?;
            Ok(proposal.id)
        })
    }

    /// Stages a proposal without committing it. Used to exercise crash
    /// recovery: forgetting the returned value leaves the temp file behind
    /// exactly as a kill between write and rename would.
    pub fn stage(&self, mut proposal: RefactoringProposal) -> Result<Staged, StoreError> {
        proposal.check().map_err(StoreError::Invariant)?;
        let mut generator = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        proposal.id = generator.generate().map_err(|e| StoreError::Invariant(e.to_string()))?.to_string();
        let path = self.path_for(&proposal.id)?;
        stage(&path, &serde_json::to_vec_pretty(&proposal).expect("proposal serializes"))
    }

    pub fn get(&self, id: &str) -> Result<RefactoringProposal, StoreError> {
        let path = self.path_for(id)?;
        let text = match fs::read(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(StoreError::Io { path, source: e }),
        };
        serde_json::from_slice(&text).map_err(|source| StoreError::Corrupt { path, source })
    }

    /// All proposals, oldest first. Temp files are not proposals.
    pub fn load_all(&self) -> Result<Vec<RefactoringProposal>, StoreError> {
        let dir = self.proposals_dir();
        let mut ids: Vec<String> = fs::read_dir(&dir)
            .map_err(io(&dir))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                let id = name.strip_suffix(".json")?;
                ulid::Ulid::from_string(id).ok().map(|_| id.to_string())
            })
            .collect();
        ids.sort();
        ids.iter().map(|id| self.get(id)).collect()
    }

    pub fn list(&self, filter: Filter) -> Result<Vec<ProposalSummary>, StoreError> {
        Ok(self
            .load_all()?
            .iter()
            .filter(|p| filter.status.is_none_or(|s| p.status == s))
            .filter(|p| filter.confidence.is_none_or(|c| p.confidence == c))
            .map(RefactoringProposal::summary)
            .collect())
    }

    pub fn summary(&self) -> Result<StoreSummary, StoreError> {
        let all = self.load_all()?;
        let count = |s: ProposalStatus| all.iter().filter(|p| p.status == s).count();
        let deltas: Vec<f64> = all
            .iter()
            .filter(|p| p.status == ProposalStatus::Accepted)
            .filter_map(|p| p.report.health_change())
            .collect();
        let mean_health_delta = (!deltas.is_empty()).then(|| deltas.iter().sum::<f64>() / deltas.len() as f64);
        Ok(StoreSummary {
            pending: count(ProposalStatus::Pending),
            accepted: count(ProposalStatus::Accepted),
            rejected: count(ProposalStatus::Rejected),
            mean_health_delta,
        })
    }

    fn pending(&self, id: &str) -> Result<RefactoringProposal, StoreError> {
        let p = self.get(id)?;
        if p.status != ProposalStatus::Pending {
            return Err(StoreError::AlreadyDecided { id: id.to_string(), status: p.status });
        }
        Ok(p)
    }

    fn decide(&self, mut p: RefactoringProposal, status: ProposalStatus, reason: Option<String>) -> Result<(), StoreError> {
        p.status = status;
        p.decided_at = Some(Utc::now());
        p.decision_reason = reason;
        self.write(&p)
    }

    pub fn reject(&self, id: &str, reason: Option<String>) -> Result<RefactoringProposal, StoreError> {
        self.exclusive(|_| {
            let p = self.pending(id)?;
            self.decide(p, ProposalStatus::Rejected, reason)?;
            self.get(id)
        })
    }

    /// Applies a pending proposal to its file. The file must still hold the
    /// original function text at the recorded span, byte for byte (after
    /// line-ending normalization); otherwise nothing is written and the
    /// proposal is rejected as drifted.
    pub fn accept(&self, id: &str) -> Result<ApplyResult, StoreError> {
        self.exclusive(|_| {
            let p = self.pending(id)?;
            let path = PathBuf::from(&p.file);
            let current = match fs::read_to_string(&path) {
                Ok(text) => Some(normalize_newlines(&text)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
                Err(e) => return Err(StoreError::Io { path, source: e }),
            };
            let range = current.as_deref().and_then(|text| {
                let index = LineIndex::new(text);
                let range = index.range(&p.function_span);
                (text.get(range.clone()) == Some(p.original_source.as_str())).then_some(range)
            });
            let (Some(text), Some(range)) = (current, range) else {
                let file = p.file.clone();
                self.decide(p, ProposalStatus::Rejected, Some("source drifted: the file changed after the proposal was made".into()))?;
                return Err(StoreError::SourceDrifted { id: id.to_string(), file });
            };

            let updated = format!("{}{}{}", &text[..range.start], p.refactored_source, &text[range.end..]);
            let registry = &self.analyzer.registry;
            let new_file_health = registry
                .language_for_path(&path)
                .and_then(|tag| registry.unit_from_text(&path, &updated, tag).ok())
                .map(|unit| analyze_unit(&unit, &self.analyzer.thresholds, &self.analyzer.weights).score.value)
                .ok_or_else(|| StoreError::Invariant(format!("{} does not parse after applying the proposal", p.file)))?;
            write_atomic(&path, updated.as_bytes())?;
            let file = p.file.clone();
            self.decide(p, ProposalStatus::Accepted, None)?;
            Ok(ApplyResult { file, new_file_health })
        })
    }
}
