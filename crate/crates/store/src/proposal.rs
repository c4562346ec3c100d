//! Reviewable refactoring proposals.

use chrono::{DateTime, Utc};
use refactor_guard_core::engine::Candidate;
use refactor_guard_core::model::{SourceFunction, SourceSpan, SourceUnit};
use refactor_guard_core::smells::{CodeSmell, SmellKind};
use refactor_guard_core::validation::{ConfidenceLevel, ValidationReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalStatus {
    Pending,
    Accepted,
    Rejected,
}

impl std::str::FromStr for ProposalStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pending" => Ok(Self::Pending),
            "accepted" => Ok(Self::Accepted),
            "rejected" => Ok(Self::Rejected),
            _ => Err(format!("unknown status '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefactoringProposal {
    /// Assigned by the store on persist.
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub file: String,
    pub function: String,
    /// Where `original_source` sat in `file` when the proposal was made.
    pub function_span: SourceSpan,
    pub smell: CodeSmell,
    pub original_source: String,
    pub refactored_source: String,
    pub unified_diff: String,
    pub provider_id: String,
    pub prompt_sha256: String,
    pub report: ValidationReport,
    pub confidence: ConfidenceLevel,
    pub status: ProposalStatus,
    #[serde(default)]
    pub decided_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub decision_reason: Option<String>,
}

/// List view of a proposal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalSummary {
    pub id: String,
    pub file: String,
    pub function: String,
    pub smell_kind: SmellKind,
    pub confidence: ConfidenceLevel,
    pub status: ProposalStatus,
    pub created_at: DateTime<Utc>,
}

pub fn unified_diff(file: &str, original: &str, refactored: &str) -> String {
    let mut options = diffy::DiffOptions::new();
    options.set_original_filename(format!("a/{file}")).set_modified_filename(format!("b/{file}"));
    options.create_patch(original, refactored).to_string()
}

/// Replays `diff` on `original`.
pub fn apply_diff(original: &str, diff: &str) -> Result<String, String> {
    let patch = diffy::Patch::from_str(diff).map_err(|e| e.to_string())?;
    diffy::apply(original, &patch).map_err(|e| e.to_string())
}

/// Refactored text as it will be spliced in: surrounding whitespace
/// trimmed, like a function span that ends at its closing brace.
fn normalize(text: &str) -> String {
    text.trim().to_string()
}

impl RefactoringProposal {
    pub fn from_candidate(
        unit: &SourceUnit,
        function: &SourceFunction,
        smell: &CodeSmell,
        prompt_sha256: &str,
        candidate: &Candidate,
    ) -> Self {
        // Absolute, so that accepting works from any working directory.
        let path = std::path::absolute(&unit.path).unwrap_or_else(|_| unit.path.clone());
        let file = path.to_string_lossy().replace('\\', "/");
        let original_source = unit.slice(&function.span).to_string();
        let refactored_source = normalize(&candidate.result.refactored_source);
        Self {
            id: String::new(),
            created_at: Utc::now(),
            unified_diff: unified_diff(&file, &original_source, &refactored_source),
            file,
            function: function.name.clone(),
            function_span: function.span.clone(),
            smell: smell.clone(),
            original_source,
            refactored_source,
            provider_id: candidate.result.provider_id.clone(),
            prompt_sha256: prompt_sha256.to_string(),
            report: candidate.report.clone(),
            confidence: candidate.confidence,
            status: ProposalStatus::Pending,
            decided_at: None,
            decision_reason: None,
        }
    }

    pub fn summary(&self) -> ProposalSummary {
        ProposalSummary {
            id: self.id.clone(),
            file: self.file.clone(),
            function: self.function.clone(),
            smell_kind: self.smell.kind,
            confidence: self.confidence,
            status: self.status,
            created_at: self.created_at,
        }
    }

    /// Checks the invariants a stored proposal must satisfy.
    pub fn check(&self) -> Result<(), String> {
        if self.confidence == ConfidenceLevel::Discard {
            return Err("discarded refactorings are never stored".into());
        }
        match apply_diff(&self.original_source, &self.unified_diff) {
            Ok(text) if text == self.refactored_source => Ok(()),
            Ok(_) => Err("unified_diff does not reproduce refactored_source".into()),
            Err(e) => Err(format!("unified_diff does not apply: {e}")),
        }
    }
}
