//! Candidate validation in successive steps, folded into one confidence
//! level.
//!
//! Low confidence is encoded as [`ConfidenceLevel::Discard`]; such
//! candidates are dropped and never reach the proposal store.

pub mod semantic;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_functions, file_score};
use crate::health::{health_delta, Direction, HealthDelta, HealthWeights};
use crate::lang::{warning_diff, LanguageRegistry, LintFinding};
use crate::model::{LineIndex, SourceFunction, SourceUnit};
use crate::smells::{detect_all, CodeSmell, SmellKind, Thresholds};

pub use semantic::{CheckId, CheckResult, SemanticCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfidenceLevel {
    Discard,
    Mid,
    High,
}

impl ConfidenceLevel {
    fn demoted(self) -> Self {
        match self {
            ConfidenceLevel::High => ConfidenceLevel::Mid,
            _ => ConfidenceLevel::Discard,
        }
    }
}

impl fmt::Display for ConfidenceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfidenceLevel::High => "High",
            ConfidenceLevel::Mid => "Mid",
            ConfidenceLevel::Discard => "Discard",
        })
    }
}

/// Outcome of the syntactic or smell/health step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepVerdict {
    Pass,
    Demote,
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticOutcome {
    Pass,
    Minor,
    Major,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntacticStep {
    pub parsed: bool,
    pub new_warnings: Vec<LintFinding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub verdict: StepVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewSmell {
    pub kind: SmellKind,
    pub less_severe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmellHealthStep {
    pub target_smell_resolved: bool,
    pub delta: Option<HealthDelta>,
    pub new_smells: Vec<NewSmell>,
    pub verdict: StepVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticStep {
    pub checks: Vec<SemanticCheck>,
    pub outcome: SemanticOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub syntactic: SyntacticStep,
    pub smell_health: Option<SmellHealthStep>,
    pub semantic: Option<SemanticStep>,
    pub rationale: Vec<String>,
    pub confidence: ConfidenceLevel,
}

impl ValidationReport {
    /// File-level CodeHealth change, when the smell/health step ran.
    pub fn health_change(&self) -> Option<f64> {
        self.smell_health.as_ref()?.delta.as_ref().map(HealthDelta::change)
    }
}

/// Folds the three step outcomes into a confidence level. Starts at High;
/// any discard or a major semantic deviation discards; each demotion
/// lowers one level and falling below Mid discards.
pub fn assign_confidence(
    syntactic: StepVerdict,
    smell_health: Option<StepVerdict>,
    semantic: Option<SemanticOutcome>,
) -> ConfidenceLevel {
    let (Some(smell_health), Some(semantic)) = (smell_health, semantic) else {
        return ConfidenceLevel::Discard;
    };
    if syntactic == StepVerdict::Discard || smell_health == StepVerdict::Discard || semantic == SemanticOutcome::Major {
        return ConfidenceLevel::Discard;
    }
    let demotions = [syntactic == StepVerdict::Demote, smell_health == StepVerdict::Demote, semantic == SemanticOutcome::Minor];
    demotions.iter().filter(|d| **d).fold(ConfidenceLevel::High, |level, _| level.demoted())
}

/// Replaces `function`'s text in `unit` with `candidate`.
pub fn splice_function(unit: &SourceUnit, function: &SourceFunction, candidate: &str) -> String {
    let range = LineIndex::new(&unit.text).range(&function.span);
    let mut out = String::with_capacity(unit.text.len() + candidate.len());
    out.push_str(&unit.text[..range.start]);
    out.push_str(candidate.trim());
    out.push_str(&unit.text[range.end..]);
    out
}

/// Validates one candidate refactoring of `function` (inside `unit`)
/// targeting `target`.
#[derive(Debug, Clone)]
pub struct Validator {
    pub registry: LanguageRegistry,
    pub thresholds: Thresholds,
    pub weights: HealthWeights,
}

/// The function under refactoring and its new helpers, after the edit.
pub struct Lineage<'a> {
    pub entry: &'a SourceFunction,
    pub helpers: Vec<&'a SourceFunction>,
}

impl Validator {
    pub fn new(registry: LanguageRegistry, thresholds: Thresholds, weights: HealthWeights) -> Self {
        Self { registry, thresholds, weights }
    }

    pub fn validate(
        &self,
        unit: &SourceUnit,
        function: &SourceFunction,
        target: &CodeSmell,
        candidate: &str,
    ) -> ValidationReport {
        let mut rationale = Vec::new();

        let (syntactic, refactored) = self.syntactic_step(unit, function, candidate, &mut rationale);
        let Some(refactored) = refactored else {
            rationale.push("Confidence: discarded (refactored code is not syntactically valid).".to_string());
            return ValidationReport {
                syntactic,
                smell_health: None,
                semantic: None,
                rationale,
                confidence: ConfidenceLevel::Discard,
            };
        };

        let original_names: HashSet<&str> = unit.functions.iter().map(|f| f.name.as_str()).collect();
        let Some(entry) = refactored.function(&function.name) else {
            rationale.push(format!("Function '{}' was removed or renamed by the candidate.", function.name));
            rationale.push("Confidence: discarded.".to_string());
            return ValidationReport {
                syntactic,
                smell_health: Some(SmellHealthStep {
                    target_smell_resolved: false,
                    delta: None,
                    new_smells: Vec::new(),
                    verdict: StepVerdict::Discard,
                }),
                semantic: None,
                rationale,
                confidence: ConfidenceLevel::Discard,
            };
        };
        let lineage = Lineage {
            entry,
            helpers: refactored.functions.iter().filter(|f| !original_names.contains(f.name.as_str())).collect(),
        };

        let smell_health = self.smell_health_step(unit, function, &refactored, &lineage, target, &mut rationale);
        if smell_health.verdict == StepVerdict::Discard {
            rationale.push("Confidence: discarded.".to_string());
            return ValidationReport {
                syntactic,
                smell_health: Some(smell_health),
                semantic: None,
                rationale,
                confidence: ConfidenceLevel::Discard,
            };
        }

        let checks = semantic::run_checks(unit, function, &lineage, target);
        let outcome = semantic::fold(&checks);
        for c in &checks {
            rationale.push(format!("Semantic check {}: {} ({}).", c.check_id, c.result, c.detail));
        }
        let semantic = SemanticStep { checks, outcome };

        let confidence = assign_confidence(syntactic.verdict, Some(smell_health.verdict), Some(outcome));
        rationale.push(match confidence {
            ConfidenceLevel::High => "Confidence: High; the expected changes were made and nothing else.".to_string(),
            ConfidenceLevel::Mid => "Confidence: Mid; the refactoring works but has minor unintended changes, review before accepting.".to_string(),
            ConfidenceLevel::Discard => "Confidence: discarded.".to_string(),
        });
        ValidationReport { syntactic, smell_health: Some(smell_health), semantic: Some(semantic), rationale, confidence }
    }

    fn syntactic_step(
        &self,
        unit: &SourceUnit,
        function: &SourceFunction,
        candidate: &str,
        rationale: &mut Vec<String>,
    ) -> (SyntacticStep, Option<SourceUnit>) {
        let fail = |error: String, rationale: &mut Vec<String>| {
            rationale.push(format!("Syntactic check failed: {error}."));
            (SyntacticStep { parsed: false, new_warnings: Vec::new(), error: Some(error), verdict: StepVerdict::Discard }, None)
        };
        match self.registry.parse_unit(candidate, &unit.language) {
            Err(e) => return fail(format!("candidate does not parse: {e}"), rationale),
            Ok(fns) if fns.is_empty() => return fail("candidate contains no function".to_string(), rationale),
            Ok(_) => {}
        }
        let spliced = splice_function(unit, function, candidate);
        let refactored = match self.registry.unit_from_text(&unit.path, &spliced, &unit.language) {
            Ok(u) => u,
            Err(e) => return fail(format!("refactored file does not parse: {e}"), rationale),
        };
        let findings = |text: &str| self.registry.lint(text, &unit.language).unwrap_or_default();
        let new_warnings = warning_diff(&findings(&unit.text), &findings(&refactored.text));
        let verdict = if new_warnings.is_empty() {
            rationale.push("Refactored code parses and introduces no new static-analysis warnings.".to_string());
            StepVerdict::Pass
        } else {
            let listed: Vec<String> = new_warnings.iter().map(|w| format!("{} {}", w.rule_id, w.message)).collect();
            rationale.push(format!("New static-analysis warnings lower the confidence: {}.", listed.join("; ")));
            StepVerdict::Demote
        };
        (SyntacticStep { parsed: true, new_warnings, error: None, verdict }, Some(refactored))
    }

    fn smell_health_step(
        &self,
        unit: &SourceUnit,
        function: &SourceFunction,
        refactored: &SourceUnit,
        lineage: &Lineage<'_>,
        target: &CodeSmell,
        rationale: &mut Vec<String>,
    ) -> SmellHealthStep {
        let count = |smells: &[CodeSmell]| {
            let mut by_kind: BTreeMap<SmellKind, usize> = BTreeMap::new();
            for s in smells {
                *by_kind.entry(s.kind).or_default() += 1;
            }
            by_kind
        };
        let before = count(&detect_all(function, &self.thresholds));
        let after_smells: Vec<CodeSmell> = std::iter::once(lineage.entry)
            .chain(lineage.helpers.iter().copied())
            .flat_map(|f| detect_all(f, &self.thresholds))
            .collect();
        let after = count(&after_smells);

        let remaining = after.get(&target.kind).copied().unwrap_or(0);
        let resolved = match target.kind {
            // One smell per condition: resolved when the offending count drops.
            SmellKind::ComplexConditional => remaining < before.get(&target.kind).copied().unwrap_or(1),
            _ => remaining == 0,
        };

        let mut new_smells = Vec::new();
        for (kind, n) in &after {
            if *kind == target.kind {
                continue;
            }
            let extra = n.saturating_sub(before.get(kind).copied().unwrap_or(0));
            new_smells.extend(std::iter::repeat_n(NewSmell { kind: *kind, less_severe: kind.less_severe_than(target.kind) }, extra));
        }

        let score = |fns: &[SourceFunction]| file_score(&analyze_functions(fns, &self.thresholds, &self.weights));
        let delta = health_delta(score(&unit.functions), score(&refactored.functions)).expect("both file scores");

        let target_name = target.kind.display_name();
        let verdict = if !resolved {
            rationale.push(format!("Target smell {target_name} is still present in '{}'.", function.name));
            StepVerdict::Discard
        } else if delta.direction != Direction::Improved {
            rationale.push(format!(
                "Target smell {target_name} resolved, but file CodeHealth did not improve ({:.2} -> {:.2}).",
                delta.before.value, delta.after.value
            ));
            StepVerdict::Discard
        } else {
            rationale.push(format!("Target smell {target_name} resolved in '{}'.", function.name));
            rationale.push(format!("File CodeHealth improved from {:.2} to {:.2}.", delta.before.value, delta.after.value));
            if let Some(worse) = new_smells.iter().find(|s| !s.less_severe) {
                rationale.push(format!(
                    "New {} smell is at least as severe as the target; rejecting.",
                    worse.kind.display_name()
                ));
                StepVerdict::Discard
            } else if !new_smells.is_empty() {
                let names: Vec<_> = new_smells.iter().map(|s| s.kind.display_name()).collect();
                rationale.push(format!(
                    "New, less severe code smell introduced ({}); confidence lowered.",
                    names.join(", ")
                ));
                StepVerdict::Demote
            } else {
                rationale.push("No new code smells introduced.".to_string());
                StepVerdict::Pass
            }
        };
        SmellHealthStep { target_smell_resolved: resolved, delta: Some(delta), new_smells, verdict }
    }
}
