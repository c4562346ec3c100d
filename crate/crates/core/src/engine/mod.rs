//! Provider routing and the candidate pool.

pub mod extract;
pub mod http;
pub mod mock;
pub mod policy;
pub mod prompt;
pub mod provider;
pub mod replay;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{SourceFunction, SourceUnit};
use crate::smells::CodeSmell;
use crate::validation::{ConfidenceLevel, ValidationReport, Validator};

pub use policy::{ProviderSelector, SelectionPolicy};
pub use prompt::{build_prompt, PromptError, PromptSpec};
pub use provider::{extract_code_block, Provider, ProviderError, ProviderRequest, ProviderResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSettings {
    pub max_function_loc: u32,
    pub soft_warning_loc: u32,
    pub pool_size: usize,
    pub max_output_size: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            max_function_loc: prompt::DEFAULT_MAX_FUNCTION_LOC,
            soft_warning_loc: prompt::DEFAULT_SOFT_WARNING_LOC,
            pool_size: 3,
            max_output_size: 256 * 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub result: ProviderResult,
    pub report: ValidationReport,
    pub confidence: ConfidenceLevel,
    /// Inserted plus deleted lines relative to the original function.
    pub changed_lines: usize,
}

#[derive(Debug, Clone)]
pub struct Generation {
    pub prompt: PromptSpec,
    pub prompt_sha256: String,
    pub provider_id: String,
    /// Non-discarded candidates, best first.
    pub candidates: Vec<Candidate>,
    pub discarded: Vec<Candidate>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("selection policy chose unknown provider '{0}'")]
    UnknownProvider(String),
    #[error("provider '{provider_id}' unavailable: {}", errors.join("; "))]
    ProviderUnavailable { provider_id: String, errors: Vec<String> },
    #[error("all {} candidates were discarded by validation", discarded.len())]
    AllCandidatesDiscarded { discarded: Vec<Candidate> },
}

pub struct RefactorEngine {
    validator: Validator,
    providers: BTreeMap<String, Arc<dyn Provider>>,
    selector: Box<dyn ProviderSelector>,
    settings: EngineSettings,
}

/// Lines inserted or deleted going from `before` to `after`.
pub fn changed_line_count(before: &str, after: &str) -> usize {
    diffy::create_patch(before, after)
        .hunks()
        .iter()
        .flat_map(|h| h.lines())
        .filter(|l| !matches!(l, diffy::Line::Context(_)))
        .count()
}

/// Best first: confidence, then health improvement, then smaller edits.
fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    let gain = |c: &Candidate| c.report.health_change().unwrap_or(f64::NEG_INFINITY);
    b.confidence
        .cmp(&a.confidence)
        .then_with(|| gain(b).total_cmp(&gain(a)))
        .then_with(|| a.changed_lines.cmp(&b.changed_lines))
        .then_with(|| a.result.refactored_source.cmp(&b.result.refactored_source))
}

impl RefactorEngine {
    pub fn new(
        validator: Validator,
        providers: impl IntoIterator<Item = Arc<dyn Provider>>,
        selector: Box<dyn ProviderSelector>,
        settings: EngineSettings,
    ) -> Self {
        let providers = providers.into_iter().map(|p| (p.id().to_string(), p)).collect();
        Self { validator, providers, selector, settings }
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn validator(&self) -> &Validator {
        &self.validator
    }

    pub fn prompt_for(&self, unit: &SourceUnit, function: &SourceFunction, smell: &CodeSmell) -> Result<PromptSpec, PromptError> {
        let guidance = self.validator.registry.adapter(&unit.language).ok().and_then(|a| a.prompt_guidance().map(str::to_string));
        build_prompt(unit, function, smell, self.settings.max_function_loc, guidance.as_deref())
    }

    pub fn generate_candidates(
        &self,
        unit: &SourceUnit,
        function: &SourceFunction,
        smell: &CodeSmell,
    ) -> Result<Generation, EngineError> {
        let prompt = self.prompt_for(unit, function, smell)?;
        let mut warnings = Vec::new();
        if function.loc > self.settings.soft_warning_loc {
            warnings.push(format!(
                "function '{}' has {} lines of code; refactoring quality drops above {}",
                function.name, function.loc, self.settings.soft_warning_loc
            ));
        }
        let provider_id = self.selector.select(function, smell);
        let provider = self.providers.get(&provider_id).ok_or_else(|| EngineError::UnknownProvider(provider_id.clone()))?;
        let sections = prompt.sections();
        let prompt_sha256 = prompt.sha256();
        let pool = self.settings.pool_size.max(1);

        let outcomes: Vec<Result<ProviderResult, ProviderError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..pool)
                .map(|i| {
                    let request = ProviderRequest {
                        prompt_sections: sections.clone(),
                        temperature: 0.2 * i as f64,
                        max_output_size: self.settings.max_output_size,
                    };
                    let provider = Arc::clone(provider);
                    scope.spawn(move || {
                        let started = Instant::now();
                        let completion = provider.complete(&request)?;
                        if completion.text.len() > request.max_output_size {
                            return Err(ProviderError::TooLarge(request.max_output_size));
                        }
                        Ok(ProviderResult {
                            refactored_source: extract_code_block(&completion.text),
                            provider_id: provider.id().to_string(),
                            latency_ms: started.elapsed().as_millis() as u64,
                            raw_response_id: completion.response_id,
                        })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(ProviderError::Transport("provider call panicked".into()))))
                .collect()
        });

        let mut errors = Vec::new();
        let mut seen = HashSet::new();
        let mut candidates = Vec::new();
        for outcome in outcomes {
            match outcome {
                Err(e) => errors.push(e.to_string()),
                Ok(result) => {
                    if !seen.insert(result.refactored_source.clone()) {
                        continue;
                    }
                    let report = self.validator.validate(unit, function, smell, &result.refactored_source);
                    let original = unit.slice(&function.span);
                    candidates.push(Candidate {
                        confidence: report.confidence,
                        changed_lines: changed_line_count(original, result.refactored_source.trim_end()),
                        result,
                        report,
                    });
                }
            }
        }
        if candidates.is_empty() {
            return Err(EngineError::ProviderUnavailable { provider_id, errors });
        }
        let (mut kept, mut discarded): (Vec<_>, Vec<_>) =
            candidates.into_iter().partition(|c| c.confidence != ConfidenceLevel::Discard);
        kept.sort_by(rank);
        discarded.sort_by(rank);
        if kept.is_empty() {
            return Err(EngineError::AllCandidatesDiscarded { discarded });
        }
        Ok(Generation { prompt, prompt_sha256, provider_id, candidates: kept, discarded, warnings })
    }
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::mock::{MockBehavior, MockProvider};
    use super::*;
    use crate::health::HealthWeights;
    use crate::lang::LanguageRegistry;
    use crate::smells::{detect_all, Thresholds};

    const SRC: &str = "function other(x) {\n    return x;\n}\n\nfunction f(a, b, c) {\n    if (a > 1 && b || isOk(c)) {\n        log('x', 2);\n    }\n}\n";

    fn engine(behavior: MockBehavior) -> RefactorEngine {
        let registry = LanguageRegistry::default();
        let validator = Validator::new(registry.clone(), Thresholds::default(), HealthWeights::default());
        let provider: Arc<dyn Provider> = Arc::new(MockProvider::new("m", behavior, registry, Thresholds::default()));
        RefactorEngine::new(validator, [provider], Box::new(SelectionPolicy::fixed("m")), EngineSettings::default())
    }

    fn run(behavior: MockBehavior) -> Result<Generation, EngineError> {
        let unit = LanguageRegistry::default().unit_from_text(Path::new("t.mini"), SRC, "minilang").unwrap();
        let f = unit.function("f").unwrap().clone();
        let smell = detect_all(&f, &Thresholds::default()).remove(0);
        engine(behavior).generate_candidates(&unit, &f, &smell)
    }

    #[test]
    fn oracle_yields_one_high_candidate() {
        let g = run(MockBehavior::Oracle).unwrap();
        assert_eq!(g.candidates.len(), 1);
        let c = &g.candidates[0];
        assert_eq!(c.confidence, ConfidenceLevel::High, "{:#?}", c.report.rationale);
        assert!(c.report.health_change().unwrap() > 0.0);
        assert!(c.changed_lines > 0);
    }

    #[test]
    fn identity_and_garbage_are_discarded() {
        for b in [MockBehavior::Identity, MockBehavior::NoCode, MockBehavior::BreakSyntax] {
            assert!(matches!(run(b), Err(EngineError::AllCandidatesDiscarded { .. })), "{b}");
        }
        assert!(matches!(run(MockBehavior::Unavailable), Err(EngineError::ProviderUnavailable { .. })));
    }

    #[test]
    fn changed_lines() {
        assert_eq!(changed_line_count("a\nb\n", "a\nb\n"), 0);
        assert_eq!(changed_line_count("a\nb\n", "a\nc\n"), 2);
    }
}
