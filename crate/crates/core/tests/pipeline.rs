//! End-to-end engine runs over the curated fixtures.

use std::path::Path;
use std::sync::Arc;

use refactor_guard_core::analysis::analyze_unit;
use refactor_guard_core::engine::mock::{MockBehavior, MockProvider, OracleCache};
use refactor_guard_core::engine::provider::fence;
use refactor_guard_core::engine::replay::{ReplayFixture, ReplayProvider};
use refactor_guard_core::engine::{EngineError, EngineSettings, Provider, RefactorEngine, SelectionPolicy};
use refactor_guard_core::health::HealthWeights;
use refactor_guard_core::lang::LanguageRegistry;
use refactor_guard_core::model::SourceUnit;
use refactor_guard_core::smells::{detect_all, CodeSmell, SmellKind, Thresholds};
use refactor_guard_core::validation::{splice_function, ConfidenceLevel, Validator};
use refactor_guard_testkit::fixtures::{corruption_corpus, curated, mid, Fixture};

fn validator() -> Validator {
    Validator::new(LanguageRegistry::default(), Thresholds::default(), HealthWeights::default())
}

fn engine_with(provider: Arc<dyn Provider>) -> RefactorEngine {
    let id = provider.id().to_string();
    RefactorEngine::new(validator(), [provider], Box::new(SelectionPolicy::fixed(id)), EngineSettings::default())
}

fn mock(behavior: MockBehavior, cache: &OracleCache) -> Arc<dyn Provider> {
    let p = MockProvider::new(behavior.to_string(), behavior, LanguageRegistry::default(), Thresholds::default());
    Arc::new(p.with_cache(cache.clone()))
}

fn load(name: &str, text: &str) -> SourceUnit {
    LanguageRegistry::default()
        .unit_from_text(Path::new(&format!("{name}.mini")), text, "minilang")
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn target(unit: &SourceUnit, function: &str, kind: &str) -> CodeSmell {
    let kind: SmellKind = kind.parse().unwrap();
    let f = unit.function(function).unwrap();
    detect_all(f, &Thresholds::default())
        .into_iter()
        .find(|s| s.kind == kind)
        .unwrap_or_else(|| panic!("{function} has no {kind:?}"))
}

fn score(unit: &SourceUnit) -> f64 {
    analyze_unit(unit, &Thresholds::default(), &HealthWeights::default()).score.value
}

#[test]
fn oracle_resolves_every_curated_fixture_at_high_confidence() {
    let cache = OracleCache::default();
    let engine = engine_with(mock(MockBehavior::Oracle, &cache));
    let mut failures = Vec::new();
    for fx in curated() {
        let unit = load(&fx.name, &fx.source);
        let f = unit.function(&fx.function).unwrap();
        let smell = target(&unit, &fx.function, fx.kind);
        let generation = match engine.generate_candidates(&unit, f, &smell) {
            Ok(g) => g,
            Err(EngineError::AllCandidatesDiscarded { discarded }) => {
                failures.push(format!("{}: discarded {:#?}", fx.name, discarded[0].report.rationale));
                continue;
            }
            Err(e) => panic!("{}: {e}", fx.name),
        };
        for c in &generation.candidates {
            if c.confidence != ConfidenceLevel::High {
                failures.push(format!("{}: {:?} {:#?}\n{}", fx.name, c.confidence, c.report.rationale, c.result.refactored_source));
                continue;
            }
            let after = load(&fx.name, &splice_function(&unit, f, &c.result.refactored_source));
            assert!(score(&after) > score(&unit), "{}", fx.name);
            let entry = after.function(&fx.function).unwrap();
            assert!(!detect_all(entry, &Thresholds::default()).iter().any(|s| s.kind == smell.kind && s.span.start_line == smell.span.start_line && smell.kind != SmellKind::ComplexConditional), "{}", fx.name);
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n\n"));
}

fn corrupted_outcomes(fixtures: &[Fixture], behavior: MockBehavior, cache: &OracleCache) -> Vec<String> {
    let engine = engine_with(mock(behavior, cache));
    let mut leaks = Vec::new();
    for fx in fixtures {
        let unit = load(&fx.name, &fx.source);
        let f = unit.function(&fx.function).unwrap();
        let smell = target(&unit, &fx.function, fx.kind);
        match engine.generate_candidates(&unit, f, &smell) {
            Err(EngineError::AllCandidatesDiscarded { .. }) => {}
            Ok(g) => leaks.push(format!("{behavior} {}: {:?}\n{}", fx.name, g.candidates[0].confidence, g.candidates[0].result.refactored_source)),
            Err(e) => leaks.push(format!("{behavior} {}: unexpected {e}", fx.name)),
        }
    }
    leaks
}

#[test]
fn corrupting_providers_are_always_discarded() {
    let fixtures = corruption_corpus(56);
    let cache = OracleCache::default();
    let mut leaks = Vec::new();
    for behavior in MockBehavior::CORRUPTING {
        leaks.extend(corrupted_outcomes(&fixtures, behavior, &cache));
    }
    assert!(leaks.is_empty(), "{}", leaks.join("\n\n"));
}

#[test]
fn identity_is_discarded() {
    let fixtures = curated();
    let leaks = corrupted_outcomes(&fixtures, MockBehavior::Identity, &OracleCache::default());
    assert!(leaks.is_empty(), "{}", leaks.join("\n\n"));
}

#[test]
fn one_less_severe_smell_demotes_to_mid() {
    for fx in mid() {
        let unit = load(fx.name, fx.source);
        let f = unit.function(fx.function).unwrap();
        let smell = target(&unit, fx.function, fx.kind);
        let probe = engine_with(Arc::new(ReplayProvider::new("replay", [])));
        let sha = probe.prompt_for(&unit, f, &smell).unwrap().sha256();
        let replay = ReplayProvider::new(
            "replay",
            [ReplayFixture { prompt_sha256: sha, response: fence("minilang", fx.refactored) }],
        );
        let g = engine_with(Arc::new(replay)).generate_candidates(&unit, f, &smell).unwrap();
        assert_eq!(g.candidates.len(), 1, "{}", fx.name);
        let c = &g.candidates[0];
        assert_eq!(c.confidence, ConfidenceLevel::Mid, "{}: {:#?}", fx.name, c.report.rationale);
        let step = c.report.smell_health.as_ref().unwrap();
        assert!(step.target_smell_resolved);
        let introduced: SmellKind = fx.introduced.parse().unwrap();
        assert_eq!(step.new_smells.len(), 1, "{}", fx.name);
        assert_eq!(step.new_smells[0].kind, introduced);
        assert!(step.new_smells[0].less_severe);
    }
}
