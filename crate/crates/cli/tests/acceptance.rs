//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Everything runs offline against mock and replay providers. A criterion
//! that panics counts as a failure; any failure makes the process exit 1.

mod common;

use std::io::{BufRead, BufReader};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{straight, with_complex_edit, Project, CLEAN};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use refactor_guard_core::analysis::analyze_unit;
use refactor_guard_core::engine::mock::{MockBehavior, MockProvider, OracleCache};
use refactor_guard_core::engine::prompt::PromptError;
use refactor_guard_core::engine::provider::fence;
use refactor_guard_core::engine::replay::{ReplayFixture, ReplayProvider};
use refactor_guard_core::engine::{EngineError, EngineSettings, Provider, RefactorEngine, SelectionPolicy};
use refactor_guard_core::health::{score_file, score_function, HealthWeights};
use refactor_guard_core::lang::LanguageRegistry;
use refactor_guard_core::model::{SourceSpan, SourceUnit};
use refactor_guard_core::smells::{detect_all, CodeSmell, SmellKind, Thresholds};
use refactor_guard_core::validation::{splice_function, ConfidenceLevel, Validator};
use refactor_guard_store::{ProposalStatus, RefactoringProposal, Store};
use refactor_guard_testkit::fixtures::{corruption_corpus, curated, mid};
use refactor_guard_testkit::gen::{generate, token_counts, GenConfig};
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    }};
}

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

fn load(name: &str, text: &str) -> Result<SourceUnit, String> {
    LanguageRegistry::default()
        .unit_from_text(Path::new(&format!("{name}.mini")), text, "minilang")
        .map_err(|e| format!("{name}: {e}"))
}

fn target(unit: &SourceUnit, function: &str, kind: &str) -> Result<CodeSmell, String> {
    let kind: SmellKind = kind.parse().map_err(|e| format!("{e:?}"))?;
    let f = unit.function(function).ok_or(format!("no function {function}"))?;
    detect_all(f, &Thresholds::default())
        .into_iter()
        .find(|s| s.kind == kind)
        .ok_or(format!("{function} has no {kind}"))
}

fn file_health(unit: &SourceUnit) -> f64 {
    analyze_unit(unit, &Thresholds::default(), &HealthWeights::default()).score.value
}

/// Thresholds low enough that every detector reports its metric.
fn observe_all() -> Thresholds {
    Thresholds {
        complex_conditional_min_ops: 1,
        complex_method_min_cc: 1,
        deep_nesting_min_depth: 1,
        bumpy_road_min_bumps: 1,
        bumpy_road_bump_depth: 2,
        large_method_min_loc: 1,
    }
}

fn detector_oracle() -> Outcome {
    const FUNCTIONS: u64 = 400;
    let cfg = GenConfig::default();
    let registry = LanguageRegistry::default();
    let (mut deepest, mut most_ops, mut longest, mut shortest) = (0, 0, 0, u32::MAX);
    for seed in 0..FUNCTIONS {
        let g = generate(0xACCE_0000 + seed, &cfg);
        let fns = registry.parse_unit(&g.source, "minilang").map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(fns.len() == 1, "seed {seed}: {} functions", fns.len());
        let f = &fns[0];
        let o = &g.oracle;
        let smells = detect_all(f, &observe_all());
        let metric = |k: SmellKind| -> Vec<u32> {
            let mut v: Vec<u32> = smells.iter().filter(|s| s.kind == k).map(|s| s.metric_value as u32).collect();
            v.sort_unstable();
            v
        };
        let single = |v: u32| if v == 0 { vec![] } else { vec![v] };
        let expect_cc: Vec<u32> = o.condition_ops.iter().copied().filter(|n| *n > 0).collect();
        let checks = [
            (SmellKind::ComplexMethod, single(o.cyclomatic_complexity)),
            (SmellKind::DeepNestedLogic, single(o.max_depth)),
            (SmellKind::BumpyRoad, single(o.bumps)),
            (SmellKind::LargeMethod, single(o.loc)),
            (SmellKind::ComplexConditional, expect_cc),
        ];
        for (kind, expected) in checks {
            let got = metric(kind);
            ensure!(got == expected, "seed {seed} {kind}: detector {got:?}, recount {expected:?}\n{}", g.source);
        }
        // Text-only recount, independent of any tree.
        let t = token_counts(&g.source);
        ensure!(t.code_lines == f.loc, "seed {seed}: token LoC {} vs {}", t.code_lines, f.loc);
        ensure!(
            t.branch_keywords + t.question_marks + 1 == o.cyclomatic_complexity && t.logical_ops == o.logical_ops,
            "seed {seed}: token recount of branches or operators disagrees"
        );
        deepest = deepest.max(o.max_depth);
        most_ops = most_ops.max(o.condition_ops.iter().copied().max().unwrap_or(0));
        longest = longest.max(o.loc);
        shortest = shortest.min(o.loc);
    }
    ensure!(deepest >= 6, "generator never reached depth 6 (max {deepest})");
    ensure!(most_ops >= 8, "generator never reached 8 operators (max {most_ops})");
    Ok(format!(
        "{FUNCTIONS} functions, 5 detectors exact; depth<={deepest}, ops<={most_ops}, LoC {shortest}..={longest}"
    ))
}

fn guardrail_precision() -> Outcome {
    let fixtures = corruption_corpus(56);
    ensure!(fixtures.len() >= 50, "only {} fixtures", fixtures.len());
    let cache = OracleCache::default();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = Store::open(dir.path(), validator()).map_err(|e| e.to_string())?;
    let mut corrupted = 0;
    for behavior in MockBehavior::CORRUPTING {
        let engine = engine_with(mock(behavior, &cache));
        for fx in &fixtures {
            let unit = load(&fx.name, &fx.source)?;
            let f = unit.function(&fx.function).ok_or("fixture function")?;
            let smell = target(&unit, &fx.function, fx.kind)?;
            match engine.generate_candidates(&unit, f, &smell) {
                Err(EngineError::AllCandidatesDiscarded { discarded }) => {
                    for c in &discarded {
                        ensure!(c.confidence == ConfidenceLevel::Discard, "{behavior} {}: {:?}", fx.name, c.confidence);
                        corrupted += 1;
                        // Even a caller that tries cannot store a discarded candidate.
                        let p = RefactoringProposal::from_candidate(&unit, f, &smell, "0", c);
                        ensure!(store.persist(p).is_err(), "{behavior} {}: store accepted a discarded candidate", fx.name);
                    }
                }
                Ok(g) => return Err(format!("{behavior} {}: {:?} survived", fx.name, g.candidates[0].confidence)),
                Err(e) => return Err(format!("{behavior} {}: {e}", fx.name)),
            }
        }
    }
    let stored = store.load_all().map_err(|e| e.to_string())?.len();
    ensure!(stored == 0, "{stored} proposals reached the store");
    Ok(format!("{corrupted} corrupted candidates over {} fixtures x 4 behaviors, 100% Discard, 0 stored", fixtures.len()))
}

fn oracle_recall() -> Outcome {
    let fixtures = curated();
    ensure!(fixtures.len() >= 20, "only {} fixtures", fixtures.len());
    for kind in SmellKind::ALL {
        ensure!(fixtures.iter().any(|f| f.kind == kind.to_string()), "no fixture for {kind}");
    }
    let engine = engine_with(mock(MockBehavior::Oracle, &OracleCache::default()));
    let mut candidates = 0;
    for fx in &fixtures {
        let unit = load(&fx.name, &fx.source)?;
        let f = unit.function(&fx.function).ok_or("fixture function")?;
        let smell = target(&unit, &fx.function, fx.kind)?;
        let g = engine.generate_candidates(&unit, f, &smell).map_err(|e| format!("{}: {e}", fx.name))?;
        let before_text = unit.slice(&smell.span).to_string();
        let before_count = detect_all(f, &Thresholds::default()).iter().filter(|s| s.kind == smell.kind).count();
        for c in &g.candidates {
            candidates += 1;
            ensure!(c.confidence == ConfidenceLevel::High, "{}: {:?} {:?}", fx.name, c.confidence, c.report.rationale);
            let after = load(&fx.name, &splice_function(&unit, f, &c.result.refactored_source))?;
            ensure!(file_health(&after) > file_health(&unit), "{}: CodeHealth did not improve", fx.name);
            // The target is gone: no smell of its kind covers the same code
            // anywhere in the file, and the kind's count did not grow.
            let remaining: Vec<CodeSmell> = after
                .functions
                .iter()
                .flat_map(|g| detect_all(g, &Thresholds::default()))
                .filter(|s| s.kind == smell.kind)
                .collect();
            ensure!(
                remaining.iter().all(|s| after.slice(&s.span) != before_text),
                "{}: target {} still present",
                fx.name,
                smell.kind
            );
            ensure!(remaining.len() < before_count, "{}: {} {} smells remain of {before_count}", fx.name, remaining.len(), smell.kind);
        }
    }
    Ok(format!("{candidates} candidates over {} fixtures, all High, health up, target gone", fixtures.len()))
}

fn mid_demotion() -> Outcome {
    let fixtures = mid();
    for fx in &fixtures {
        let unit = load(fx.name, fx.source)?;
        let f = unit.function(fx.function).ok_or("fixture function")?;
        let smell = target(&unit, fx.function, fx.kind)?;
        let probe = engine_with(Arc::new(ReplayProvider::new("replay", [])));
        let sha = probe.prompt_for(&unit, f, &smell).map_err(|e| e.to_string())?.sha256();
        let replay = ReplayProvider::new("replay", [ReplayFixture { prompt_sha256: sha, response: fence("minilang", fx.refactored) }]);
        let g = engine_with(Arc::new(replay)).generate_candidates(&unit, f, &smell).map_err(|e| format!("{}: {e}", fx.name))?;
        ensure!(g.candidates.len() == 1, "{}: {} candidates", fx.name, g.candidates.len());
        let c = &g.candidates[0];
        ensure!(c.confidence == ConfidenceLevel::Mid, "{}: {:?} {:?}", fx.name, c.confidence, c.report.rationale);
        let step = c.report.smell_health.as_ref().ok_or("no smell step")?;
        ensure!(step.target_smell_resolved, "{}: target not resolved", fx.name);
        ensure!(step.new_smells.len() == 1, "{}: {} new smells", fx.name, step.new_smells.len());
        let introduced: SmellKind = fx.introduced.parse().map_err(|e| format!("{e:?}"))?;
        ensure!(step.new_smells[0].kind == introduced && step.new_smells[0].less_severe, "{}: {:?}", fx.name, step.new_smells[0]);
        ensure!(introduced.severity_rank() > smell.kind.severity_rank(), "{}: introduced smell is not less severe", fx.name);
    }
    Ok(format!("{} fixtures, each Mid with exactly one less-severe new smell", fixtures.len()))
}

fn random_smell(rng: &mut StdRng) -> CodeSmell {
    let kind = SmellKind::ALL[rng.gen_range(0..SmellKind::ALL.len())];
    let line = rng.gen_range(1..200);
    CodeSmell {
        kind,
        function: "f".into(),
        span: SourceSpan::new("r.mini", (line, 1), (line, 2)),
        metric_value: 1.0,
        threshold: 1.0,
    }
}

fn health_contract() -> Outcome {
    const LISTS: usize = 2000;
    let weights = HealthWeights::default();
    let mut rng = StdRng::seed_from_u64(0x5EED);
    let in_range = |v: f64| (1.0..=10.0).contains(&v);
    for i in 0..LISTS {
        let smells: Vec<CodeSmell> = (0..rng.gen_range(0..25)).map(|_| random_smell(&mut rng)).collect();
        let score = score_function(&smells, &weights).value;
        ensure!(in_range(score), "list {i}: score {score}");
        ensure!((score == 10.0) == smells.is_empty(), "list {i}: score {score} with {} smells", smells.len());
        let mut more = smells.clone();
        more.insert(rng.gen_range(0..=smells.len()), random_smell(&mut rng));
        let after = score_function(&more, &weights).value;
        ensure!(after <= score, "list {i}: adding a smell raised {score} to {after}");

        // The same at file level, next to a random neighbour.
        let loc = rng.gen_range(1..150);
        let neighbour = score_function(&[random_smell(&mut rng)], &weights);
        let (a, b) = (score_function(&smells, &weights), score_function(&more, &weights));
        let fa = score_file([(loc, &a), (40, &neighbour)]).value;
        let fb = score_file([(loc, &b), (40, &neighbour)]).value;
        ensure!(in_range(fa) && fb <= fa, "list {i}: file scores {fa} then {fb}");
    }
    // Real corpora: generated files.
    let registry = LanguageRegistry::default();
    for seed in 0..300 {
        let g = generate(seed, &GenConfig::default());
        let unit = registry.unit_from_text(Path::new("g.mini"), &g.source, "minilang").map_err(|e| e.to_string())?;
        let report = analyze_unit(&unit, &Thresholds::default(), &weights);
        ensure!(in_range(report.score.value), "seed {seed}: {}", report.score.value);
        for f in &report.functions {
            ensure!((f.score.value == 10.0) == f.smells.is_empty(), "seed {seed}: {} with {:?}", f.score.value, f.smells);
        }
    }
    Ok(format!("{LISTS} random smell lists plus 300 generated files"))
}

fn gate_json(p: &Project) -> Result<(i32, Value), String> {
    let r = p.run(&["gate", "--json", "src"]);
    let v = serde_json::from_str(&r.stdout).map_err(|e| format!("gate output: {e}\n{}\n{}", r.stdout, r.stderr))?;
    Ok((r.code, v))
}

fn quality_gate() -> Outcome {
    let p = Project::new();
    std::fs::create_dir(p.path("src")).map_err(|e| e.to_string())?;
    p.write("src/classify.mini", CLEAN);
    p.write("src/other.mini", "function other(a) {\n    return a * 2;\n}\n");
    let r = p.run(&["baseline", "src"]);
    ensure!(r.code == 0, "baseline exited {}: {}", r.code, r.stderr);
    let (code, _) = gate_json(&p)?;
    ensure!(code == 0, "unchanged corpus: gate exited {code}");

    let edited = with_complex_edit();
    let unit = load("edit", &edited)?;
    let cc = detect_all(unit.function("classify").ok_or("classify")?, &Thresholds::default());
    ensure!(cc.len() == 1 && cc[0].metric_value == 12.0, "seeded edit is not a lone CC-12 smell: {cc:?}");
    p.write("src/classify.mini", &edited);
    let (code, v) = gate_json(&p)?;
    ensure!(code == 1, "seeded decline: gate exited {code}");
    let declines = v["gate"]["declines"].as_array().ok_or("declines")?;
    ensure!(declines.len() == 1, "{} declines", declines.len());
    ensure!(declines[0]["function"] == "classify", "decline {}", declines[0]);
    let targets = v["gate"]["targets"].as_array().ok_or("targets")?;
    ensure!(targets.len() == 1 && targets[0]["kind"] == "ComplexMethod", "targets {targets:?}");

    p.write("src/classify.mini", CLEAN);
    let (code, _) = gate_json(&p)?;
    ensure!(code == 0, "after revert: gate exited {code}");
    Ok("pass -> 1 decline, target ComplexMethod (exit 1) -> pass after revert".into())
}

fn size_limits() -> Outcome {
    let engine = engine_with(mock(MockBehavior::Oracle, &OracleCache::default()));
    for (loc, fits) in [(130, true), (131, false)] {
        let unit = load("big", &straight(loc))?;
        let f = &unit.functions[0];
        ensure!(f.loc == loc, "fixture has {} LoC, wanted {loc}", f.loc);
        let smell = detect_all(f, &Thresholds::default()).into_iter().next().ok_or("no smell")?;
        match (engine.generate_candidates(&unit, f, &smell), fits) {
            (Err(EngineError::Prompt(PromptError::FunctionTooLarge { loc: l, max: 130, .. })), false) if l == loc => {}
            (Ok(g), true) => ensure!(!g.candidates.is_empty(), "130 LoC produced no candidate"),
            (other, _) => return Err(format!("{loc} LoC: {:?}", other.map(|g| g.candidates.len()))),
        }
    }
    let p = Project::new();
    p.write("big.mini", &straight(131));
    let r = p.run(&["refactor", "big.mini"]);
    ensure!(r.code == 1 && r.stderr.contains("130"), "CLI at 131 LoC: exit {} {}", r.code, r.stderr);
    Ok("131 LoC -> FunctionTooLarge (limit 130, CLI exit 1); 130 LoC processed".into())
}

/// The binary serving a store, killed on drop.
struct LiveService {
    child: Child,
    base: String,
}

impl Drop for LiveService {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn start_service(p: &Project) -> Result<LiveService, String> {
    let mut child = p
        .command()
        .args(["serve", "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(child.stdout.take().ok_or("stdout")?).read_line(&mut line).map_err(|e| e.to_string())?;
    let base = line.trim().strip_prefix("listening on ").ok_or(format!("unexpected banner {line:?}"))?.to_string();
    Ok(LiveService { child, base })
}

fn seed_proposal(store: &Store, file: &Path) -> Result<String, String> {
    let unit = LanguageRegistry::default().load_unit(file).map_err(|e| e.to_string())?;
    let f = unit.function("classify").ok_or("classify")?;
    let smell = target(&unit, "classify", "ComplexMethod")?;
    let engine = engine_with(mock(MockBehavior::Oracle, &OracleCache::default()));
    let g = engine.generate_candidates(&unit, f, &smell).map_err(|e| e.to_string())?;
    let p = RefactoringProposal::from_candidate(&unit, f, &smell, &g.prompt_sha256, &g.candidates[0]);
    store.persist(p).map_err(|e| e.to_string())
}

fn store_and_service() -> Outcome {
    let p = Project::new();
    let store = Store::open(p.path(".refactor-guard"), validator()).map_err(|e| e.to_string())?;
    let files: Vec<PathBuf> = ["a", "b", "c"].iter().map(|n| p.write(&format!("{n}.mini"), &with_complex_edit())).collect();
    let ids: Vec<String> = files.iter().map(|f| seed_proposal(&store, f)).collect::<Result<_, _>>()?;
    let (a, b, c) = (&ids[0], &ids[1], &ids[2]);

    let service = start_service(&p)?;
    let http = reqwest::blocking::Client::builder().timeout(Duration::from_secs(10)).build().map_err(|e| e.to_string())?;
    let url = |path: &str| format!("{}{path}", service.base);
    let call = |method: &str, path: &str, body: Option<Value>| -> Result<(u16, Value), String> {
        let req = match method {
            "GET" => http.get(url(path)),
            _ => http.post(url(path)),
        };
        let req = match body {
            Some(b) => req.json(&b),
            None => req,
        };
        let resp = req.send().map_err(|e| format!("{method} {path}: {e}"))?;
        let status = resp.status().as_u16();
        let value = resp.json::<Value>().unwrap_or(Value::Null);
        Ok((status, value))
    };
    let expect = |method: &str, path: &str, body: Option<Value>, want: u16| -> Result<Value, String> {
        let (status, v) = call(method, path, body)?;
        ensure!(status == want, "{method} {path}: {status}, wanted {want}: {v}");
        Ok(v)
    };

    let list = expect("GET", "/api/proposals", None, 200)?;
    ensure!(list.as_array().map(Vec::len) == Some(3), "list {list}");
    for key in ["id", "file", "function", "smell_kind", "confidence", "status", "created_at"] {
        ensure!(list[0].get(key).is_some(), "summary lacks {key}");
    }
    expect("GET", "/api/proposals?status=pending&confidence=High", None, 200)?;
    expect("GET", "/api/proposals?status=bogus", None, 400)?;
    let full = expect("GET", &format!("/api/proposals/{a}"), None, 200)?;
    ensure!(full["unified_diff"].is_string() && full["report"].is_object(), "detail {full}");
    expect("GET", "/api/proposals/01ARZ3NDEKTSV4RRFFQ69G5FAV", None, 404)?;

    let applied = expect("POST", &format!("/api/proposals/{a}/accept"), None, 200)?;
    ensure!(applied["file"].is_string() && applied["new_file_health"].is_number(), "accept {applied}");
    expect("POST", &format!("/api/proposals/{a}/accept"), None, 409)?;
    expect("POST", &format!("/api/proposals/{a}/reject"), None, 409)?;
    expect("POST", "/api/proposals/01ARZ3NDEKTSV4RRFFQ69G5FAV/accept", None, 404)?;
    expect("POST", "/api/proposals/01ARZ3NDEKTSV4RRFFQ69G5FAV/reject", None, 404)?;

    let rejected = expect("POST", &format!("/api/proposals/{b}/reject"), Some(json!({"reason": "prefer a table"})), 200)?;
    ensure!(rejected["status"] == "rejected" && rejected["decision_reason"] == "prefer a table", "reject {rejected}");

    // Someone edits c.mini after the proposal was made.
    std::fs::write(&files[2], with_complex_edit().replace("return 5;", "return 55;")).map_err(|e| e.to_string())?;
    expect("POST", &format!("/api/proposals/{c}/accept"), None, 422)?;
    let drifted = expect("GET", &format!("/api/proposals/{c}"), None, 200)?;
    ensure!(drifted["status"] == "rejected", "drifted proposal is {}", drifted["status"]);

    let summary = expect("GET", "/api/summary", None, 200)?;
    ensure!(summary["pending"] == 0 && summary["accepted"] == 1 && summary["rejected"] == 2, "summary {summary}");
    ensure!(summary["mean_health_delta"].as_f64().is_some_and(|d| d > 0.0), "summary {summary}");

    // Crash between temp write and rename: the temp file stays behind.
    let extra = p.write("d.mini", &with_complex_edit());
    let unit = LanguageRegistry::default().load_unit(&extra).map_err(|e| e.to_string())?;
    let f = unit.function("classify").ok_or("classify")?;
    let smell = target(&unit, "classify", "ComplexMethod")?;
    let g = engine_with(mock(MockBehavior::Oracle, &OracleCache::default()))
        .generate_candidates(&unit, f, &smell)
        .map_err(|e| e.to_string())?;
    let staged = store
        .stage(RefactoringProposal::from_candidate(&unit, f, &smell, &g.prompt_sha256, &g.candidates[0]))
        .map_err(|e| e.to_string())?;
    let temp = staged.temp_path().to_path_buf();
    std::mem::forget(staged);
    ensure!(temp.exists(), "no temp file left by the simulated crash");
    let reopened = Store::open(p.path(".refactor-guard"), validator()).map_err(|e| e.to_string())?;
    let all = reopened.load_all().map_err(|e| format!("store unloadable after crash: {e}"))?;
    ensure!(all.len() == 3, "{} proposals after crash", all.len());
    ensure!(all.iter().all(|p| p.status != ProposalStatus::Pending), "a pending proposal appeared");
    let list = expect("GET", "/api/proposals", None, 200)?;
    ensure!(list.as_array().map(Vec::len) == Some(3), "service list after crash {list}");
    let fresh = seed_proposal(&reopened, &extra)?;
    expect("GET", &format!("/api/proposals/{fresh}"), None, 200)?;
    Ok("200/400/404/409/422 paths against the live binary; store loadable after interrupted write".into())
}

type Criterion = (u8, &'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 8] = [
        (1, "detector oracle equivalence", detector_oracle, secs(10)),
        (2, "guardrail precision", guardrail_precision, secs(30)),
        (3, "oracle recall path", oracle_recall, None),
        (4, "mid-confidence demotion", mid_demotion, None),
        (5, "CodeHealth contract", health_contract, None),
        (6, "quality gate end-to-end", quality_gate, None),
        (7, "size limits", size_limits, None),
        (8, "store/service contract", store_and_service, secs(30)),
    ];
    // Panics are reported as failures, not as noise.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(max)) if elapsed > max => Err(format!("took {elapsed:.2?}, limit {max:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {n} {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n} {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
