use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use refactor_guard_core::analysis::FileReport;
use refactor_guard_core::config::EngineConfig;
use refactor_guard_core::engine::prompt::PromptError;
use refactor_guard_core::engine::{EngineError, Generation, RefactorEngine};
use refactor_guard_core::gate::{evaluate_gate, path_key, scan as scan_paths, snapshot_baseline, Baseline, GateStatus};
use refactor_guard_core::model::{SourceFunction, SourceUnit};
use refactor_guard_core::smells::{detect_all, CodeSmell, SmellKind};
use refactor_guard_core::validation::{splice_function, ConfidenceLevel};
use refactor_guard_store::store::write_atomic;
use refactor_guard_store::{RefactoringProposal, Store};
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unusable input or configuration.
    #[error("{0}")]
    Usage(String),
    /// A well-formed request with a negative answer.
    #[error("{0}")]
    Negative(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Negative(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

type Outcome = Result<u8, CliError>;

fn smell_line(s: &CodeSmell) -> String {
    format!(
        "{} at {}:{}-{}:{} (metric {}, threshold {})",
        s.kind, s.span.start_line, s.span.start_col, s.span.end_line, s.span.end_col, s.metric_value, s.threshold
    )
}

fn report_json(r: &FileReport) -> serde_json::Value {
    json!({
        "path": path_key(&r.path),
        "score": r.score.value,
        "functions": r.functions.iter().map(|f| json!({
            "name": f.name,
            "loc": f.loc,
            "score": f.score.value,
            "smells": f.smells,
        })).collect::<Vec<_>>(),
    })
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value"));
}

pub fn scan(config: &EngineConfig, paths: &[PathBuf], as_json: bool) -> Outcome {
    let registry = config.registry();
    let (reports, skipped) = scan_paths(paths, &registry, &config.thresholds, &config.health_weights);
    if as_json {
        print_json(&json!({
            "files": reports.iter().map(report_json).collect::<Vec<_>>(),
            "skipped": skipped,
        }));
    } else {
        for r in &reports {
            println!("{}  CodeHealth {:.2}", path_key(&r.path), r.score.value);
            for f in &r.functions {
                println!("  {}  {:.2}", f.name, f.score.value);
                for s in &f.smells {
                    println!("    {}", smell_line(s));
                }
            }
        }
    }
    for s in &skipped {
        eprintln!("error: {}: {}", s.path, s.reason);
    }
    Ok(if skipped.is_empty() { 0 } else { 2 })
}

pub fn baseline(config: &EngineConfig, paths: &[PathBuf], output: &Path) -> Outcome {
    let registry = config.registry();
    let b = snapshot_baseline(paths, &registry, &config.thresholds, &config.health_weights).map_err(usage)?;
    b.save(output).map_err(usage)?;
    for s in &b.skipped {
        eprintln!("warning: skipped {}: {}", s.path, s.reason);
    }
    let functions: usize = b.files.values().map(|f| f.functions.len()).sum();
    println!("baseline written to {} ({} files, {} functions)", output.display(), b.files.len(), functions);
    Ok(0)
}

fn open_store(config: &EngineConfig) -> Result<Store, CliError> {
    Store::open(&config.store_dir, config.validator()).map_err(usage)
}

fn engine(config: &EngineConfig) -> Result<RefactorEngine, CliError> {
    config.build_engine().map_err(usage)
}

/// Persists every surviving candidate; returns the new ids.
fn persist_all(store: &Store, unit: &SourceUnit, f: &SourceFunction, smell: &CodeSmell, g: &Generation) -> Result<Vec<String>, CliError> {
    g.candidates
        .iter()
        .map(|c| store.persist(RefactoringProposal::from_candidate(unit, f, smell, &g.prompt_sha256, c)).map_err(usage))
        .collect()
}

fn describe_failure(e: &EngineError) -> String {
    match e {
        EngineError::AllCandidatesDiscarded { discarded } => {
            let mut msg = e.to_string();
            for c in discarded {
                if let Some(last) = c.report.rationale.iter().rev().find(|l| !l.starts_with("Confidence")) {
                    msg.push_str(&format!("\n  {}: {last}", c.result.provider_id));
                }
            }
            msg
        }
        _ => e.to_string(),
    }
}

fn engine_error(e: EngineError) -> CliError {
    match e {
        EngineError::UnknownProvider(_) => usage(e),
        EngineError::Prompt(PromptError::FunctionTooLarge { .. }) => CliError::Negative(e.to_string()),
        other => CliError::Negative(describe_failure(&other)),
    }
}

pub fn gate(config: &EngineConfig, baseline: &Path, paths: &[PathBuf], propose: bool, as_json: bool) -> Outcome {
    let registry = config.registry();
    let b = Baseline::load(baseline).map_err(usage)?;
    let result = evaluate_gate(&b, paths, &registry, &config.thresholds, &config.health_weights).map_err(usage)?;

    let mut proposals = Vec::new();
    let mut problems = Vec::new();
    if propose && result.status == GateStatus::Fail {
        let engine = engine(config)?;
        let store = open_store(config)?;
        for smell in &result.targets {
            let unit = registry.load_unit(&smell.span.file).map_err(usage)?;
            let Some(f) = unit.functions.iter().find(|f| f.name == smell.function && f.span.contains(&smell.span)) else {
                continue;
            };
            match engine.generate_candidates(&unit, f, smell) {
                Ok(g) => proposals.extend(persist_all(&store, &unit, f, smell, &g)?),
                Err(e) => problems.push(format!("{} in {}: {}", smell.kind, smell.function, describe_failure(&e))),
            }
        }
    }

    if as_json {
        print_json(&json!({ "gate": result, "proposals": proposals, "errors": problems }));
    } else {
        match result.status {
            GateStatus::Pass => println!("gate passed"),
            GateStatus::Fail => println!("gate failed: {} declined function(s)", result.declines.len()),
        }
        for d in &result.declines {
            let new = if d.new_function { " (new function)" } else { "" };
            println!("  decline {}:{}  {:.2} -> {:.2}{new}", d.file, d.function, d.before, d.after);
        }
        for t in &result.targets {
            println!("  target {} {}", t.function, smell_line(t));
        }
        for id in &proposals {
            println!("  proposal {id}");
        }
        for p in &problems {
            println!("  no proposal: {p}");
        }
    }
    for s in &result.skipped {
        eprintln!("warning: skipped {}: {}", s.path, s.reason);
    }
    Ok(match result.status {
        GateStatus::Pass => 0,
        GateStatus::Fail => 1,
    })
}

/// The smell to work on: the most severe match, earliest first.
fn pick_target<'a>(
    unit: &'a SourceUnit,
    config: &EngineConfig,
    function: Option<&str>,
    kind: Option<SmellKind>,
) -> Result<(&'a SourceFunction, CodeSmell), CliError> {
    if let Some(name) = function {
        if unit.function(name).is_none() {
            return Err(CliError::Negative(format!("nothing to refactor: no function '{name}' in {}", unit.path.display())));
        }
    }
    unit.functions
        .iter()
        .filter(|f| function.is_none_or(|n| f.name == n))
        .flat_map(|f| detect_all(f, &config.thresholds).into_iter().map(move |s| (f, s)))
        .filter(|(_, s)| kind.is_none_or(|k| s.kind == k))
        .min_by_key(|(_, s)| (s.kind.severity_rank(), s.span.start()))
        .ok_or_else(|| CliError::Negative("nothing to refactor: no matching smell".into()))
}

pub fn refactor(config: &EngineConfig, path: &Path, function: Option<&str>, smell: Option<&str>, apply: bool) -> Outcome {
    let kind = smell.map(|s| s.parse::<SmellKind>()).transpose().map_err(usage)?;
    let registry = config.registry();
    let unit = registry.load_unit(path).map_err(usage)?;
    let (f, target) = pick_target(&unit, config, function, kind)?;
    let engine = engine(config)?;
    println!("target: {} {}", f.name, smell_line(&target));

    let g = engine.generate_candidates(&unit, f, &target).map_err(engine_error)?;
    for w in &g.warnings {
        eprintln!("warning: {w}");
    }
    for c in &g.candidates {
        println!(
            "candidate from {}: {:?} confidence, CodeHealth {:+.2}, {} changed lines",
            c.result.provider_id,
            c.confidence,
            c.report.health_change().unwrap_or(0.0),
            c.changed_lines
        );
    }
    let best = &g.candidates[0];
    if apply && best.confidence == ConfidenceLevel::High {
        let text = splice_function(&unit, f, &best.result.refactored_source);
        write_atomic(path, text.as_bytes()).map_err(usage)?;
        println!("applied to {}", path.display());
        return Ok(0);
    }
    let store = open_store(config)?;
    for id in persist_all(&store, &unit, f, &target, &g)? {
        println!("proposal {id}");
    }
    if apply {
        println!("review required: best candidate has {:?} confidence; nothing was applied", best.confidence);
    }
    Ok(0)
}

pub fn serve(config: &EngineConfig, addr: SocketAddr, ui_dir: Option<PathBuf>) -> Outcome {
    use refactor_guard_store::service;

    let store = Arc::new(open_store(config)?);
    let runtime = tokio::runtime::Runtime::new().map_err(usage)?;
    runtime.block_on(async move {
        let listener = service::bind(addr).await.map_err(usage)?;
        let local = listener.local_addr().map_err(usage)?;
        println!("listening on http://{local}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        service::serve(listener, store, ui_dir, shutdown).await.map_err(usage)
    })?;
    Ok(0)
}
