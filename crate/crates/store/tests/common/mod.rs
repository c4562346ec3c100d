#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use refactor_guard_core::config::EngineConfig;
use refactor_guard_core::smells::{detect_all, SmellKind};
use refactor_guard_store::{RefactoringProposal, Store};

pub const SOURCE: &str = "function keep(x) {\n    return x;\n}\n\nfunction grant(user, res) {\n    let level = 'none';\n    if (user.admin || res.owner === user.id && res.shared) {\n        level = 'write';\n    }\n    audit(user, level);\n    return level;\n}\n";

pub struct Workspace {
    pub dir: tempfile::TempDir,
    pub store: Arc<Store>,
}

impl Workspace {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path().join("store"), EngineConfig::default().validator()).unwrap();
        Self { dir, store: Arc::new(store) }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Writes `SOURCE` to `name` and builds a High proposal for `grant`.
    pub fn proposal(&self, name: &str) -> RefactoringProposal {
        let path = self.file(name);
        std::fs::write(&path, SOURCE).unwrap();
        proposal_for(&path)
    }
}

pub fn proposal_for(path: &Path) -> RefactoringProposal {
    let config = EngineConfig::default();
    let engine = config.build_engine().unwrap();
    let unit = config.registry().load_unit(path).unwrap();
    let f = unit.function("grant").unwrap();
    let smell = detect_all(f, &config.thresholds).into_iter().find(|s| s.kind == SmellKind::ComplexConditional).unwrap();
    let g = engine.generate_candidates(&unit, f, &smell).unwrap();
    RefactoringProposal::from_candidate(&unit, f, &smell, &g.prompt_sha256, &g.candidates[0])
}
