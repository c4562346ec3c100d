#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const CLEAN: &str = "\
function classify(x) {
    if (x > 0) {
        return 1;
    }
    return 0;
}

function total(a, b) {
    return a + b;
}
";

/// `classify` grown to cyclomatic complexity 12, with no other smell.
pub fn with_complex_edit() -> String {
    let mut s = String::from("function classify(x) {\n");
    for i in 1..=11 {
        s.push_str(&format!("    if (x == {i}) {{\n        return {i};\n    }}\n"));
    }
    s.push_str("    return 0;\n}\n\nfunction total(a, b) {\n    return a + b;\n}\n");
    s
}

/// A straight-line function with exactly `loc` lines of code.
pub fn straight(loc: u32) -> String {
    let mut s = String::from("function big(x) {\n");
    for i in 0..loc - 2 {
        s.push_str(&format!("    x = step(x, {i});\n"));
    }
    s.push_str("}\n");
    s
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl From<Output> for Run {
    fn from(o: Output) -> Self {
        Run {
            code: o.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        }
    }
}

/// A scratch project directory the binary runs in.
pub struct Project {
    pub dir: tempfile::TempDir,
}

impl Project {
    pub fn new() -> Self {
        Project { dir: tempfile::tempdir().unwrap() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    pub fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    pub fn command(&self) -> Command {
        let mut c = Command::new(env!("CARGO_BIN_EXE_refactor-guard"));
        c.current_dir(self.dir.path()).env_remove("REFACTOR_GUARD_CONFIG");
        c
    }

    pub fn run(&self, args: &[&str]) -> Run {
        self.command().args(args).output().unwrap().into()
    }

    /// Ids of the proposals in the default store.
    pub fn proposals(&self) -> Vec<String> {
        proposal_ids(&self.path(".refactor-guard"))
    }
}

pub fn proposal_ids(store: &Path) -> Vec<String> {
    let Ok(entries) = std::fs::read_dir(store.join("proposals")) else {
        return Vec::new();
    };
    let mut ids: Vec<String> = entries
        .filter_map(|e| e.ok()?.file_name().to_str()?.strip_suffix(".json").map(str::to_string))
        .filter(|n| !n.starts_with('.'))
        .collect();
    ids.sort();
    ids
}

/// Config selecting a single mock provider with `behavior`.
pub fn mock_config(behavior: &str) -> String {
    format!(r#"{{"providers": [{{"id": "m", "type": "mock", "behavior": "{behavior}"}}], "policy": {{"default": "m"}}}}"#)
}
