//! Reference MiniLang linter.
//!
//! Rules:
//! - `UNUSED_VAR`: a `let` binding that is never read.
//! - `UNREACHABLE_CODE`: the first statement after an unconditional
//!   `return` in the same block.
//! - `SHADOWED_PARAM`: a `let` that re-declares a parameter name.
//! - `DUPLICATE_FUNCTION`: a function name defined more than once.

use std::collections::{HashMap, HashSet};

use super::LintFinding;
use crate::model::{Node, NodeKind, SourceFunction};

pub const UNUSED_VAR: &str = "UNUSED_VAR";
pub const UNREACHABLE_CODE: &str = "UNREACHABLE_CODE";
pub const SHADOWED_PARAM: &str = "SHADOWED_PARAM";
pub const DUPLICATE_FUNCTION: &str = "DUPLICATE_FUNCTION";

pub fn lint_functions(functions: &[SourceFunction]) -> Vec<LintFinding> {
    let mut findings = Vec::new();
    let mut seen = HashSet::new();
    for f in functions {
        if !seen.insert(f.name.as_str()) {
            findings.push(LintFinding {
                rule_id: DUPLICATE_FUNCTION.to_string(),
                span: f.span.clone(),
                message: format!("function '{}' is defined more than once", f.name),
            });
        }
        lint_function(f, &mut findings);
    }
    findings.sort_by(|a, b| a.span.start().cmp(&b.span.start()).then_with(|| a.rule_id.cmp(&b.rule_id)));
    findings
}

struct Binding<'a> {
    decl: &'a Node,
    read: bool,
}

struct Scopes<'a> {
    params: HashSet<&'a str>,
    stack: Vec<HashMap<&'a str, usize>>,
    bindings: Vec<Binding<'a>>,
}

impl<'a> Scopes<'a> {
    fn declare(&mut self, decl: &'a Node, findings: &mut Vec<LintFinding>) {
        let name = decl.text();
        if self.params.contains(name) {
            findings.push(LintFinding {
                rule_id: SHADOWED_PARAM.to_string(),
                span: decl.span.clone(),
                message: format!("'{name}' shadows a parameter"),
            });
        }
        self.bindings.push(Binding { decl, read: false });
        let idx = self.bindings.len() - 1;
        self.stack.last_mut().expect("scope stack never empty").insert(name, idx);
    }

    fn read(&mut self, name: &str) {
        if let Some(&idx) = self.stack.iter().rev().find_map(|s| s.get(name)) {
            self.bindings[idx].read = true;
        }
    }
}

fn lint_function(f: &SourceFunction, findings: &mut Vec<LintFinding>) {
    let mut scopes = Scopes {
        params: f.params.iter().map(String::as_str).collect(),
        stack: vec![HashMap::new()],
        bindings: Vec::new(),
    };
    visit_stmt(f.block(), &mut scopes, findings);
    for b in scopes.bindings.iter().filter(|b| !b.read) {
        findings.push(LintFinding {
            rule_id: UNUSED_VAR.to_string(),
            span: b.decl.span.clone(),
            message: format!("'{}' is declared but never read", b.decl.text()),
        });
    }
}

fn visit_stmt<'a>(stmt: &'a Node, scopes: &mut Scopes<'a>, findings: &mut Vec<LintFinding>) {
    match stmt.kind {
        NodeKind::Block => {
            scopes.stack.push(HashMap::new());
            let mut returned = false;
            for s in &stmt.children {
                if returned {
                    findings.push(LintFinding {
                        rule_id: UNREACHABLE_CODE.to_string(),
                        span: s.span.clone(),
                        message: "statement is unreachable after return".to_string(),
                    });
                    returned = false;
                }
                visit_stmt(s, scopes, findings);
                if s.kind == NodeKind::Return {
                    returned = true;
                }
            }
            scopes.stack.pop();
        }
        NodeKind::VarDecl => {
            if let Some(init) = stmt.children.first() {
                visit_expr(init, scopes);
            }
            scopes.declare(stmt, findings);
        }
        NodeKind::For => {
            scopes.stack.push(HashMap::new());
            for child in &stmt.children {
                if child.kind == NodeKind::VarDecl || child.kind.is_statement() {
                    visit_stmt(child, scopes, findings);
                } else {
                    visit_expr(child, scopes);
                }
            }
            scopes.stack.pop();
        }
        NodeKind::CaseClause => {
            for child in &stmt.children {
                if child.kind.is_statement() {
                    visit_stmt(child, scopes, findings);
                } else {
                    visit_expr(child, scopes);
                }
            }
        }
        NodeKind::Switch => {
            visit_expr(&stmt.children[0], scopes);
            scopes.stack.push(HashMap::new());
            for clause in &stmt.children[1..] {
                visit_stmt(clause, scopes, findings);
            }
            scopes.stack.pop();
        }
        _ => {
            for child in &stmt.children {
                if child.kind.is_statement() {
                    // Unbraced bodies get their own scope, like braced ones.
                    scopes.stack.push(HashMap::new());
                    visit_stmt(child, scopes, findings);
                    scopes.stack.pop();
                } else {
                    visit_expr(child, scopes);
                }
            }
        }
    }
}

fn visit_expr(expr: &Node, scopes: &mut Scopes<'_>) {
    match expr.kind {
        NodeKind::Identifier => scopes.read(expr.text()),
        NodeKind::Assign => {
            // A plain `x = ...` writes x without reading it.
            if expr.children[0].kind != NodeKind::Identifier {
                visit_expr(&expr.children[0], scopes);
            }
            visit_expr(&expr.children[1], scopes);
        }
        NodeKind::MemberAccess => visit_expr(&expr.children[0], scopes),
        _ => {
            for child in &expr.children {
                visit_expr(child, scopes);
            }
        }
    }
}
