//! Static heuristics for behavior preservation.
//!
//! General equivalence is undecidable, so each check targets one way a
//! generated refactoring commonly breaks behavior or adds noise:
//!
//! | check            | violation                                              | severity |
//! |------------------|--------------------------------------------------------|----------|
//! | CALL_SET         | a call to an existing name went missing / was added    | major / minor |
//! | LITERALS         | the literal multiset changed                           | major    |
//! | EMPTY_STUB       | a new function has an empty or bare-`return` body      | major    |
//! | REDUNDANT_REIMPL | a new function duplicates an existing one (alpha-equiv)| minor    |
//! | RETURN_SURFACE   | return-expression shapes of the entry point changed    | major    |
//! | EXPECTED_SHAPE   | the edit is not the transformation the smell calls for | minor    |
//!
//! Calls and literals are compared over the entry function plus the new
//! helpers it reaches; an extracted helper that is never called therefore
//! counts as lost code.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Lineage, SemanticOutcome};
use crate::model::{max_nesting_depth, Node, NodeKind, SourceFunction, SourceUnit};
use crate::smells::{CodeSmell, SmellKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckId {
    CallSet,
    Literals,
    EmptyStub,
    RedundantReimpl,
    ReturnSurface,
    ExpectedShape,
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckId::CallSet => "CALL_SET",
            CheckId::Literals => "LITERALS",
            CheckId::EmptyStub => "EMPTY_STUB",
            CheckId::RedundantReimpl => "REDUNDANT_REIMPL",
            CheckId::ReturnSurface => "RETURN_SURFACE",
            CheckId::ExpectedShape => "EXPECTED_SHAPE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckResult {
    Pass,
    MinorDeviation,
    MajorDeviation,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckResult::Pass => "pass",
            CheckResult::MinorDeviation => "minor deviation",
            CheckResult::MajorDeviation => "major deviation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticCheck {
    pub check_id: CheckId,
    pub result: CheckResult,
    pub detail: String,
}

pub fn fold(checks: &[SemanticCheck]) -> SemanticOutcome {
    match checks.iter().map(|c| c.result).max() {
        Some(CheckResult::MajorDeviation) => SemanticOutcome::Major,
        Some(CheckResult::MinorDeviation) => SemanticOutcome::Minor,
        _ => SemanticOutcome::Pass,
    }
}

pub fn run_checks(
    unit: &SourceUnit,
    original: &SourceFunction,
    lineage: &Lineage<'_>,
    target: &CodeSmell,
) -> Vec<SemanticCheck> {
    let helpers: HashMap<&str, &SourceFunction> = lineage.helpers.iter().map(|f| (f.name.as_str(), *f)).collect();
    let reached = reachable(lineage.entry, &helpers);
    let scope: Vec<&SourceFunction> = std::iter::once(lineage.entry).chain(reached.iter().copied()).collect();

    vec![
        call_set(original, &scope, &helpers),
        literals(original, &scope),
        empty_stub(lineage),
        redundant_reimpl(unit, lineage),
        return_surface(original, lineage.entry, &helpers),
        expected_shape(original, lineage, &reached, target),
    ]
}

/// New helpers reachable from the entry function through calls.
fn reachable<'a>(entry: &SourceFunction, helpers: &HashMap<&str, &'a SourceFunction>) -> Vec<&'a SourceFunction> {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut queue: VecDeque<&str> = call_targets(&entry.body).into_iter().collect();
    while let Some(name) = queue.pop_front() {
        let Some(f) = helpers.get(name) else { continue };
        if f.name == entry.name || !seen.insert(name) {
            continue;
        }
        order.push(*f);
        queue.extend(call_targets(&f.body));
    }
    order
}

fn call_targets(node: &Node) -> Vec<&str> {
    node.walk()
        .filter(|n| n.kind == NodeKind::Call)
        .filter_map(|n| n.children.first())
        .filter(|c| c.kind == NodeKind::Identifier)
        .map(Node::text)
        .collect()
}

/// Printable call target: `f`, `console.log`, or `<expr>.m`.
fn callee_name(callee: &Node) -> String {
    match callee.kind {
        NodeKind::Identifier => callee.text().to_string(),
        NodeKind::MemberAccess => format!("{}.{}", callee_name(&callee.children[0]), callee.children[1].text()),
        _ => "<expr>".to_string(),
    }
}

type Multiset = BTreeMap<String, usize>;

fn multiset(items: impl IntoIterator<Item = String>) -> Multiset {
    let mut m = Multiset::new();
    for i in items {
        *m.entry(i).or_default() += 1;
    }
    m
}

/// Elements of `a` not matched in `b`, rendered as `x ×n`.
fn missing(a: &Multiset, b: &Multiset) -> Vec<String> {
    a.iter()
        .filter_map(|(k, n)| {
            let extra = n.saturating_sub(b.get(k).copied().unwrap_or(0));
            (extra > 0).then(|| if extra == 1 { k.clone() } else { format!("{k} ×{extra}") })
        })
        .collect()
}

fn calls_in(f: &SourceFunction, helpers: &HashMap<&str, &SourceFunction>) -> impl Iterator<Item = String> {
    f.body
        .walk()
        .filter(|n| n.kind == NodeKind::Call)
        .map(|n| callee_name(&n.children[0]))
        .filter(|name| !helpers.contains_key(name.as_str()))
        .collect::<Vec<_>>()
        .into_iter()
}

fn call_set(
    original: &SourceFunction,
    scope: &[&SourceFunction],
    helpers: &HashMap<&str, &SourceFunction>,
) -> SemanticCheck {
    let before = multiset(calls_in(original, &HashMap::new()));
    let after = multiset(scope.iter().flat_map(|f| calls_in(f, helpers)));
    let lost = missing(&before, &after);
    let added = missing(&after, &before);
    let (result, detail) = if !lost.is_empty() {
        (CheckResult::MajorDeviation, format!("calls missing after refactoring: {}", lost.join(", ")))
    } else if !added.is_empty() {
        (CheckResult::MinorDeviation, format!("calls added to existing functions: {}", added.join(", ")))
    } else {
        (CheckResult::Pass, format!("all {} calls to existing functions preserved", before.values().sum::<usize>()))
    };
    SemanticCheck { check_id: CheckId::CallSet, result, detail }
}

/// Literal value with quoting and numeric spelling normalized.
fn literal_value(raw: &str) -> String {
    if let Some(q) = raw.chars().next().filter(|c| *c == '"' || *c == '\'') {
        let inner = &raw[1..raw.len() - 1];
        let mut out = String::from("s:");
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                match chars.next() {
                    Some(e) if e == q || e == '"' || e == '\'' => out.push(e),
                    Some(e) => {
                        out.push('\\');
                        out.push(e);
                    }
                    None => {}
                }
            } else {
                out.push(c);
            }
        }
        out
    } else {
        match raw.parse::<f64>() {
            Ok(v) => format!("n:{v}"),
            Err(_) => format!("n:{raw}"),
        }
    }
}

fn literals_in(f: &SourceFunction) -> impl Iterator<Item = String> + '_ {
    f.body.walk().filter(|n| n.kind == NodeKind::Literal).map(|n| literal_value(n.text()))
}

fn literals(original: &SourceFunction, scope: &[&SourceFunction]) -> SemanticCheck {
    let before = multiset(literals_in(original));
    let after = multiset(scope.iter().flat_map(|f| literals_in(f)));
    let (result, detail) = if before == after {
        (CheckResult::Pass, format!("all {} literals preserved", before.values().sum::<usize>()))
    } else {
        let mut changes = missing(&before, &after).into_iter().map(|l| format!("-{}", &l[2..])).collect::<Vec<_>>();
        changes.extend(missing(&after, &before).into_iter().map(|l| format!("+{}", &l[2..])));
        (CheckResult::MajorDeviation, format!("literal values changed: {}", changes.join(", ")))
    };
    SemanticCheck { check_id: CheckId::Literals, result, detail }
}

fn is_stub(f: &SourceFunction) -> bool {
    f.block().children.iter().all(|s| s.kind == NodeKind::Return && s.children.is_empty())
}

fn empty_stub(lineage: &Lineage<'_>) -> SemanticCheck {
    let stubs: Vec<&str> = lineage.helpers.iter().filter(|f| is_stub(f)).map(|f| f.name.as_str()).collect();
    let (result, detail) = if stubs.is_empty() {
        (CheckResult::Pass, "no empty method stubs".to_string())
    } else {
        (CheckResult::MajorDeviation, format!("empty method stub: {}", stubs.join(", ")))
    };
    SemanticCheck { check_id: CheckId::EmptyStub, result, detail }
}

/// Canonical rendering with identifiers renamed by first occurrence, so
/// alpha-equivalent bodies compare equal.
fn alpha_canonical(f: &SourceFunction) -> String {
    fn go(n: &Node, names: &mut HashMap<String, usize>, out: &mut String) {
        out.push('(');
        out.push_str(&format!("{:?}", n.kind));
        match n.kind {
            NodeKind::Identifier => {
                let next = names.len();
                let id = *names.entry(n.text().to_string()).or_insert(next);
                out.push_str(&format!(" v{id}"));
            }
            NodeKind::Function => {}
            _ => {
                if let Some(t) = &n.text {
                    out.push(' ');
                    out.push_str(t);
                }
            }
        }
        if let Some(op) = &n.operator {
            out.push(' ');
            out.push_str(op);
        }
        for c in &n.children {
            go(c, names, out);
        }
        out.push(')');
    }
    let mut out = String::new();
    go(&f.body, &mut HashMap::new(), &mut out);
    out
}

fn redundant_reimpl(unit: &SourceUnit, lineage: &Lineage<'_>) -> SemanticCheck {
    let existing: HashMap<String, &str> = unit.functions.iter().map(|f| (alpha_canonical(f), f.name.as_str())).collect();
    let dupes: Vec<String> = lineage
        .helpers
        .iter()
        .filter_map(|h| existing.get(&alpha_canonical(h)).map(|orig| format!("{} duplicates {orig}", h.name)))
        .collect();
    let (result, detail) = if dupes.is_empty() {
        (CheckResult::Pass, "no re-implementation of existing functions".to_string())
    } else {
        (CheckResult::MinorDeviation, format!("redundant re-implementation: {}", dupes.join(", ")))
    };
    SemanticCheck { check_id: CheckId::RedundantReimpl, result, detail }
}

/// Structural shape of an expression. Identifiers are anonymous; literal
/// values and operators are kept, as are callees that already existed.
/// Calls to single-return helpers are replaced by that return's shape.
fn shape(n: &Node, helpers: &HashMap<&str, &SourceFunction>, inline: bool) -> String {
    if n.kind == NodeKind::Call {
        let callee = &n.children[0];
        if callee.kind == NodeKind::Identifier {
            if let Some(h) = helpers.get(callee.text()) {
                if inline {
                    let returns = return_values(h);
                    if let [Some(only)] = returns.as_slice() {
                        return shape(only, helpers, false);
                    }
                }
                return "(call helper)".to_string();
            }
        }
    }
    let mut out = format!("({:?}", n.kind);
    match n.kind {
        NodeKind::Identifier => {}
        NodeKind::Literal => out.push_str(&format!(" {}", literal_value(n.text()))),
        _ => {
            if let Some(op) = &n.operator {
                out.push_str(&format!(" {op}"));
            }
        }
    }
    if n.kind == NodeKind::Call {
        out.push_str(&format!(" {}", callee_name(&n.children[0])));
        for a in &n.children[1..] {
            out.push(' ');
            out.push_str(&shape(a, helpers, inline));
        }
    } else if n.kind == NodeKind::MemberAccess {
        out.push(' ');
        out.push_str(&shape(&n.children[0], helpers, inline));
        out.push_str(&format!(" .{}", n.children[1].text()));
    } else {
        for c in &n.children {
            out.push(' ');
            out.push_str(&shape(c, helpers, inline));
        }
    }
    out.push(')');
    out
}

fn return_values(f: &SourceFunction) -> Vec<Option<&Node>> {
    f.body.walk().filter(|n| n.kind == NodeKind::Return).map(|r| r.children.first()).collect()
}

fn surface(f: &SourceFunction, helpers: &HashMap<&str, &SourceFunction>) -> Multiset {
    let mut shapes = Vec::new();
    for value in return_values(f) {
        let Some(value) = value else {
            shapes.push("void".to_string());
            continue;
        };
        let tail_helper = (value.kind == NodeKind::Call && value.children[0].kind == NodeKind::Identifier)
            .then(|| helpers.get(value.children[0].text()))
            .flatten();
        match tail_helper {
            // `return helper(...)` exposes the helper's own returns.
            Some(h) => shapes.extend(
                return_values(h)
                    .into_iter()
                    .map(|v| v.map_or_else(|| "void".to_string(), |v| shape(v, helpers, false))),
            ),
            None => shapes.push(shape(value, helpers, true)),
        }
    }
    multiset(shapes)
}

fn return_surface(
    original: &SourceFunction,
    entry: &SourceFunction,
    helpers: &HashMap<&str, &SourceFunction>,
) -> SemanticCheck {
    let before = surface(original, &HashMap::new());
    let after = surface(entry, helpers);
    let (result, detail) = if before == after {
        (CheckResult::Pass, format!("{} return paths preserved", before.values().sum::<usize>()))
    } else {
        let lost = missing(&before, &after).len();
        let gained = missing(&after, &before).len();
        (
            CheckResult::MajorDeviation,
            format!("return values differ: {lost} original return shape(s) missing, {gained} new"),
        )
    };
    SemanticCheck { check_id: CheckId::ReturnSurface, result, detail }
}

fn expected_shape(
    original: &SourceFunction,
    lineage: &Lineage<'_>,
    reached: &[&SourceFunction],
    target: &CodeSmell,
) -> SemanticCheck {
    let (ok, detail) = match target.kind {
        SmellKind::DeepNestedLogic => {
            let before = max_nesting_depth(original);
            let after = std::iter::once(lineage.entry)
                .chain(lineage.helpers.iter().copied())
                .map(max_nesting_depth)
                .max()
                .unwrap_or(0);
            (after < before, format!("nesting depth {before} -> {after}"))
        }
        _ => {
            let direct: HashSet<&str> = call_targets(&lineage.entry.body).into_iter().collect();
            let extracted: Vec<&str> =
                reached.iter().map(|f| f.name.as_str()).filter(|n| direct.contains(n)).collect();
            if extracted.is_empty() {
                (false, "expected an extract-method refactoring but no new function is called".to_string())
            } else {
                (true, format!("extract method into {}", extracted.join(", ")))
            }
        }
    };
    SemanticCheck {
        check_id: CheckId::ExpectedShape,
        result: if ok { CheckResult::Pass } else { CheckResult::MinorDeviation },
        detail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_normalization() {
        assert_eq!(literal_value("'a'"), literal_value("\"a\""));
        assert_eq!(literal_value("1.0"), literal_value("1"));
        assert_ne!(literal_value("3"), literal_value("2"));
        assert_eq!(literal_value("'it\\'s'"), "s:it's");
    }

    #[test]
    fn multiset_missing() {
        let a = multiset(["x".to_string(), "x".to_string(), "y".to_string()]);
        let b = multiset(["x".to_string()]);
        assert_eq!(missing(&a, &b), ["x", "y"]);
        assert!(missing(&b, &a).is_empty());
    }
}
