//! Deterministic extract-method transform behind the oracle mock provider.
//!
//! Works on the text of one function. A complex conditional is moved into
//! a predicate helper; every other smell is attacked by moving a run of
//! statements into a helper and calling it in place. Runs are only eligible
//! when the move is behavior preserving by construction:
//!
//! - a run containing `return` must be a suffix of a block in tail position,
//!   and is replaced by `return helper(..);`
//! - a run elsewhere may not return or declare names read after it, and
//!   may assign at most one outer variable, which the helper hands back:
//!   `x = helper(..);`
//!
//! Eligible runs are ranked by a cheap per-smell heuristic and verified by
//! re-parsing and re-detecting; a few greedy rounds handle smells that need
//! more than one extraction.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::analysis::{analyze_functions, file_score};
use crate::health::HealthWeights;
use crate::lang::{warning_diff, LanguageAdapter};
use crate::model::{
    branch_nodes, deepest_nesting, logical_operator_count, nesting_depth, LineIndex, Node, NodeKind, SourceFunction,
    SourceSpan,
};
use crate::smells::{conditions, detect_all, CodeSmell, SmellKind, Thresholds};

const MAX_ROUNDS: usize = 4;
const MAX_EVALUATIONS_PER_ROUND: usize = 120;

pub struct Target {
    pub kind: SmellKind,
    pub start: (u32, u32),
}

/// Refactors `source` (a single function) to remove `target`. Returns the
/// entry function followed by its new helpers, or `None` when no
/// behavior-preserving extraction resolves the smell.
pub fn extract_method(
    source: &str,
    adapter: &dyn LanguageAdapter,
    target: &Target,
    thresholds: &Thresholds,
) -> Option<String> {
    let functions = adapter.parse(source, Path::new("")).ok()?;
    let original = functions.first()?;
    let baseline = Baseline::new(source, original, adapter, target.kind, thresholds);
    if target.kind == SmellKind::ComplexConditional {
        let text = extract_condition(source, original, target, thresholds)?;
        return (baseline.evaluate(&text)?.done()).then_some(text);
    }

    let mut text = source.to_string();
    let mut current = baseline.evaluate(&text)?;
    for _ in 0..MAX_ROUNDS {
        let functions = adapter.parse(&text, Path::new("")).ok()?;
        let entry = functions.first()?;
        let helpers: HashSet<&str> = functions[1..].iter().map(|f| f.name.as_str()).collect();
        let mut runs = eligible_runs(entry, &helpers);
        let ranker = Ranker::new(entry, target, thresholds);
        runs.sort_by_key(|r| (ranker.score(r), r.moved_lines(), r.first().span.start()));

        let mut best: Option<(Score, String)> = None;
        for run in runs.iter().take(MAX_EVALUATIONS_PER_ROUND) {
            let candidate = apply_run(&text, entry, run);
            let Some(score) = baseline.evaluate(&candidate) else { continue };
            let finished = score.done();
            if best.as_ref().is_none_or(|(b, _)| score.key() < b.key()) {
                best = Some((score, candidate));
            }
            if finished {
                break;
            }
        }
        let (score, candidate) = best?;
        if score.progress() >= current.progress() {
            break;
        }
        current = score;
        text = candidate;
        if current.done() {
            return Some(text);
        }
    }
    None
}

/// Smell state of the original function that candidates are compared with.
struct Baseline<'a> {
    adapter: &'a dyn LanguageAdapter,
    kind: SmellKind,
    thresholds: &'a Thresholds,
    counts: BTreeMap<SmellKind, usize>,
    warnings: Vec<crate::lang::LintFinding>,
    health: f64,
}

#[derive(Debug, Clone, Copy)]
struct Score {
    new_issues: usize,
    pressure: u32,
    health: f64,
}

impl Score {
    fn done(&self) -> bool {
        self.new_issues == 0 && self.pressure == 0
    }

    fn progress(&self) -> (usize, u32) {
        (self.new_issues, self.pressure)
    }

    fn key(&self) -> (usize, u32, i64) {
        (self.new_issues, self.pressure, -(self.health * 1e6) as i64)
    }
}

fn counts(smells: &[CodeSmell]) -> BTreeMap<SmellKind, usize> {
    let mut m = BTreeMap::new();
    for s in smells {
        *m.entry(s.kind).or_default() += 1;
    }
    m
}

impl<'a> Baseline<'a> {
    fn new(
        source: &str,
        original: &SourceFunction,
        adapter: &'a dyn LanguageAdapter,
        kind: SmellKind,
        thresholds: &'a Thresholds,
    ) -> Self {
        let weights = HealthWeights::default();
        Self {
            adapter,
            kind,
            thresholds,
            counts: counts(&detect_all(original, thresholds)),
            warnings: adapter.lint(source, Path::new("")).unwrap_or_default(),
            health: file_score(&analyze_functions(std::slice::from_ref(original), thresholds, &weights)).value,
        }
    }

    fn evaluate(&self, text: &str) -> Option<Score> {
        let functions = self.adapter.parse(text, Path::new("")).ok()?;
        let (entry, helpers) = functions.split_first()?;
        let entry_smells = detect_all(entry, self.thresholds);
        let helper_smells: Vec<CodeSmell> = helpers.iter().flat_map(|f| detect_all(f, self.thresholds)).collect();
        let after = counts(&entry_smells.iter().chain(&helper_smells).cloned().collect::<Vec<_>>());
        let mut new_issues: usize = after
            .iter()
            .filter(|(k, _)| **k != self.kind)
            .map(|(k, n)| n.saturating_sub(self.counts.get(k).copied().unwrap_or(0)))
            .sum();
        // The target kind moving into a helper is not progress.
        new_issues += helper_smells.iter().filter(|s| s.kind == self.kind).count();
        let warnings = self.adapter.lint(text, Path::new("")).ok()?;
        new_issues += warning_diff(&self.warnings, &warnings).len();
        let pressure = if self.kind == SmellKind::ComplexConditional {
            let before = self.counts.get(&self.kind).copied().unwrap_or(0);
            u32::from(after.get(&self.kind).copied().unwrap_or(0) >= before)
        } else {
            entry_smells
                .iter()
                .filter(|s| s.kind == self.kind)
                .map(|s| (s.metric_value - s.threshold) as u32 + 1)
                .sum()
        };
        let health = file_score(&analyze_functions(&functions, self.thresholds, &HealthWeights::default())).value;
        let mut score = Score { new_issues, pressure, health };
        if score.done() && health <= self.health {
            score.new_issues += 1;
        }
        Some(score)
    }
}

/// Names read by an expression or statement, skipping callee names and
/// member property names.
fn read_identifiers<'a>(node: &'a Node, out: &mut Vec<&'a str>) {
    match node.kind {
        NodeKind::Identifier => out.push(node.text()),
        NodeKind::Call => {
            let callee = &node.children[0];
            if callee.kind != NodeKind::Identifier {
                read_identifiers(callee, out);
            }
            for arg in &node.children[1..] {
                read_identifiers(arg, out);
            }
        }
        NodeKind::MemberAccess => read_identifiers(&node.children[0], out),
        _ => node.children.iter().for_each(|c| read_identifiers(c, out)),
    }
}

fn declared_names(nodes: &[&Node]) -> HashSet<String> {
    nodes
        .iter()
        .flat_map(|n| n.walk())
        .filter(|n| n.kind == NodeKind::VarDecl)
        .map(|n| n.text().to_string())
        .collect()
}

fn helper_name(text: &str, base: &str, tag: &str) -> String {
    (1..).map(|i| format!("{base}_{tag}{i}")).find(|n| !text.contains(n.as_str())).expect("unbounded")
}

fn dedup(names: Vec<&str>) -> Vec<String> {
    let mut seen = HashSet::new();
    names.into_iter().filter(|n| seen.insert(*n)).map(str::to_string).collect()
}

fn extract_condition(
    source: &str,
    function: &SourceFunction,
    target: &Target,
    thresholds: &Thresholds,
) -> Option<String> {
    let complex: Vec<&Node> = conditions(function)
        .into_iter()
        .filter(|c| logical_operator_count(c) >= thresholds.complex_conditional_min_ops)
        .collect();
    let cond = complex
        .iter()
        .find(|c| c.span.start() == target.start)
        .or_else(|| complex.iter().find(|c| c.span.start_line == target.start.0))
        .or(complex.first())?;
    if cond.walk().any(|n| n.kind == NodeKind::Assign) {
        return None;
    }
    let declared: HashSet<String> = declared_names(&[&function.body])
        .into_iter()
        .chain(function.params.iter().cloned())
        .collect();
    let mut used = Vec::new();
    read_identifiers(cond, &mut used);
    let params: Vec<String> = dedup(used).into_iter().filter(|n| declared.contains(n)).collect();

    let name = helper_name(source, &function.name, "condition");
    let index = LineIndex::new(source);
    let range = index.range(&cond.span);
    let mut expr = source[range.clone()].trim();
    if expr.starts_with('(') && expr.ends_with(')') && logical_operator_count(cond) > 0 {
        // A parenthesized condition keeps its parens in the span; the
        // return statement does not need them.
        let inner = &expr[1..expr.len() - 1];
        if balanced(inner) {
            expr = inner.trim();
        }
    }
    let args = params.join(", ");
    let mut out = String::with_capacity(source.len() + 64);
    out.push_str(&source[..range.start]);
    out.push_str(&format!("{name}({args})"));
    out.push_str(&source[range.end..]);
    let mut out = out.trim_end().to_string();
    out.push_str(&format!("\n\nfunction {name}({args}) {{\n    return {expr};\n}}\n"));
    Some(out)
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// A contiguous run of statements from one statement list.
struct Run<'a> {
    stmts: &'a [Node],
    /// Statements after the run in the same list.
    rest: &'a [Node],
    /// Number of nesting constructs enclosing the list.
    level: u32,
    returns: bool,
    params: Vec<String>,
    /// Outer variable the run assigns, passed in and returned back.
    threads: Option<String>,
}

impl<'a> Run<'a> {
    fn first(&self) -> &'a Node {
        &self.stmts[0]
    }

    fn last(&self) -> &'a Node {
        &self.stmts[self.stmts.len() - 1]
    }

    fn span(&self) -> SourceSpan {
        self.first().span.cover(&self.last().span)
    }

    fn moved_lines(&self) -> u32 {
        self.last().span.end_line - self.first().span.start_line + 1
    }

    fn nodes(&self) -> impl Iterator<Item = &'a Node> + '_ {
        self.stmts.iter().flat_map(|s| s.walk())
    }
}

struct StatementList<'a> {
    stmts: &'a [Node],
    tail: bool,
    level: u32,
}

fn statement_lists(entry: &SourceFunction) -> Vec<StatementList<'_>> {
    let mut out = Vec::new();
    collect_lists(entry.block(), true, 0, &mut out);
    out
}

fn collect_lists<'a>(node: &'a Node, tail: bool, level: u32, out: &mut Vec<StatementList<'a>>) {
    match node.kind {
        NodeKind::Block => {
            out.push(StatementList { stmts: &node.children, tail, level });
            let n = node.children.len();
            for (i, s) in node.children.iter().enumerate() {
                collect_lists(s, tail && i + 1 == n, level, out);
            }
        }
        NodeKind::If => {
            for branch in &node.children[1..] {
                collect_lists(branch, tail, level + 1, out);
            }
        }
        NodeKind::While | NodeKind::For => {
            if let Some(body) = node.children.last() {
                collect_lists(body, false, level + 1, out);
            }
        }
        NodeKind::Switch => {
            for clause in &node.children[1..] {
                let skip = usize::from(clause.text() != "default");
                let stmts = &clause.children[skip..];
                if !stmts.is_empty() {
                    out.push(StatementList { stmts, tail: false, level: level + 1 });
                }
                for s in stmts {
                    collect_lists(s, false, level + 1, out);
                }
            }
        }
        _ => {}
    }
}

fn eligible_runs<'a>(entry: &'a SourceFunction, helpers: &HashSet<&str>) -> Vec<Run<'a>> {
    let mut runs = Vec::new();
    for list in statement_lists(entry) {
        let n = list.stmts.len();
        for i in 0..n {
            for j in i..n {
                let run = Run {
                    stmts: &list.stmts[i..=j],
                    rest: &list.stmts[j + 1..],
                    level: list.level,
                    returns: false,
                    params: Vec::new(),
                    threads: None,
                };
                if let Some(run) = check_run(entry, run, list.tail && j + 1 == n, helpers) {
                    runs.push(run);
                }
            }
        }
    }
    runs
}

fn check_run<'a>(entry: &'a SourceFunction, mut run: Run<'a>, tail: bool, helpers: &HashSet<&str>) -> Option<Run<'a>> {
    if run.stmts.iter().all(|s| s.kind == NodeKind::VarDecl) {
        return None;
    }
    let returns: Vec<&Node> = run.nodes().filter(|n| n.kind == NodeKind::Return).collect();
    if !returns.is_empty() && !tail {
        return None;
    }
    let returns_helper = returns.iter().filter_map(|r| r.children.first()).any(|v| {
        v.kind == NodeKind::Call
            && v.children[0].kind == NodeKind::Identifier
            && helpers.contains(v.children[0].text())
    });
    if returns_helper {
        return None;
    }

    let span = run.span();
    let run_refs: Vec<&Node> = run.stmts.iter().collect();
    let inner = declared_names(&run_refs);
    let outer: HashSet<&str> = entry
        .body
        .walk()
        .filter(|n| n.kind == NodeKind::VarDecl && !span.contains(&n.span))
        .map(Node::text)
        .chain(entry.params.iter().map(String::as_str))
        .collect();
    let mut used = Vec::new();
    for s in run.stmts {
        read_identifiers(s, &mut used);
    }
    if used.iter().any(|u| inner.contains(*u) && outer.contains(u)) {
        return None;
    }
    let mut params = dedup(used.into_iter().filter(|u| !inner.contains(*u) && outer.contains(u)).collect());

    if !tail {
        let assigned = dedup(
            run.nodes()
                .filter(|n| n.kind == NodeKind::Assign && n.children[0].kind == NodeKind::Identifier)
                .map(|n| n.children[0].text())
                .filter(|n| !inner.contains(*n) && outer.contains(n))
                .collect(),
        );
        match assigned.as_slice() {
            [] => {}
            [one] => {
                if !params.contains(one) {
                    params.push(one.clone());
                }
                run.threads = Some(one.clone());
            }
            _ => return None,
        }
        let top_level: HashSet<&str> =
            run.stmts.iter().filter(|s| s.kind == NodeKind::VarDecl).map(Node::text).collect();
        let mut later = Vec::new();
        for s in run.rest {
            read_identifiers(s, &mut later);
        }
        if later.iter().any(|u| top_level.contains(u)) {
            return None;
        }
    }
    run.returns = !returns.is_empty();
    run.params = params;
    Some(run)
}

fn apply_run(text: &str, entry: &SourceFunction, run: &Run<'_>) -> String {
    let index = LineIndex::new(text);
    let start = index.offset(run.first().span.start_line, run.first().span.start_col);
    let end = index.offset(run.last().span.end_line, run.last().span.end_col);
    let name = helper_name(text, &entry.name, "part");
    let args = run.params.join(", ");
    let call = match (&run.threads, run.returns) {
        (_, true) => format!("return {name}({args});"),
        (Some(var), false) => format!("{var} = {name}({args});"),
        (None, false) => format!("{name}({args});"),
    };

    let body = &text[start..end];
    let first_indent = run.first().span.start_col.saturating_sub(1) as usize;
    let rest_indent = body
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.chars().take_while(|c| c.is_whitespace()).count())
        .min()
        .unwrap_or(first_indent);
    let dedent = first_indent.min(rest_indent);
    let mut helper = format!("function {name}({args}) {{\n");
    for (i, line) in body.lines().enumerate() {
        let line = if i == 0 {
            line
        } else {
            let strip: usize = line.chars().take(dedent).take_while(|c| c.is_whitespace()).map(char::len_utf8).sum();
            &line[strip..]
        };
        if line.trim().is_empty() {
            helper.push('\n');
        } else {
            helper.push_str("    ");
            helper.push_str(line.trim_end());
            helper.push('\n');
        }
    }
    if let Some(var) = &run.threads {
        helper.push_str(&format!("    return {var};\n"));
    }
    helper.push_str("}\n");

    let mut out = String::with_capacity(text.len() + helper.len() + call.len());
    out.push_str(&text[..start]);
    out.push_str(&call);
    out.push_str(&text[end..]);
    let mut out = out.trim_end().to_string();
    out.push_str("\n\n");
    out.push_str(&helper);
    out
}

/// Cheap pre-ranking of runs so that likely winners are verified first.
struct Ranker<'a> {
    kind: SmellKind,
    thresholds: &'a Thresholds,
    loc: u32,
    cc: u32,
    depth: u32,
    target: Option<SourceSpan>,
}

impl<'a> Ranker<'a> {
    fn new(entry: &SourceFunction, target: &Target, thresholds: &'a Thresholds) -> Self {
        let (depth, deepest) = deepest_nesting(entry.block());
        Self {
            kind: target.kind,
            thresholds,
            loc: entry.loc,
            cc: 1 + branch_nodes(entry).len() as u32,
            depth,
            target: deepest.map(|n| n.span.clone()),
        }
    }

    fn distance(v: u32, lo: u32, hi: u32) -> u32 {
        if v < lo {
            lo - v
        } else {
            v.saturating_sub(hi)
        }
    }

    fn score(&self, run: &Run<'_>) -> u32 {
        let t = self.thresholds;
        match self.kind {
            SmellKind::LargeMethod => {
                let m = run.moved_lines();
                Self::distance(m, (self.loc + 2).saturating_sub(t.large_method_min_loc), t.large_method_min_loc.saturating_sub(3))
            }
            SmellKind::ComplexMethod => {
                let b = run.nodes().filter(|n| is_branch(n)).count() as u32;
                Self::distance(b, (self.cc + 1).saturating_sub(t.complex_method_min_cc), t.complex_method_min_cc.saturating_sub(2))
            }
            SmellKind::DeepNestedLogic => {
                let inner = run.stmts.iter().map(nesting_depth).max().unwrap_or(0);
                let covers = self.target.as_ref().is_some_and(|s| run.span().contains(s));
                let below = t.deep_nesting_min_depth.saturating_sub(1);
                let mut score = if covers { 0 } else { 100 };
                score += Self::distance(inner, 0, below) * 10 + Self::distance(run.level, 0, below) * 10;
                score + inner.abs_diff(self.depth / 2)
            }
            SmellKind::BumpyRoad => {
                let bumps = run.stmts.iter().filter(|s| nesting_depth(s) >= t.bumpy_road_bump_depth).count() as u32;
                if run.level == 0 {
                    bumps.abs_diff(1)
                } else {
                    10
                }
            }
            SmellKind::ComplexConditional => 0,
        }
    }
}

fn is_branch(n: &Node) -> bool {
    match n.kind {
        NodeKind::If | NodeKind::While | NodeKind::For | NodeKind::ConditionalExpr => true,
        NodeKind::CaseClause => n.text() != "default",
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::MiniLang;

    fn run(src: &str, kind: SmellKind) -> Option<String> {
        let f = MiniLang.parse(src, Path::new("")).unwrap().remove(0);
        let smell = detect_all(&f, &Thresholds::default()).into_iter().find(|s| s.kind == kind).unwrap();
        extract_method(src, &MiniLang, &Target { kind, start: smell.span.start() }, &Thresholds::default())
    }

    #[test]
    fn conditional_moves_into_predicate() {
        let src = "function f(a, b, c) {\n    if (a > 1 && b || isOk(c)) {\n        log('x');\n    }\n}\n";
        let out = run(src, SmellKind::ComplexConditional).unwrap();
        assert!(out.contains("if (f_condition1(a, b, c))"), "{out}");
        assert!(out.contains("function f_condition1(a, b, c) {\n    return a > 1 && b || isOk(c);\n}"), "{out}");
    }

    #[test]
    fn nested_block_is_extracted() {
        let src = "function f(a, b) {\n    let total = 0;\n    if (a) {\n        while (b > 0) {\n            if (b > 2) {\n                if (a > b) {\n                    log(a, 'deep');\n                }\n            }\n            b = b - 1;\n        }\n    }\n    return total;\n}\n";
        let out = run(src, SmellKind::DeepNestedLogic).unwrap();
        let fns = MiniLang.parse(&out, Path::new("")).unwrap();
        assert_eq!(fns.len(), 2, "{out}");
        assert!(fns.iter().all(|f| crate::model::max_nesting_depth(f) < 4), "{out}");
    }

    #[test]
    fn tail_run_with_returns_becomes_return_call() {
        let src = "function f(x) {\n    log(x);\n    if (x > 0) {\n        if (x > 1) { if (x > 2) { if (x > 3) { return 4; } } }\n        return 1;\n    } else {\n        return 0;\n    }\n}\n";
        let out = run(src, SmellKind::DeepNestedLogic).unwrap();
        assert!(out.contains("return f_part1(x);"), "{out}");
    }

    #[test]
    fn single_outer_assignment_is_threaded_through_the_helper() {
        let src = "function f(a) {\n    let n = 0;\n    if (a) { if (a > 1) { if (a > 2) { if (a > 3) { n = 1; } } } }\n    return n;\n}\n";
        let out = run(src, SmellKind::DeepNestedLogic).unwrap();
        assert!(out.contains("n = f_part1("), "{out}");
        assert!(out.contains("    return n;\n}\n"), "{out}");
    }

    #[test]
    fn two_outer_assignments_block_extraction() {
        let src = "function f(a) {\n    let n = 0;\n    let m = 0;\n    if (a) { if (a > 1) { if (a > 2) { if (a > 3) { n = 1; m = 2; } } } }\n    return n + m;\n}\n";
        assert_eq!(run(src, SmellKind::DeepNestedLogic), None);
    }
}
