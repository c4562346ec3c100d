//! Random MiniLang functions with metrics recomputed from the generator's
//! own tree.
//!
//! Nothing here touches the production parser or model: the oracle values
//! come from the tree that was printed, and a second token-level recount
//! works on the printed text alone.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_depth: u32,
    pub max_ops: u32,
    pub min_loc: u32,
    pub max_loc: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { max_depth: 6, max_ops: 8, min_loc: 1, max_loc: 150 }
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Ident(String),
    Num(u32),
    Str(String),
    Bin(Box<Expr>, &'static str, Box<Expr>),
    Not(Box<Expr>),
    Call(String, Vec<Expr>),
    Member(Box<Expr>, String),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Paren(Box<Expr>),
}

#[derive(Debug, Clone)]
enum Else {
    Block(Vec<Stmt>),
    ElseIf(Box<Stmt>),
}

#[derive(Debug, Clone)]
enum Stmt {
    Let(String, Option<Expr>),
    Assign(String, Expr),
    Call(Expr),
    Return(Option<Expr>),
    If(Expr, Vec<Stmt>, Option<Else>),
    While(Expr, Vec<Stmt>),
    For(Option<Expr>, Option<Expr>, Vec<Stmt>),
    Switch(Expr, Vec<(Option<u32>, Vec<Stmt>)>),
    Block(Vec<Stmt>),
    Comment(String),
    Blank,
}

/// Metrics derived from the generator tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMetrics {
    pub cyclomatic_complexity: u32,
    pub max_depth: u32,
    /// Logical operator count of every condition (if/while/for tests and
    /// ternary tests), sorted.
    pub condition_ops: Vec<u32>,
    pub bumps: u32,
    /// Every `&&`/`||` in the function, inside conditions or not.
    pub logical_ops: u32,
    pub loc: u32,
}

#[derive(Debug, Clone)]
pub struct GeneratedFunction {
    pub name: String,
    pub source: String,
    pub oracle: OracleMetrics,
}

const VARS: &[&str] = &["a", "b", "count", "total", "item", "limit", "flag", "user", "order", "step"];
const FUNCS: &[&str] = &["check", "log", "isReady", "load", "save", "notify", "compute"];
const PROPS: &[&str] = &["size", "ready", "name", "items", "status"];
const WORDS: &[&str] = &["note", "keep going", "edge case", "TODO tidy", "fast path", "see below"];

struct Gen<'c> {
    rng: StdRng,
    cfg: &'c GenConfig,
}

impl Gen<'_> {
    fn var(&mut self) -> String {
        VARS.choose(&mut self.rng).unwrap().to_string()
    }

    fn atom(&mut self) -> Expr {
        match self.rng.gen_range(0..7) {
            0 => Expr::Ident(self.var()),
            1 => Expr::Bin(Box::new(Expr::Ident(self.var())), [">", "<", "==", "!==", ">="][self.rng.gen_range(0..5)], Box::new(Expr::Num(self.rng.gen_range(0..100)))),
            2 => Expr::Call(FUNCS.choose(&mut self.rng).unwrap().to_string(), vec![Expr::Ident(self.var())]),
            3 => Expr::Member(Box::new(Expr::Ident(self.var())), PROPS.choose(&mut self.rng).unwrap().to_string()),
            4 => Expr::Not(Box::new(Expr::Ident(self.var()))),
            5 => Expr::Bin(Box::new(Expr::Ident(self.var())), "===", Box::new(Expr::Str(self.word()))),
            _ => Expr::Bin(
                Box::new(Expr::Bin(Box::new(Expr::Ident(self.var())), "+", Box::new(Expr::Num(self.rng.gen_range(1..9))))),
                "<",
                Box::new(Expr::Ident(self.var())),
            ),
        }
    }

    fn word(&mut self) -> String {
        ["ok", "done", "new", "open", "x"].choose(&mut self.rng).unwrap().to_string()
    }

    /// An expression with exactly `ops` logical operators.
    fn logical(&mut self, ops: u32) -> Expr {
        if ops == 0 {
            return self.atom();
        }
        let left = self.rng.gen_range(0..ops);
        let op = if self.rng.gen_bool(0.5) { "&&" } else { "||" };
        let l = self.logical(left);
        let r = self.logical(ops - 1 - left);
        let e = Expr::Bin(Box::new(l), op, Box::new(r));
        if self.rng.gen_bool(0.2) {
            Expr::Paren(Box::new(e))
        } else {
            e
        }
    }

    fn condition(&mut self) -> Expr {
        let ops = if self.rng.gen_bool(0.5) { self.rng.gen_range(0..=1.min(self.cfg.max_ops)) } else { self.rng.gen_range(0..=self.cfg.max_ops) };
        let c = self.logical(ops);
        if self.rng.gen_bool(0.05) {
            // A ternary inside a condition: two conditions in one.
            let t = self.rng.gen_range(0..=2.min(self.cfg.max_ops));
            Expr::Paren(Box::new(Expr::Ternary(Box::new(self.logical(t)), Box::new(c), Box::new(self.atom()))))
        } else {
            c
        }
    }

    fn value(&mut self) -> Expr {
        match self.rng.gen_range(0..6) {
            0 => Expr::Num(self.rng.gen_range(0..1000)),
            1 => Expr::Str(self.word()),
            2 => {
                let test = self.condition();
                Expr::Ternary(Box::new(test), Box::new(Expr::Ident(self.var())), Box::new(Expr::Num(self.rng.gen_range(0..9))))
            }
            3 => Expr::Call(FUNCS.choose(&mut self.rng).unwrap().to_string(), vec![Expr::Ident(self.var()), Expr::Num(1)]),
            _ => Expr::Bin(Box::new(Expr::Ident(self.var())), ["+", "-", "*", "%"][self.rng.gen_range(0..4)], Box::new(Expr::Num(self.rng.gen_range(1..50)))),
        }
    }

    fn simple(&mut self) -> Stmt {
        match self.rng.gen_range(0..10) {
            0..=2 => Stmt::Let(self.var(), if self.rng.gen_bool(0.9) { Some(self.value()) } else { None }),
            3..=5 => Stmt::Assign(self.var(), self.value()),
            6 | 7 => {
                let f = FUNCS.choose(&mut self.rng).unwrap().to_string();
                Stmt::Call(Expr::Call(f, vec![Expr::Ident(self.var())]))
            }
            8 => Stmt::Comment(WORDS.choose(&mut self.rng).unwrap().to_string()),
            _ => Stmt::Blank,
        }
    }

    /// Statements for a block at nesting `level`, roughly `budget` lines.
    fn block(&mut self, level: u32, budget: i64) -> Vec<Stmt> {
        let mut out = Vec::new();
        let mut used = 0i64;
        while used < budget.max(1) {
            let remaining = budget - used;
            let compound = level < self.cfg.max_depth && remaining >= 3 && self.rng.gen_bool(0.45);
            let stmt = if compound { self.compound(level, remaining) } else { self.simple() };
            used += lines_of(&stmt) as i64;
            out.push(stmt);
            if self.rng.gen_bool(0.08) {
                break;
            }
        }
        out
    }

    fn inner_budget(&mut self, remaining: i64) -> i64 {
        let cap = (remaining - 2).max(1);
        self.rng.gen_range(1..=cap.min(24))
    }

    fn compound(&mut self, level: u32, remaining: i64) -> Stmt {
        let inner = self.inner_budget(remaining);
        match self.rng.gen_range(0..10) {
            0..=3 => self.if_stmt(level, inner),
            4 | 5 => Stmt::While(self.condition(), self.block(level + 1, inner)),
            6 => {
                let init = self.rng.gen_bool(0.7).then_some(Expr::Num(0));
                let cond = self.rng.gen_bool(0.8).then(|| self.condition());
                Stmt::For(init, cond, self.block(level + 1, inner))
            }
            7 => {
                let n = self.rng.gen_range(1..=4);
                let mut clauses: Vec<(Option<u32>, Vec<Stmt>)> = (0..n)
                    .map(|i| (Some(i), self.block(level + 1, (inner / n as i64).max(1))))
                    .collect();
                if self.rng.gen_bool(0.6) {
                    clauses.push((None, self.block(level + 1, 1)));
                }
                Stmt::Switch(Expr::Ident(self.var()), clauses)
            }
            8 => Stmt::Block(self.block(level, inner)),
            _ => self.if_stmt(level, inner),
        }
    }

    fn if_stmt(&mut self, level: u32, inner: i64) -> Stmt {
        let cond = self.condition();
        let then = self.block(level + 1, inner);
        let alt = match self.rng.gen_range(0..6) {
            0 | 1 => None,
            2 | 3 => Some(Else::Block(self.block(level + 1, (inner / 2).max(1)))),
            4 => Some(Else::ElseIf(Box::new(self.if_stmt(level, (inner / 2).max(1))))),
            // `else { if (..) {..} }` behaves like `else if`.
            _ => Some(Else::Block(vec![self.if_stmt(level + 1, (inner / 2).max(1))])),
        };
        Stmt::If(cond, then, alt)
    }
}

/// Printed lines a statement occupies (code or not).
fn lines_of(s: &Stmt) -> usize {
    let mut p = Printer::default();
    p.stmt(s, 0);
    p.lines.len()
}

#[derive(Default)]
struct Printer {
    /// (text, has code)
    lines: Vec<(String, bool)>,
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Ident(n) => n.clone(),
        Expr::Num(n) => n.to_string(),
        Expr::Str(s) => format!("'{s}'"),
        Expr::Bin(l, op, r) => format!("{} {op} {}", operand(l, op), operand(r, op)),
        Expr::Not(x) => format!("!{}", expr(x)),
        Expr::Call(f, args) => format!("{f}({})", args.iter().map(expr).collect::<Vec<_>>().join(", ")),
        Expr::Member(o, p) => format!("{}.{p}", expr(o)),
        Expr::Ternary(t, c, a) => format!("{} ? {} : {}", expr(t), expr(c), expr(a)),
        Expr::Paren(x) => format!("({})", expr(x)),
    }
}

fn precedence(op: &str) -> u8 {
    match op {
        "||" => 1,
        "&&" => 2,
        "==" | "!=" | "===" | "!==" => 3,
        "<" | ">" | "<=" | ">=" => 4,
        "+" | "-" => 5,
        _ => 6,
    }
}

/// Parenthesizes children that would otherwise re-associate.
fn operand(e: &Expr, parent: &str) -> String {
    match e {
        Expr::Bin(_, op, _) if precedence(op) <= precedence(parent) => format!("({})", expr(e)),
        Expr::Ternary(..) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

impl Printer {
    fn push(&mut self, level: usize, text: impl AsRef<str>, code: bool) {
        self.lines.push((format!("{}{}", "    ".repeat(level), text.as_ref()), code));
    }

    /// Long conditions wrap after their first logical operator, so some
    /// statements span two code lines.
    fn header(&mut self, level: usize, keyword: &str, cond: &str) {
        match cond.find(" && ").or_else(|| cond.find(" || ")).filter(|_| cond.len() > 60) {
            Some(at) => {
                self.push(level, format!("{keyword} ({}", &cond[..at + 3]), true);
                self.push(level + 2, format!("{}) {{", &cond[at + 4..]), true);
            }
            None => self.push(level, format!("{keyword} ({cond}) {{"), true),
        }
    }

    fn body(&mut self, stmts: &[Stmt], level: usize) {
        for s in stmts {
            self.stmt(s, level);
        }
    }

    fn stmt(&mut self, s: &Stmt, level: usize) {
        match s {
            Stmt::Let(n, Some(v)) => self.push(level, format!("let {n} = {};", expr(v)), true),
            Stmt::Let(n, None) => self.push(level, format!("let {n};"), true),
            Stmt::Assign(n, v) => self.push(level, format!("{n} = {};", expr(v)), true),
            Stmt::Call(c) => self.push(level, format!("{}; // {}", expr(c), "call"), true),
            Stmt::Return(Some(v)) => self.push(level, format!("return {};", expr(v)), true),
            Stmt::Return(None) => self.push(level, "return;", true),
            Stmt::Comment(c) => self.push(level, format!("// {c}"), false),
            Stmt::Blank => self.lines.push((String::new(), false)),
            Stmt::Block(b) => {
                self.push(level, "{", true);
                self.body(b, level + 1);
                self.push(level, "}", true);
            }
            Stmt::If(..) => {
                self.if_chain(s, level, "if");
                self.push(level, "}", true);
            }
            Stmt::While(c, b) => {
                self.header(level, "while", &expr(c));
                self.body(b, level + 1);
                self.push(level, "}", true);
            }
            Stmt::For(init, cond, b) => {
                let i = init.as_ref().map(|e| format!("let i = {}", expr(e))).unwrap_or_default();
                let c = cond.as_ref().map(expr).unwrap_or_default();
                let u = if init.is_some() { "i = i + 1" } else { "" };
                self.push(level, format!("for ({i}; {c}; {u}) {{"), true);
                self.body(b, level + 1);
                self.push(level, "}", true);
            }
            Stmt::Switch(d, clauses) => {
                self.push(level, format!("switch ({}) {{", expr(d)), true);
                for (label, b) in clauses {
                    match label {
                        Some(v) => self.push(level + 1, format!("case {v}:"), true),
                        None => self.push(level + 1, "default:", true),
                    }
                    self.body(b, level + 2);
                }
                self.push(level, "}", true);
            }
        }
    }

    /// Prints an if/else-if chain without the final closing brace.
    fn if_chain(&mut self, s: &Stmt, level: usize, keyword: &str) {
        let Stmt::If(c, then, alt) = s else { unreachable!() };
        self.header(level, keyword, &expr(c));
        self.body(then, level + 1);
        match alt {
            None => {}
            Some(Else::ElseIf(next)) => self.if_chain(next, level, "} else if"),
            Some(Else::Block(b)) => {
                self.push(level, "} else {", true);
                self.body(b, level + 1);
            }
        }
    }
}

fn ops_in(e: &Expr) -> u32 {
    match e {
        Expr::Bin(l, op, r) => u32::from(*op == "&&" || *op == "||") + ops_in(l) + ops_in(r),
        Expr::Not(x) | Expr::Member(x, _) | Expr::Paren(x) => ops_in(x),
        Expr::Call(_, args) => args.iter().map(ops_in).sum(),
        Expr::Ternary(t, c, a) => ops_in(t) + ops_in(c) + ops_in(a),
        _ => 0,
    }
}

/// Ternaries and their test operator counts in an expression.
fn ternary_tests(e: &Expr, out: &mut Vec<u32>) {
    match e {
        Expr::Ternary(t, c, a) => {
            out.push(ops_in(t));
            ternary_tests(t, out);
            ternary_tests(c, out);
            ternary_tests(a, out);
        }
        Expr::Bin(l, _, r) => {
            ternary_tests(l, out);
            ternary_tests(r, out);
        }
        Expr::Not(x) | Expr::Member(x, _) | Expr::Paren(x) => ternary_tests(x, out),
        Expr::Call(_, args) => args.iter().for_each(|a| ternary_tests(a, out)),
        _ => {}
    }
}

#[derive(Default)]
struct Tally {
    branches: u32,
    conditions: Vec<u32>,
    logical: u32,
}

impl Tally {
    fn cond(&mut self, e: &Expr) {
        self.conditions.push(ops_in(e));
        self.expr(e);
    }

    fn expr(&mut self, e: &Expr) {
        self.logical += ops_in(e);
        let mut tests = Vec::new();
        ternary_tests(e, &mut tests);
        self.branches += tests.len() as u32;
        self.conditions.extend(tests);
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        stmts.iter().for_each(|s| self.stmt(s));
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Let(_, Some(v)) | Stmt::Assign(_, v) | Stmt::Call(v) | Stmt::Return(Some(v)) => self.expr(v),
            Stmt::If(c, then, alt) => {
                self.branches += 1;
                self.cond(c);
                self.stmts(then);
                match alt {
                    Some(Else::Block(b)) => self.stmts(b),
                    Some(Else::ElseIf(next)) => self.stmt(next),
                    None => {}
                }
            }
            Stmt::While(c, b) => {
                self.branches += 1;
                self.cond(c);
                self.stmts(b);
            }
            Stmt::For(init, c, b) => {
                self.branches += 1;
                if let Some(i) = init {
                    self.expr(i);
                }
                if let Some(c) = c {
                    self.cond(c);
                }
                self.stmts(b);
            }
            Stmt::Switch(d, clauses) => {
                self.expr(d);
                for (label, b) in clauses {
                    self.branches += u32::from(label.is_some());
                    self.stmts(b);
                }
            }
            Stmt::Block(b) => self.stmts(b),
            _ => {}
        }
    }
}

fn depth(s: &Stmt) -> u32 {
    match s {
        Stmt::If(_, then, alt) => {
            let t = 1 + depth_all(then);
            let a = match alt {
                None => 0,
                Some(Else::ElseIf(next)) => depth(next),
                Some(Else::Block(b)) if sole_if(b).is_some() => depth(sole_if(b).unwrap()),
                Some(Else::Block(b)) => 1 + depth_all(b),
            };
            t.max(a)
        }
        Stmt::While(_, b) | Stmt::For(_, _, b) => 1 + depth_all(b),
        Stmt::Switch(_, clauses) => 1 + clauses.iter().map(|(_, b)| depth_all(b)).max().unwrap_or(0),
        Stmt::Block(b) => depth_all(b),
        _ => 0,
    }
}

/// The only code statement of an else-block, when it is an If. Comments
/// are not statements to the parser.
fn sole_if(b: &[Stmt]) -> Option<&Stmt> {
    let mut code = b.iter().filter(|s| code_stmt(s));
    match (code.next(), code.next()) {
        (Some(s @ Stmt::If(..)), None) => Some(s),
        _ => None,
    }
}

fn depth_all(stmts: &[Stmt]) -> u32 {
    stmts.iter().map(depth).max().unwrap_or(0)
}

fn code_stmt(s: &Stmt) -> bool {
    !matches!(s, Stmt::Comment(_) | Stmt::Blank)
}

/// Generates one function from `seed`.
pub fn generate(seed: u64, cfg: &GenConfig) -> GeneratedFunction {
    let mut g = Gen { rng: StdRng::seed_from_u64(seed), cfg };
    let name = format!("gen{seed}");
    let target = g.rng.gen_range(cfg.min_loc..=cfg.max_loc) as i64;
    if target <= 1 {
        let source = format!("function {name}() {{}}\n");
        let oracle = OracleMetrics {
            cyclomatic_complexity: 1,
            max_depth: 0,
            condition_ops: Vec::new(),
            bumps: 0,
            logical_ops: 0,
            loc: 1,
        };
        return GeneratedFunction { name, source, oracle };
    }

    // Fill the body, then trim statements until the LoC fits the target.
    let mut body = g.block(0, target - 2);
    if g.rng.gen_bool(0.5) {
        body.push(Stmt::Return(Some(Expr::Ident(g.var()))));
    }
    let mut printed = print_function(&name, &body);
    while printed.1 > cfg.max_loc.max(2) && !body.is_empty() {
        body.pop();
        printed = print_function(&name, &body);
    }
    let (source, loc) = printed;

    let mut tally = Tally::default();
    tally.stmts(&body);
    let mut condition_ops = tally.conditions;
    condition_ops.sort_unstable();
    let oracle = OracleMetrics {
        cyclomatic_complexity: 1 + tally.branches,
        max_depth: depth_all(&body),
        condition_ops,
        bumps: body.iter().filter(|s| code_stmt(s) && depth(s) >= 2).count() as u32,
        logical_ops: tally.logical,
        loc,
    };
    GeneratedFunction { name, source, oracle }
}

fn print_function(name: &str, body: &[Stmt]) -> (String, u32) {
    let mut p = Printer::default();
    p.push(0, "// generated", false);
    p.push(0, format!("function {name}(a, b, limit) {{"), true);
    p.body(body, 1);
    p.push(0, "}", true);
    let loc = p.lines.iter().filter(|(_, code)| *code).count() as u32;
    let mut text: String = p.lines.iter().map(|(l, _)| format!("{l}\n")).collect();
    text.push('\n');
    (text, loc)
}

/// Token-level recount straight from source text: strips `//` comments,
/// then counts whole-word branch keywords, `?` tokens, logical operator
/// tokens and code lines. Valid for generated text, whose strings never
/// contain keywords, `?`, `//`, `&&` or `||`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenCounts {
    pub branch_keywords: u32,
    pub question_marks: u32,
    pub logical_ops: u32,
    pub code_lines: u32,
}

pub fn token_counts(source: &str) -> TokenCounts {
    let mut counts = TokenCounts { branch_keywords: 0, question_marks: 0, logical_ops: 0, code_lines: 0 };
    for line in source.lines() {
        let code = line.split("//").next().unwrap_or("");
        if code.trim().is_empty() {
            continue;
        }
        counts.code_lines += 1;
        counts.question_marks += code.matches('?').count() as u32;
        counts.logical_ops += (code.matches("&&").count() + code.matches("||").count()) as u32;
        counts.branch_keywords += code
            .split(|c: char| !(c.is_alphanumeric() || c == '_'))
            .filter(|w| matches!(*w, "if" | "while" | "for" | "case"))
            .count() as u32;
    }
    counts
}
