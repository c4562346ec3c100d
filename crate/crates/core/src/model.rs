//! Language-neutral code model.
//!
//! Every front-end lowers its syntax into [`Node`] trees so that metrics,
//! smell detectors and validators never depend on a concrete grammar.
//!
//! Conventions for child layout (all front-ends must follow them):
//!
//! | kind            | children                                        | `text`                  |
//! |-----------------|-------------------------------------------------|-------------------------|
//! | Function        | params (Identifier)…, body (Block)              | function name           |
//! | Block           | statements                                      |                         |
//! | If              | condition, then, [else]                         |                         |
//! | While           | condition, body                                 |                         |
//! | For             | present header slots…, body                     | slot mask, e.g. `"icu"` |
//! | Switch          | discriminant, CaseClause…                       |                         |
//! | CaseClause      | [test], statements…                             | `"case"` / `"default"`  |
//! | Return          | [value]                                         |                         |
//! | VarDecl         | [initializer]                                   | declared name           |
//! | ExprStmt        | expression                                      |                         |
//! | Assign          | target, value                                   |                         |
//! | Call            | callee, args…                                   |                         |
//! | BinaryOp        | lhs, rhs                                        |                         |
//! | UnaryOp         | operand                                         |                         |
//! | Identifier      |                                                 | name                    |
//! | Literal         |                                                 | raw source text         |
//! | MemberAccess    | object, property (Identifier)                   |                         |
//! | ConditionalExpr | test, consequent, alternate                     |                         |
//!
//! The `For` slot mask lists which header slots are present, using `i`
//! (init), `c` (condition) and `u` (update), or `-` for an absent slot.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A region of a source file. Lines and columns are 1-based and count
/// characters of the LF-normalized text; the end position is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: PathBuf,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<PathBuf>, start: (u32, u32), end: (u32, u32)) -> Self {
        let span = Self {
            file: file.into(),
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        };
        debug_assert!(span.is_well_formed(), "malformed span {span}");
        span
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    pub fn is_well_formed(&self) -> bool {
        self.start_line >= 1
            && self.start_col >= 1
            && (self.start_line < self.end_line
                || (self.start_line == self.end_line && self.start_col <= self.end_col))
    }

    /// True when `other` lies entirely inside `self` (same file assumed).
    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }

    /// Smallest span covering both.
    pub fn cover(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start_line: self.start().min(other.start()).0,
            start_col: self.start().min(other.start()).1,
            end_line: self.end().max(other.end()).0,
            end_col: self.end().max(other.end()).1,
        }
    }

    pub fn with_file(mut self, file: &Path) -> Self {
        self.file = file.to_path_buf();
        self
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}-{}:{}",
            self.file.display(),
            self.start_line,
            self.start_col,
            self.end_line,
            self.end_col
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Function,
    Block,
    If,
    While,
    For,
    Switch,
    CaseClause,
    Return,
    VarDecl,
    ExprStmt,
    Assign,
    Call,
    BinaryOp,
    UnaryOp,
    Identifier,
    Literal,
    MemberAccess,
    ConditionalExpr,
}

impl NodeKind {
    /// Statement-level nesting constructs.
    pub fn is_nesting(self) -> bool {
        matches!(self, NodeKind::If | NodeKind::While | NodeKind::For | NodeKind::Switch)
    }

    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::If
                | NodeKind::While
                | NodeKind::For
                | NodeKind::Switch
                | NodeKind::Return
                | NodeKind::VarDecl
                | NodeKind::ExprStmt
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub span: SourceSpan,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Node>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl Node {
    pub fn new(kind: NodeKind, span: SourceSpan, children: Vec<Node>) -> Self {
        Self { kind, span, children, operator: None, text: None }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn with_operator(mut self, op: impl Into<String>) -> Self {
        self.operator = Some(op.into());
        self
    }

    pub fn text(&self) -> &str {
        self.text.as_deref().unwrap_or("")
    }

    pub fn op(&self) -> &str {
        self.operator.as_deref().unwrap_or("")
    }

    /// Pre-order traversal, including `self`.
    pub fn walk(&self) -> impl Iterator<Item = &Node> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    /// Condition of an If/While/ConditionalExpr, or the condition slot of a For.
    pub fn condition(&self) -> Option<&Node> {
        match self.kind {
            NodeKind::If | NodeKind::While | NodeKind::ConditionalExpr => self.children.first(),
            NodeKind::For => {
                let mask = self.text();
                if mask.as_bytes().get(1) != Some(&b'c') {
                    return None;
                }
                let idx = usize::from(mask.as_bytes().first() == Some(&b'i'));
                self.children.get(idx)
            }
            _ => None,
        }
    }

    /// Statement bodies directly owned by this node (then/else, loop body,
    /// case statements, block statements).
    pub fn child_statements(&self) -> Vec<&Node> {
        match self.kind {
            NodeKind::Function => self.children.last().into_iter().collect(),
            NodeKind::Block => self.children.iter().collect(),
            NodeKind::If => self.children.iter().skip(1).collect(),
            NodeKind::While => self.children.iter().skip(1).collect(),
            NodeKind::For => self.children.last().into_iter().collect(),
            NodeKind::Switch => self.children.iter().skip(1).collect(),
            NodeKind::CaseClause => {
                let skip = usize::from(self.text() != "default");
                self.children.iter().skip(skip).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Structural equality ignoring spans.
    pub fn same_shape(&self, other: &Node) -> bool {
        self.kind == other.kind
            && self.operator == other.operator
            && self.text == other.text
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_shape(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Standalone,
    ClassMember,
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionKind::Standalone => "standalone function",
            FunctionKind::ClassMember => "class member function",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFunction {
    pub name: String,
    pub kind: FunctionKind,
    pub language: String,
    pub span: SourceSpan,
    pub body: Node,
    /// Non-blank, non-comment lines within `span`.
    pub loc: u32,
    pub params: Vec<String>,
}

impl SourceFunction {
    /// The function's top-level block.
    pub fn block(&self) -> &Node {
        self.body.children.last().expect("function node always ends with its block")
    }
}

/// A parsed file: its text plus every top-level function.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: PathBuf,
    pub language: String,
    pub text: String,
    pub functions: Vec<SourceFunction>,
}

impl SourceUnit {
    pub fn function(&self, name: &str) -> Option<&SourceFunction> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Exact source text covered by `span`.
    pub fn slice(&self, span: &SourceSpan) -> &str {
        let index = LineIndex::new(&self.text);
        &self.text[index.range(span)]
    }
}

/// Maps 1-based (line, char-column) positions to byte offsets.
#[derive(Debug, Clone)]
pub struct LineIndex<'a> {
    text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Self { text, line_starts }
    }

    pub fn offset(&self, line: u32, col: u32) -> usize {
        let Some(&start) = self.line_starts.get(line.saturating_sub(1) as usize) else {
            return self.text.len();
        };
        let rest = &self.text[start..];
        let skip = col.saturating_sub(1) as usize;
        match rest.char_indices().nth(skip) {
            Some((i, _)) => start + i,
            None => self.text.len(),
        }
    }

    pub fn range(&self, span: &SourceSpan) -> std::ops::Range<usize> {
        self.offset(span.start_line, span.start_col)..self.offset(span.end_line, span.end_col)
    }

    /// Byte offset of the first character of `line`.
    pub fn line_start(&self, line: u32) -> usize {
        self.offset(line, 1)
    }
}

/// Every If, While, For, CaseClause (excluding `default`) and
/// ConditionalExpr in the function, in source order.
pub fn branch_nodes(function: &SourceFunction) -> Vec<&Node> {
    function.body.walk().filter(|n| is_branch(n)).collect()
}

fn is_branch(node: &Node) -> bool {
    match node.kind {
        NodeKind::If | NodeKind::While | NodeKind::For | NodeKind::ConditionalExpr => true,
        NodeKind::CaseClause => node.text() != "default",
        _ => false,
    }
}

fn is_logical(op: &str) -> bool {
    op == "&&" || op == "||"
}

/// Binary `&&` / `||` operators in the subtree. Unary `!` is not counted.
pub fn logical_operator_count(condition: &Node) -> u32 {
    condition
        .walk()
        .filter(|n| n.kind == NodeKind::BinaryOp && is_logical(n.op()))
        .count() as u32
}

/// Deepest chain of If/While/For/Switch constructs nested in one another.
pub fn max_nesting_depth(function: &SourceFunction) -> u32 {
    nesting_depth(function.block())
}

/// Nesting depth reached by a statement subtree, counting the statement
/// itself when it is a nesting construct. `else if` does not add a level.
pub fn nesting_depth(stmt: &Node) -> u32 {
    deepest_nesting(stmt).0
}

/// Depth plus the innermost nesting construct of the first deepest chain.
pub fn deepest_nesting(stmt: &Node) -> (u32, Option<&Node>) {
    match stmt.kind {
        NodeKind::If => {
            let (then_depth, then_node) = deepest_nesting(&stmt.children[1]);
            let mut best = (1 + then_depth, then_node.or(Some(stmt)));
            if let Some(alt) = stmt.children.get(2) {
                let (alt_depth, alt_node) = match else_if_target(alt) {
                    Some(chained) => deepest_nesting(chained),
                    None => {
                        let (d, n) = deepest_nesting(alt);
                        (1 + d, n.or(Some(stmt)))
                    }
                };
                if alt_depth > best.0 {
                    best = (alt_depth, alt_node);
                }
            }
            best
        }
        NodeKind::While | NodeKind::For | NodeKind::Switch => {
            let (d, n) = deepest_of(stmt.child_statements());
            (1 + d, n.or(Some(stmt)))
        }
        NodeKind::Block | NodeKind::CaseClause => deepest_of(stmt.child_statements()),
        _ => (0, None),
    }
}

fn deepest_of(stmts: Vec<&Node>) -> (u32, Option<&Node>) {
    let mut best = (0, None);
    for s in stmts {
        let found = deepest_nesting(s);
        if found.0 > best.0 {
            best = found;
        }
    }
    best
}

/// The If that an else-branch chains to, if the branch is `else if` or an
/// else-block whose sole statement is an If.
fn else_if_target(alt: &Node) -> Option<&Node> {
    match alt.kind {
        NodeKind::If => Some(alt),
        NodeKind::Block if alt.children.len() == 1 && alt.children[0].kind == NodeKind::If => {
            Some(&alt.children[0])
        }
        _ => None,
    }
}
