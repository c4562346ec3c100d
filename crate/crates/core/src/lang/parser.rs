//! Recursive-descent parser for MiniLang, a JavaScript-like subset.
//!
//! ```text
//! unit       := function*
//! function   := "function" IDENT "(" [IDENT {"," IDENT}] ")" block
//! block      := "{" stmt* "}"
//! stmt       := block | varDecl | ifStmt | whileStmt | forStmt
//!             | switchStmt | returnStmt | exprStmt
//! varDecl    := "let" IDENT ["=" expr] ";"
//! ifStmt     := "if" "(" expr ")" stmt ["else" stmt]
//! whileStmt  := "while" "(" expr ")" stmt
//! forStmt    := "for" "(" [varDecl-or-expr] ";" [expr] ";" [expr] ")" stmt
//! switchStmt := "switch" "(" expr ")" "{" {("case" expr | "default") ":" stmt*} "}"
//! returnStmt := "return" [expr] ";"
//! exprStmt   := expr ";"
//! ```
//!
//! Expressions, loosest first: assignment, `?:`, `||`, `&&`, equality,
//! relational, additive, multiplicative, unary `!`/`-`, then postfix call
//! and member access.

use std::path::{Path, PathBuf};

use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;
use crate::model::{FunctionKind, Node, NodeKind, SourceFunction, SourceSpan};

pub const LANGUAGE_TAG: &str = "minilang";

/// Parses a whole unit. Fails on the first syntax error.
pub fn parse_unit(source: &str, file: &Path) -> Result<Vec<SourceFunction>, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0, file: file.to_path_buf() };
    let mut functions = Vec::new();
    while !parser.at_eof() {
        functions.push(parser.function()?);
    }
    Ok(functions)
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    file: PathBuf,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token<'a> {
        &self.tokens[self.pos]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn advance(&mut self) -> Token<'a> {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let tok = self.peek();
        let found = if tok.kind == TokenKind::Eof { "end of input".to_string() } else { format!("'{}'", tok.text) };
        ParseError::at(tok.line, tok.col, format!("{}, found {found}", message.into()))
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token<'a>> {
        if self.peek().is_punct(p) {
            Ok(self.advance())
        } else {
            Err(self.error_here(format!("expected '{p}'")))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token<'a>> {
        if self.peek().is_keyword(kw) {
            Ok(self.advance())
        } else {
            Err(self.error_here(format!("expected '{kw}'")))
        }
    }

    fn expect_ident(&mut self) -> PResult<Token<'a>> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.advance())
        } else {
            Err(self.error_here("expected identifier"))
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn span(&self, start: &Token<'_>, end: &Token<'_>) -> SourceSpan {
        SourceSpan::new(self.file.clone(), (start.line, start.col), (end.line, end.end_col))
    }

    fn prev(&self) -> &Token<'a> {
        &self.tokens[self.pos - 1]
    }

    fn span_from(&self, start: &Token<'_>) -> SourceSpan {
        self.span(start, self.prev())
    }

    fn ident_node(&self, tok: &Token<'_>) -> Node {
        Node::new(NodeKind::Identifier, self.span(tok, tok), Vec::new()).with_text(tok.text)
    }

    fn function(&mut self) -> PResult<SourceFunction> {
        let first_index = self.pos;
        let start = self.expect_keyword("function")?;
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        let mut children = Vec::new();
        if !self.peek().is_punct(")") {
            loop {
                let p = self.expect_ident()?;
                params.push(p.text.to_string());
                children.push(self.ident_node(&p));
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        children.push(self.block()?);
        let span = self.span_from(&start);
        let mut lines: Vec<u32> = self.tokens[first_index..self.pos].iter().map(|t| t.line).collect();
        lines.dedup();
        let body = Node::new(NodeKind::Function, span.clone(), children).with_text(name.text);
        Ok(SourceFunction {
            name: name.text.to_string(),
            kind: FunctionKind::Standalone,
            language: LANGUAGE_TAG.to_string(),
            span,
            body,
            loc: lines.len() as u32,
            params,
        })
    }

    fn block(&mut self) -> PResult<Node> {
        let start = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.peek().is_punct("}") {
            if self.at_eof() {
                return Err(self.error_here("expected '}'"));
            }
            stmts.push(self.statement()?);
        }
        self.advance();
        Ok(Node::new(NodeKind::Block, self.span_from(&start), stmts))
    }

    fn statement(&mut self) -> PResult<Node> {
        let tok = self.peek().clone();
        if tok.is_punct("{") {
            return self.block();
        }
        if tok.kind == TokenKind::Keyword {
            match tok.text {
                "let" => {
                    let mut decl = self.var_decl()?;
                    self.expect_punct(";")?;
                    decl.span = self.span_from(&tok);
                    return Ok(decl);
                }
                "if" => return self.if_stmt(),
                "while" => return self.while_stmt(),
                "for" => return self.for_stmt(),
                "switch" => return self.switch_stmt(),
                "return" => {
                    self.advance();
                    let mut children = Vec::new();
                    if !self.peek().is_punct(";") {
                        children.push(self.expression()?);
                    }
                    self.expect_punct(";")?;
                    return Ok(Node::new(NodeKind::Return, self.span_from(&tok), children));
                }
                _ => return Err(self.error_here("expected statement")),
            }
        }
        let expr = self.expression()?;
        self.expect_punct(";")?;
        Ok(Node::new(NodeKind::ExprStmt, self.span_from(&tok), vec![expr]))
    }

    /// `let IDENT [= expr]` without the terminating semicolon.
    fn var_decl(&mut self) -> PResult<Node> {
        let start = self.expect_keyword("let")?;
        let name = self.expect_ident()?;
        let mut children = Vec::new();
        if self.eat_punct("=") {
            children.push(self.expression()?);
        }
        Ok(Node::new(NodeKind::VarDecl, self.span_from(&start), children).with_text(name.text))
    }

    fn paren_condition(&mut self) -> PResult<Node> {
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        Ok(cond)
    }

    fn if_stmt(&mut self) -> PResult<Node> {
        let start = self.expect_keyword("if")?;
        let cond = self.paren_condition()?;
        let then = self.statement()?;
        let mut children = vec![cond, then];
        if self.peek().is_keyword("else") {
            self.advance();
            children.push(self.statement()?);
        }
        Ok(Node::new(NodeKind::If, self.span_from(&start), children))
    }

    fn while_stmt(&mut self) -> PResult<Node> {
        let start = self.expect_keyword("while")?;
        let cond = self.paren_condition()?;
        let body = self.statement()?;
        Ok(Node::new(NodeKind::While, self.span_from(&start), vec![cond, body]))
    }

    fn for_stmt(&mut self) -> PResult<Node> {
        let start = self.expect_keyword("for")?;
        self.expect_punct("(")?;
        let mut mask = String::with_capacity(3);
        let mut children = Vec::new();
        if self.peek().is_punct(";") {
            mask.push('-');
        } else {
            let init = if self.peek().is_keyword("let") { self.var_decl()? } else { self.expression()? };
            children.push(init);
            mask.push('i');
        }
        self.expect_punct(";")?;
        if self.peek().is_punct(";") {
            mask.push('-');
        } else {
            children.push(self.expression()?);
            mask.push('c');
        }
        self.expect_punct(";")?;
        if self.peek().is_punct(")") {
            mask.push('-');
        } else {
            children.push(self.expression()?);
            mask.push('u');
        }
        self.expect_punct(")")?;
        children.push(self.statement()?);
        Ok(Node::new(NodeKind::For, self.span_from(&start), children).with_text(mask))
    }

    fn switch_stmt(&mut self) -> PResult<Node> {
        let start = self.expect_keyword("switch")?;
        let disc = self.paren_condition()?;
        self.expect_punct("{")?;
        let mut children = vec![disc];
        while !self.peek().is_punct("}") {
            let clause_start = self.peek().clone();
            let (label, mut clause_children) = if clause_start.is_keyword("case") {
                self.advance();
                ("case", vec![self.expression()?])
            } else if clause_start.is_keyword("default") {
                self.advance();
                ("default", Vec::new())
            } else {
                return Err(self.error_here("expected 'case', 'default' or '}'"));
            };
            self.expect_punct(":")?;
            while !(self.peek().is_keyword("case") || self.peek().is_keyword("default") || self.peek().is_punct("}")) {
                if self.at_eof() {
                    return Err(self.error_here("expected '}'"));
                }
                clause_children.push(self.statement()?);
            }
            children.push(
                Node::new(NodeKind::CaseClause, self.span_from(&clause_start), clause_children).with_text(label),
            );
        }
        self.advance();
        Ok(Node::new(NodeKind::Switch, self.span_from(&start), children))
    }

    fn expression(&mut self) -> PResult<Node> {
        self.assignment()
    }

    fn assignment(&mut self) -> PResult<Node> {
        let start = self.peek().clone();
        let target = self.ternary()?;
        if self.peek().is_punct("=") {
            if !matches!(target.kind, NodeKind::Identifier | NodeKind::MemberAccess) {
                return Err(ParseError::at(start.line, start.col, "invalid assignment target"));
            }
            self.advance();
            let value = self.assignment()?;
            return Ok(Node::new(NodeKind::Assign, self.span_from(&start), vec![target, value]));
        }
        Ok(target)
    }

    fn ternary(&mut self) -> PResult<Node> {
        let start = self.peek().clone();
        let test = self.binary(0)?;
        if self.eat_punct("?") {
            let consequent = self.assignment()?;
            self.expect_punct(":")?;
            let alternate = self.assignment()?;
            return Ok(Node::new(
                NodeKind::ConditionalExpr,
                self.span_from(&start),
                vec![test, consequent, alternate],
            ));
        }
        Ok(test)
    }

    fn binary(&mut self, level: usize) -> PResult<Node> {
        const LEVELS: &[&[&str]] = &[
            &["||"],
            &["&&"],
            &["==", "!=", "===", "!=="],
            &["<", ">", "<=", ">="],
            &["+", "-"],
            &["*", "/", "%"],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let start = self.peek().clone();
        let mut lhs = self.binary(level + 1)?;
        while self.peek().kind == TokenKind::Punct && LEVELS[level].contains(&self.peek().text) {
            let op = self.advance().text;
            let rhs = self.binary(level + 1)?;
            lhs = Node::new(NodeKind::BinaryOp, self.span_from(&start), vec![lhs, rhs]).with_operator(op);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Node> {
        let start = self.peek().clone();
        if start.is_punct("!") || start.is_punct("-") {
            self.advance();
            let operand = self.unary()?;
            return Ok(Node::new(NodeKind::UnaryOp, self.span_from(&start), vec![operand]).with_operator(start.text));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Node> {
        let start = self.peek().clone();
        let mut expr = self.primary()?;
        loop {
            if self.eat_punct("(") {
                let mut children = vec![expr];
                if !self.peek().is_punct(")") {
                    loop {
                        children.push(self.assignment()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct(")")?;
                expr = Node::new(NodeKind::Call, self.span_from(&start), children);
            } else if self.eat_punct(".") {
                let prop = self.expect_ident()?;
                let prop = self.ident_node(&prop);
                expr = Node::new(NodeKind::MemberAccess, self.span_from(&start), vec![expr, prop]);
            } else {
                return Ok(expr);
            }
        }
    }

    fn primary(&mut self) -> PResult<Node> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Ident => {
                self.advance();
                Ok(self.ident_node(&tok))
            }
            TokenKind::Number | TokenKind::Str => {
                self.advance();
                Ok(Node::new(NodeKind::Literal, self.span(&tok, &tok), Vec::new()).with_text(tok.text))
            }
            TokenKind::Punct if tok.text == "(" => {
                self.advance();
                let mut inner = self.expression()?;
                self.expect_punct(")")?;
                // Parenthesized expressions keep their parens inside the span.
                inner.span = self.span_from(&tok);
                Ok(inner)
            }
            _ => Err(self.error_here("expected expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{branch_nodes, logical_operator_count, max_nesting_depth};

    fn parse(src: &str) -> Vec<SourceFunction> {
        parse_unit(src, Path::new("t.mini")).unwrap()
    }

    fn one(src: &str) -> SourceFunction {
        parse(src).remove(0)
    }

    fn cond_of(src: &str) -> Node {
        let f = one(&format!("function f() {{ if ({src}) {{ }} }}"));
        f.block().children[0].children[0].clone()
    }

    #[test]
    fn empty_unit_has_no_functions() {
        assert!(parse("").is_empty());
        assert!(parse("  // only a comment\n").is_empty());
    }

    #[test]
    fn functions_in_source_order() {
        let fns = parse("function a(){} function b(){}");
        let names: Vec<_> = fns.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
        assert_eq!(fns[1].span.start_col, 16);
    }

    #[test]
    fn malformed_header_fails_on_line_one() {
        let err = parse_unit("function f( {", Path::new("t.mini")).unwrap_err();
        assert_eq!(err.span.start_line, 1);
    }

    #[test]
    fn errors_report_first_offending_token() {
        let err = parse_unit("function f() {\n  let x = ;\n}", Path::new("t.mini")).unwrap_err();
        assert_eq!((err.span.start_line, err.span.start_col), (2, 11));
        assert!(err.message.contains("expected expression"), "{}", err.message);
    }

    #[test]
    fn branch_nodes_examples() {
        assert!(branch_nodes(&one("function f() { return 1; }")).is_empty());

        let f = one("function f(a) {\n  if (a) { return 1; }\n  return 2;\n}");
        let branches = branch_nodes(&f);
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].kind, NodeKind::If);
        assert_eq!(branches[0].span.start_line, 2);

        let f = one("function f(a) { switch (a) { case 1: return 1; default: return 0; } }");
        let branches = branch_nodes(&f);
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].kind, NodeKind::CaseClause);
        assert_eq!(branches[0].text(), "case");
    }

    #[test]
    fn logical_operator_examples() {
        assert_eq!(logical_operator_count(&cond_of("a")), 0);
        assert_eq!(logical_operator_count(&cond_of("a && b")), 1);
        assert_eq!(logical_operator_count(&cond_of("a && b || !c")), 2);
    }

    #[test]
    fn nesting_depth_examples() {
        assert_eq!(max_nesting_depth(&one("function f() { x = 1; y = 2; }")), 0);
        assert_eq!(max_nesting_depth(&one("function f() { if (a) { while (b) { if (c) { x = 1; } } } }")), 3);
        assert_eq!(max_nesting_depth(&one("function f() { if (a) { } else if (b) { } else { } }")), 1);
        assert_eq!(max_nesting_depth(&one("function f() { if (a) { } else { if (b) { } } }")), 1);
        assert_eq!(max_nesting_depth(&one("function f() { if (a) { } else { if (b) { } x = 1; } }")), 2);
        assert_eq!(max_nesting_depth(&one("function f() { x = a ? b : c; }")), 0);
        assert_eq!(max_nesting_depth(&one("function f(a) { switch (a) { case 1: if (b) { } } }")), 2);
    }

    #[test]
    fn precedence_and_parens() {
        let c = cond_of("a || b && c");
        assert_eq!(c.op(), "||");
        assert_eq!(c.children[1].op(), "&&");
        let c = cond_of("(a || b) && c");
        assert_eq!(c.op(), "&&");
        assert_eq!(c.children[0].span.start_col, 20);
        let f = one("function f() { x = a ? b : c ? d : e; }");
        let assign = &f.block().children[0].children[0];
        assert_eq!(assign.kind, NodeKind::Assign);
        assert_eq!(assign.children[1].kind, NodeKind::ConditionalExpr);
        assert_eq!(assign.children[1].children[2].kind, NodeKind::ConditionalExpr);
    }

    #[test]
    fn for_slot_mask() {
        let f = one("function f() { for (let i = 0; i < n; i = i + 1) { } for (;;) { } for (; ok;) { } }");
        let stmts = &f.block().children;
        assert_eq!(stmts[0].text(), "icu");
        assert_eq!(stmts[0].condition().unwrap().op(), "<");
        assert_eq!(stmts[1].text(), "---");
        assert!(stmts[1].condition().is_none());
        assert_eq!(stmts[2].condition().unwrap().text(), "ok");
    }

    #[test]
    fn loc_ignores_blank_and_comment_lines() {
        let f = one("function f() {\n\n  // note\n  /* block\n  comment */ x = 1;\n  return x;\n}");
        assert_eq!(f.loc, 4);
    }

    #[test]
    fn member_calls() {
        let f = one("function f() { console.log(a.b, g(1)); }");
        let call = &f.block().children[0].children[0];
        assert_eq!(call.kind, NodeKind::Call);
        assert_eq!(call.children[0].kind, NodeKind::MemberAccess);
        assert_eq!(call.children.len(), 3);
    }

    #[test]
    fn rejects_invalid_assignment_target() {
        assert!(parse_unit("function f() { 1 = x; }", Path::new("t")).is_err());
        assert!(parse_unit("function f() { f() = x; }", Path::new("t")).is_err());
    }
}
