use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    Number,
    Str,
    Punct,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    /// 1-based line and char column of the first character.
    pub line: u32,
    pub col: u32,
    /// Exclusive end position (tokens never span lines).
    pub end_col: u32,
}

impl Token<'_> {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punct, text)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }
}

pub const KEYWORDS: &[&str] = &[
    "function", "let", "if", "else", "while", "for", "switch", "case", "default", "return",
];

// Longest first so that greedy matching picks `===` over `==`.
const PUNCTUATION: &[&str] = &[
    "===", "!==", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", ",", ";", ":", ".",
    "?", "=", "<", ">", "+", "-", "*", "/", "%", "!",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.line, self.col, message)
    }
}

/// Splits LF-normalized source into tokens, skipping whitespace and
/// comments. The returned vector always ends with an `Eof` token.
pub fn tokenize(src: &str) -> Result<Vec<Token<'_>>, ParseError> {
    let mut cur = Cursor { src, pos: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();
    loop {
        skip_trivia(&mut cur)?;
        let (line, col, start) = (cur.line, cur.col, cur.pos);
        let Some(c) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, text: "", line, col, end_col: col });
            return Ok(tokens);
        };
        let kind = if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$') {
                cur.bump();
            }
            if KEYWORDS.contains(&&src[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit() {
            lex_number(&mut cur);
            TokenKind::Number
        } else if c == '"' || c == '\'' {
            lex_string(&mut cur, c)?;
            TokenKind::Str
        } else if let Some(p) = PUNCTUATION.iter().find(|p| cur.rest().starts_with(**p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punct
        } else {
            return Err(cur.error(format!("unexpected character '{c}'")));
        };
        tokens.push(Token { kind, text: &src[start..cur.pos], line, col, end_col: cur.col });
    }
}

fn skip_trivia(cur: &mut Cursor<'_>) -> Result<(), ParseError> {
    loop {
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek_at(1) == Some('/') => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            Some('/') if cur.peek_at(1) == Some('*') => {
                let (line, col) = (cur.line, cur.col);
                cur.bump();
                cur.bump();
                loop {
                    match cur.peek() {
                        None => return Err(ParseError::at(line, col, "unterminated block comment")),
                        Some('*') if cur.peek_at(1) == Some('/') => {
                            cur.bump();
                            cur.bump();
                            break;
                        }
                        Some(_) => {
                            cur.bump();
                        }
                    }
                }
            }
            _ => return Ok(()),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) {
    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
    }
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
    }
}

fn lex_string(cur: &mut Cursor<'_>, quote: char) -> Result<(), ParseError> {
    let (line, col) = (cur.line, cur.col);
    cur.bump();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err(ParseError::at(line, col, "unterminated string literal")),
            Some('\\') => {
                if cur.peek().is_none_or(|c| c == '\n') {
                    return Err(ParseError::at(line, col, "unterminated string literal"));
                }
                cur.bump();
            }
            Some(c) if c == quote => return Ok(()),
            Some(_) => {}
        }
    }
}
