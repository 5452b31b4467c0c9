//! Generic block grammar shared by every file kind.
//!
//! A file is a sequence of statements. A statement is the tokens up to the
//! end of its line, optionally followed by a `{ ... }` block of nested
//! statements. The file-specific modules interpret statements with a
//! [`Cursor`]; a malformed statement produces a diagnostic and parsing
//! continues with the next one.

use super::lexer::{lex, Tok, Token};
use crate::diag::{codes, Diagnostic, Origin, SourceSpan};
use crate::model::is_valid_name;

#[derive(Debug, Clone)]
pub struct Stmt {
    pub tokens: Vec<Token>,
    pub block: Option<Vec<Stmt>>,
    pub line: u32,
    pub column: u32,
}

impl Stmt {
    pub fn span(&self, file: &str) -> SourceSpan {
        let len = self.tokens.first().map(|t| t.len).unwrap_or(1);
        SourceSpan::new(file, self.line, self.column, len)
    }

    pub fn origin(&self, file: &str) -> Origin {
        Origin::at(self.span(file))
    }

    pub fn head(&self) -> Option<&str> {
        match self.tokens.first().map(|t| &t.tok) {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }
}

pub struct SyntaxTree {
    pub stmts: Vec<Stmt>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_statements(text: &str, file: &str) -> SyntaxTree {
    let (tokens, mut diagnostics) = lex(text, file);
    let mut p = StmtParser {
        tokens,
        pos: 0,
        file,
        diags: Vec::new(),
    };
    let stmts = p.block(None);
    diagnostics.append(&mut p.diags);
    SyntaxTree { stmts, diagnostics }
}

struct StmtParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a str,
    diags: Vec<Diagnostic>,
}

impl StmtParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error_at(&mut self, t: &Token, msg: impl Into<String>) {
        let span = t.span(self.file);
        self.diags
            .push(Diagnostic::error(codes::SYNTAX, msg).with_span(Some(span)));
    }

    /// Parse statements until the closing brace of `open` (or end of file at
    /// top level).
    fn block(&mut self, open: Option<&Token>) -> Vec<Stmt> {
        let mut stmts = Vec::new();
        loop {
            let Some(t) = self.peek().cloned() else {
                if let Some(open) = open {
                    self.error_at(open, "unclosed `{` (block never ends)");
                }
                return stmts;
            };
            match t.tok {
                Tok::Newline => {
                    self.pos += 1;
                }
                Tok::RBrace => {
                    if open.is_some() {
                        self.pos += 1;
                        return stmts;
                    }
                    self.error_at(&t, "unmatched `}`");
                    self.pos += 1;
                }
                _ => {
                    if let Some(s) = self.statement() {
                        stmts.push(s);
                    }
                }
            }
        }
    }

    fn statement(&mut self) -> Option<Stmt> {
        let first = self.peek().cloned()?;
        let mut tokens = Vec::new();
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Newline | Tok::RBrace | Tok::LBrace => break,
                _ => {
                    tokens.push(t.clone());
                    self.pos += 1;
                }
            }
        }
        let mut block = None;
        if let Some(open) = self.peek().filter(|t| t.tok == Tok::LBrace).cloned() {
            self.pos += 1;
            block = Some(self.block(Some(&open)));
            // Anything after the closing brace on the same line is stray.
            if let Some(t) = self.peek().cloned() {
                if !matches!(t.tok, Tok::Newline | Tok::RBrace) {
                    self.error_at(&t, format!("unexpected {} after `}}`", t.tok));
                    while !matches!(self.peek().map(|t| &t.tok), None | Some(Tok::Newline)) {
                        self.pos += 1;
                    }
                }
            }
        }
        if tokens.is_empty() {
            self.error_at(&first, "block without a statement head");
            return None;
        }
        Some(Stmt {
            line: first.line,
            column: first.column,
            tokens,
            block,
        })
    }
}

/// One segment of a dotted path.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub text: String,
    pub quoted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Real(f64),
    Path(Vec<Segment>),
    List(Vec<Value>),
}

impl Value {
    pub fn describe(&self) -> &'static str {
        match self {
            Value::Str(_) => "a string",
            Value::Int(_) => "an integer",
            Value::Real(_) => "a real",
            Value::Path(p) if p.len() == 1 && !p[0].quoted => "an identifier",
            Value::Path(_) => "a path",
            Value::List(_) => "a list",
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Value::Path(p) if p.len() == 1 && !p[0].quoted => Some(&p[0].text),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Path segments; a lone string is split on dots.
    pub fn as_path(&self) -> Option<Vec<String>> {
        match self {
            Value::Path(p) => Some(split_segments(p)),
            Value::Str(s) => Some(s.split('.').map(str::to_string).collect()),
            _ => None,
        }
    }
}

fn split_segments(p: &[Segment]) -> Vec<String> {
    p.iter()
        .flat_map(|s| {
            if s.quoted {
                s.text.split('.').map(str::to_string).collect::<Vec<_>>()
            } else {
                vec![s.text.clone()]
            }
        })
        .collect()
}

/// Reads the tokens of one statement.
pub struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    file: &'a str,
    stmt: &'a Stmt,
}

pub type PResult<T> = Result<T, Diagnostic>;

impl<'a> Cursor<'a> {
    pub fn new(stmt: &'a Stmt, file: &'a str) -> Self {
        Self {
            toks: &stmt.tokens,
            pos: 0,
            file,
            stmt,
        }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    /// Span of the next token, or of the last one when at the end.
    pub fn here(&self) -> SourceSpan {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => t.span(self.file),
            None => self.stmt.span(self.file),
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(codes::SYNTAX, msg).with_span(Some(self.here()))
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted} at end of statement")),
        }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn checked_name(&self, s: &str, span: SourceSpan) -> PResult<()> {
        if is_valid_name(s) {
            Ok(())
        } else {
            Err(Diagnostic::error(codes::INVALID_VALUE, format!("`{s}` is not a valid name"))
                .with_span(Some(span)))
        }
    }

    /// An identifier or a quoted name.
    pub fn name(&mut self) -> PResult<String> {
        let span = self.here();
        match self.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Str(s)) => {
                self.pos += 1;
                self.checked_name(s, span)?;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("a string")),
        }
    }

    fn segment(&mut self) -> PResult<Segment> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Segment {
                    text: s.clone(),
                    quoted: false,
                })
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Segment {
                    text: s.clone(),
                    quoted: true,
                })
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn raw_path(&mut self) -> PResult<Vec<Segment>> {
        let mut segs = vec![self.segment()?];
        while self.eat(&Tok::Dot) {
            segs.push(self.segment()?);
        }
        Ok(segs)
    }

    /// A dotted path of names; quoted segments may themselves contain dots.
    pub fn path(&mut self) -> PResult<Vec<String>> {
        let span = self.here();
        let segs = split_segments(&self.raw_path()?);
        for s in &segs {
            self.checked_name(s, span.clone())?;
        }
        Ok(segs)
    }

    pub fn value(&mut self) -> PResult<Value> {
        match self.peek() {
            Some(Tok::Int(i)) => {
                self.pos += 1;
                Ok(Value::Int(*i))
            }
            Some(Tok::Real(r)) => {
                self.pos += 1;
                Ok(Value::Real(*r))
            }
            Some(Tok::Str(s)) if self.peek_at(1) != Some(&Tok::Dot) => {
                self.pos += 1;
                Ok(Value::Str(s.clone()))
            }
            Some(Tok::Ident(_)) | Some(Tok::Str(_)) => Ok(Value::Path(self.raw_path()?)),
            Some(Tok::LBracket) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.value()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                Ok(Value::List(items))
            }
            _ => Err(self.unexpected("a value")),
        }
    }

    pub fn done(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error(format!("unexpected {t}"))),
        }
    }
}

/// `key = value` statement without a block.
pub fn key_value(stmt: &Stmt, file: &str) -> PResult<(String, Value)> {
    let mut c = Cursor::new(stmt, file);
    let key = c.ident()?;
    c.expect(Tok::Eq)?;
    let v = c.value()?;
    c.done()?;
    if stmt.block.is_some() {
        return Err(Diagnostic::error(codes::SYNTAX, format!("`{key}` does not take a block"))
            .with_span(Some(stmt.span(file))));
    }
    Ok((key, v))
}

/// Error for a statement that is not valid in the current block.
pub fn unexpected_statement(stmt: &Stmt, file: &str, context: &str) -> Diagnostic {
    let what = stmt
        .head()
        .map(|h| format!("`{h}`"))
        .unwrap_or_else(|| stmt.tokens[0].tok.to_string());
    Diagnostic::error(codes::SYNTAX, format!("unexpected {what} in {context}")).with_span(Some(stmt.span(file)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_blocks_and_one_line_blocks() {
        let t = parse_statements("a b {\n c\n d { e }\n}\nf\n", "x");
        assert!(t.diagnostics.is_empty());
        assert_eq!(t.stmts.len(), 2);
        let inner = t.stmts[0].block.as_ref().unwrap();
        assert_eq!(inner.len(), 2);
        assert_eq!(inner[1].block.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn unmatched_and_unclosed_braces() {
        let t = parse_statements("}\na {\n", "x");
        assert_eq!(t.diagnostics.len(), 2);
        assert_eq!(t.stmts.len(), 1);
    }

    #[test]
    fn paths_split_quoted_dots() {
        let t = parse_statements("x Func.\"A B\".c \"Func.Engage/Disengage X\"", "f");
        let mut c = Cursor::new(&t.stmts[0], "f");
        c.ident().unwrap();
        assert_eq!(c.path().unwrap(), vec!["Func", "A B", "c"]);
        assert_eq!(c.path().unwrap(), vec!["Func", "Engage/Disengage X"]);
        assert!(c.done().is_ok());
    }

    #[test]
    fn values() {
        let t = parse_statements("k = [\"a\", b, 3]", "f");
        let (k, v) = key_value(&t.stmts[0], "f").unwrap();
        assert_eq!(k, "k");
        match v {
            Value::List(items) => {
                assert_eq!(items[0].as_str(), Some("a"));
                assert_eq!(items[1].as_ident(), Some("b"));
                assert_eq!(items[2], Value::Int(3));
            }
            _ => panic!(),
        }
    }
}
