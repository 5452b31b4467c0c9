use std::fmt;

use crate::diag::{codes, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Real(f64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Eq,
    Dot,
    Arrow,
    BiArrow,
    Newline,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Real(r) => write!(f, "`{r}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::BiArrow => f.write_str("`<->`"),
            Tok::Newline => f.write_str("end of line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
    pub len: u32,
}

impl Token {
    pub fn span(&self, file: &str) -> SourceSpan {
        SourceSpan::new(file, self.line, self.column, self.len.max(1))
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: &'a str,
    nesting: u32,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

/// Split source text into tokens. Newlines inside `(...)` and `[...]` are
/// dropped so lists and expressions may span lines.
pub fn lex(text: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lx = Lexer {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file,
        nesting: 0,
        tokens: Vec::new(),
        diags: Vec::new(),
    };
    lx.run();
    (lx.tokens, lx.diags)
}

impl Lexer<'_> {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, line: u32, column: u32, len: u32) {
        self.tokens.push(Token { tok, line, column, len });
    }

    fn error(&mut self, line: u32, column: u32, msg: String) {
        self.diags.push(
            Diagnostic::error(codes::LEX, msg).with_span(Some(SourceSpan::new(self.file, line, column, 1))),
        );
    }

    fn run(&mut self) {
        while let Some(c) = self.peek(0) {
            let (line, col) = (self.line, self.col);
            match c {
                ' ' | '\t' | '\r' | '\u{feff}' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    if self.nesting == 0 && !matches!(self.tokens.last(), Some(Token { tok: Tok::Newline, .. }) | None) {
                        self.push(Tok::Newline, line, col, 1);
                    }
                }
                '/' if self.peek(1) == Some('/') => {
                    while !matches!(self.peek(0), Some('\n') | None) {
                        self.bump();
                    }
                }
                '"' => self.string(line, col),
                '{' | '}' | '[' | ']' | '(' | ')' | ':' | ',' | '=' | '.' => {
                    self.bump();
                    let tok = match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        '[' => {
                            self.nesting += 1;
                            Tok::LBracket
                        }
                        ']' => {
                            self.nesting = self.nesting.saturating_sub(1);
                            Tok::RBracket
                        }
                        '(' => {
                            self.nesting += 1;
                            Tok::LParen
                        }
                        ')' => {
                            self.nesting = self.nesting.saturating_sub(1);
                            Tok::RParen
                        }
                        ':' => Tok::Colon,
                        ',' => Tok::Comma,
                        '=' => Tok::Eq,
                        _ => Tok::Dot,
                    };
                    self.push(tok, line, col, 1);
                }
                '-' if self.peek(1) == Some('>') => {
                    self.bump();
                    self.bump();
                    self.push(Tok::Arrow, line, col, 2);
                }
                '<' if self.peek(1) == Some('-') && self.peek(2) == Some('>') => {
                    self.bump();
                    self.bump();
                    self.bump();
                    self.push(Tok::BiArrow, line, col, 3);
                }
                '-' if self.peek(1).is_some_and(|d| d.is_ascii_digit()) => self.number(line, col),
                c if c.is_ascii_digit() => self.number(line, col),
                c if c.is_ascii_alphabetic() || c == '_' => self.ident(line, col),
                other => {
                    self.bump();
                    self.error(line, col, format!("unexpected character `{other}`"));
                }
            }
        }
    }

    fn ident(&mut self, line: u32, col: u32) {
        let mut s = String::new();
        while let Some(c) = self.peek(0) {
            let ok = c.is_ascii_alphanumeric() || c == '_' || (c == '-' && self.peek(1) != Some('>'));
            if !ok {
                break;
            }
            s.push(c);
            self.bump();
        }
        let len = s.chars().count() as u32;
        self.push(Tok::Ident(s), line, col, len);
    }

    fn number(&mut self, line: u32, col: u32) {
        let mut s = String::new();
        if self.peek(0) == Some('-') {
            s.push('-');
            self.bump();
        }
        let digits = |lx: &mut Self, s: &mut String| {
            while let Some(c) = lx.peek(0).filter(char::is_ascii_digit) {
                s.push(c);
                lx.bump();
            }
        };
        digits(self, &mut s);
        let mut real = false;
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            real = true;
            s.push('.');
            self.bump();
            digits(self, &mut s);
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let sign = matches!(self.peek(1), Some('+' | '-'));
            let d = if sign { self.peek(2) } else { self.peek(1) };
            if d.is_some_and(|c| c.is_ascii_digit()) {
                real = true;
                s.push('e');
                self.bump();
                if sign {
                    s.push(self.bump().unwrap());
                }
                digits(self, &mut s);
            }
        }
        let len = s.chars().count() as u32;
        let tok = if real {
            s.parse().map(Tok::Real).ok()
        } else {
            s.parse().map(Tok::Int).ok()
        };
        match tok {
            Some(t) => self.push(t, line, col, len),
            None => self.error(line, col, format!("number `{s}` is out of range")),
        }
    }

    fn string(&mut self, line: u32, col: u32) {
        self.bump();
        let start = self.pos;
        let mut s = String::new();
        loop {
            match self.peek(0) {
                None | Some('\n') => {
                    self.error(line, col, "unterminated string".into());
                    return;
                }
                Some('"') => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        // Other escapes are kept verbatim so regexes read naturally.
                        Some(other) => {
                            s.push('\\');
                            s.push(other);
                        }
                        None => {}
                    }
                }
                Some(c) => {
                    s.push(c);
                    self.bump();
                }
            }
        }
        let len = (self.pos - start + 1) as u32;
        self.push(Tok::Str(s), line, col, len);
    }
}
