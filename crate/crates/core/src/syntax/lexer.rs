//! Tokenizer.
//!
//! Newlines are significant only as sequence separators: they are emitted
//! when the innermost open bracket is a `{` (or at top level) and are
//! collapsed, so `f(a,\n b)` and `(x\n + y)` lex as if written on one line.

use std::fmt;

use super::ast::SourceSpan;
use super::SyntaxError;
use crate::typesys::Qualifier;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Magnitude of an integer literal; the sign is a separate `Minus`.
    Int(u64),
    True,
    False,
    Let,
    Fun,
    New,
    Return,
    If,
    Else,
    Rec,
    Probe,
    Qual(Qualifier),
    OpAlias,
    OpCopy,
    OpMove,
    Arrow,
    Plus,
    Minus,
    Star,
    EqEq,
    Gt,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Dot,
    Newline,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            TokenKind::Ident(name) => return write!(f, "identifier `{name}`"),
            TokenKind::Int(n) => return write!(f, "integer `{n}`"),
            TokenKind::Qual(q) => return write!(f, "`{q}`"),
            TokenKind::True => "`true`",
            TokenKind::False => "`false`",
            TokenKind::Let => "`let`",
            TokenKind::Fun => "`fun`",
            TokenKind::New => "`new`",
            TokenKind::Return => "`return`",
            TokenKind::If => "`if`",
            TokenKind::Else => "`else`",
            TokenKind::Rec => "`rec`",
            TokenKind::Probe => "`probe`",
            TokenKind::OpAlias => "`&-`",
            TokenKind::OpCopy => "`:=`",
            TokenKind::OpMove => "`<-`",
            TokenKind::Arrow => "`->`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::EqEq => "`==`",
            TokenKind::Gt => "`>`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::Comma => "`,`",
            TokenKind::Colon => "`:`",
            TokenKind::Semi => "`;`",
            TokenKind::Dot => "`.`",
            TokenKind::Newline => "newline",
            TokenKind::Eof => "end of input",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
    brackets: Vec<char>,
    tokens: Vec<Token>,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lexer = Lexer {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
        brackets: Vec::new(),
        tokens: Vec::new(),
    };
    lexer.run()?;
    Ok(lexer.tokens)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut chars = self.src[self.pos..].chars();
        chars.next();
        chars.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32, column: u32) {
        let span = SourceSpan::new(start, self.pos, line, column);
        self.tokens.push(Token { kind, span });
    }

    fn newlines_significant(&self) -> bool {
        matches!(self.brackets.last(), None | Some('{'))
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        while let Some(c) = self.peek() {
            let (start, line, column) = (self.pos, self.line, self.column);
            match c {
                '\n' => {
                    self.bump();
                    let previous_is_separator = matches!(
                        self.tokens.last().map(|t| &t.kind),
                        None | Some(TokenKind::Newline)
                    );
                    if self.newlines_significant() && !previous_is_separator {
                        self.push(TokenKind::Newline, start, line, column);
                    }
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '/' if self.peek_second() == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                c if c.is_ascii_digit() => self.number(start, line, column)?,
                c if c.is_ascii_alphabetic() || c == '_' => self.word(start, line, column),
                '@' => self.qualifier(start, line, column)?,
                _ => self.punct(c, start, line, column)?,
            }
        }
        let (pos, line, column) = (self.pos, self.line, self.column);
        self.push(TokenKind::Eof, pos, line, column);
        Ok(())
    }

    fn number(&mut self, start: usize, line: u32, column: u32) -> Result<(), SyntaxError> {
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let text = &self.src[start..self.pos];
        let value = text.parse::<u64>().map_err(|_| SyntaxError::Parse {
            span: SourceSpan::new(start, self.pos, line, column),
            expected: vec!["integer literal within 64 bits".into()],
            found: format!("`{text}`"),
        })?;
        self.push(TokenKind::Int(value), start, line, column);
        Ok(())
    }

    fn word(&mut self, start: usize, line: u32, column: u32) {
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.bump();
        }
        let kind = match &self.src[start..self.pos] {
            "let" => TokenKind::Let,
            "fun" => TokenKind::Fun,
            "new" => TokenKind::New,
            "return" => TokenKind::Return,
            "if" => TokenKind::If,
            "else" => TokenKind::Else,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            "rec" => TokenKind::Rec,
            "probe" => TokenKind::Probe,
            other => TokenKind::Ident(other.to_string()),
        };
        self.push(kind, start, line, column);
    }

    fn qualifier(&mut self, start: usize, line: u32, column: u32) -> Result<(), SyntaxError> {
        self.bump();
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.bump();
        }
        let q = match &self.src[start..self.pos] {
            "@cst" => Qualifier::Cst,
            "@mut" => Qualifier::Mut,
            "@own" => Qualifier::Own,
            "@brw" => Qualifier::Brw,
            other => {
                return Err(SyntaxError::Parse {
                    span: SourceSpan::new(start, self.pos, line, column),
                    expected: vec!["`@cst`, `@mut`, `@own` or `@brw`".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        self.push(TokenKind::Qual(q), start, line, column);
        Ok(())
    }

    fn punct(&mut self, c: char, start: usize, line: u32, column: u32) -> Result<(), SyntaxError> {
        let next = self.peek_second();
        let (kind, width) = match (c, next) {
            ('&', Some('-')) => (TokenKind::OpAlias, 2),
            (':', Some('=')) => (TokenKind::OpCopy, 2),
            ('<', Some('-')) => (TokenKind::OpMove, 2),
            ('-', Some('>')) => (TokenKind::Arrow, 2),
            ('=', Some('=')) => (TokenKind::EqEq, 2),
            (':', _) => (TokenKind::Colon, 1),
            ('+', _) => (TokenKind::Plus, 1),
            ('-', _) => (TokenKind::Minus, 1),
            ('*', _) => (TokenKind::Star, 1),
            ('>', _) => (TokenKind::Gt, 1),
            ('(', _) => (TokenKind::LParen, 1),
            (')', _) => (TokenKind::RParen, 1),
            ('{', _) => (TokenKind::LBrace, 1),
            ('}', _) => (TokenKind::RBrace, 1),
            (',', _) => (TokenKind::Comma, 1),
            (';', _) => (TokenKind::Semi, 1),
            ('.', _) => (TokenKind::Dot, 1),
            _ => {
                self.bump();
                return Err(SyntaxError::Lex {
                    span: SourceSpan::new(start, self.pos, line, column),
                    found: c,
                });
            }
        };
        for _ in 0..width {
            self.bump();
        }
        match kind {
            TokenKind::LParen => self.brackets.push('('),
            TokenKind::LBrace => self.brackets.push('{'),
            TokenKind::RParen | TokenKind::RBrace => {
                self.brackets.pop();
            }
            _ => {}
        }
        self.push(kind, start, line, column);
        Ok(())
    }
}
