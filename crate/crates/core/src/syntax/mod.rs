//! Concrete syntax: tokens, terms, parsing and pretty-printing.

pub mod ast;
pub mod format;
pub mod lexer;
pub mod parser;

pub use ast::*;
pub use format::{format_term, format_type};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_program, parse_with_scope, PRELUDE_NAMES};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("unrecognized character `{found}`")]
    Lex { span: SourceSpan, found: char },
    #[error("expected {}, found {found}", expected.join(" or "))]
    Parse {
        span: SourceSpan,
        expected: Vec<String>,
        found: String,
    },
    #[error("parameter `{name}` is declared twice")]
    DuplicateParameter { span: SourceSpan, name: String },
    #[error("argument `{name}` is given twice")]
    DuplicateArgumentName { span: SourceSpan, name: String },
    #[error("field `{name}` is declared twice")]
    DuplicateField { span: SourceSpan, name: String },
    #[error("`{name}` is already declared in this scope")]
    ShadowingDeclaration { span: SourceSpan, name: String },
}

impl SyntaxError {
    pub fn span(&self) -> SourceSpan {
        match self {
            SyntaxError::Lex { span, .. }
            | SyntaxError::Parse { span, .. }
            | SyntaxError::DuplicateParameter { span, .. }
            | SyntaxError::DuplicateArgumentName { span, .. }
            | SyntaxError::DuplicateField { span, .. }
            | SyntaxError::ShadowingDeclaration { span, .. } => *span,
        }
    }
}

/// Tokenizes and parses a whole program.
pub fn parse(source: &str) -> Result<Term, SyntaxError> {
    parse_program(&tokenize(source)?)
}
