//! Coded, span-carrying reports for static rejections and failed rule
//! premises, in a human and a machine-readable rendering.

use std::fmt;

use crate::context::ReferenceState;
use crate::eval::{RuntimeError, RuntimeErrorKind};
use crate::syntax::{SourceSpan, SyntaxError};
use crate::typesys::TypeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Severity {
    Static,
    Runtime,
}

impl Severity {
    pub fn name(self) -> &'static str {
        match self {
            Severity::Static => "static",
            Severity::Runtime => "runtime",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub message: String,
    /// `None` for problems that have no source position (unreadable file).
    pub span: Option<SourceSpan>,
    pub state: Option<ReferenceState>,
    /// The term the state belongs to.
    pub subject: Option<String>,
}

/// Every code a diagnostic can carry.
pub const CODES: &[&str] = &[
    "E-NOT-READABLE",
    "E-NOT-WRITEABLE",
    "E-NOT-UNIQUE",
    "E-ALIAS-SHARED",
    "E-ALIAS-MUTABILITY",
    "E-IMMUTABLE-MUTATION",
    "E-UNDEFINED-VARIABLE",
    "E-UNKNOWN-FIELD",
    "E-CALLEE-NOT-FUNCTION",
    "E-CONDITION-NOT-BOOLEAN",
    "E-COPY-UNDEFINED",
    "E-MISSING-RETURN",
    "E-BUILTIN-OPERANDS",
    "S-LEX",
    "S-PARSE",
    "S-DUPLICATE-PARAMETER",
    "S-DUPLICATE-ARGUMENT",
    "S-DUPLICATE-FIELD",
    "S-SHADOWING",
    "S-UNKNOWN-VARIABLE",
    "S-FREE-VARIABLE",
    "S-UNKNOWN-FIELD",
    "S-NOT-A-FUNCTION",
    "S-NOT-A-STRUCTURE",
    "S-MALFORMED-QUALIFIERS",
    "S-UNKNOWN-TYPE",
    "S-NON-CONTRACTIVE",
    "S-MISSING-ARGUMENT",
    "S-UNKNOWN-PARAMETER",
    "S-IO",
];

pub fn runtime_code(kind: RuntimeErrorKind) -> &'static str {
    use RuntimeErrorKind::*;
    match kind {
        NotReadable => "E-NOT-READABLE",
        NotWriteable => "E-NOT-WRITEABLE",
        NotUnique => "E-NOT-UNIQUE",
        AliasTargetShared => "E-ALIAS-SHARED",
        AliasMutabilityMismatch => "E-ALIAS-MUTABILITY",
        ImmutableMutation => "E-IMMUTABLE-MUTATION",
        UndefinedVariable => "E-UNDEFINED-VARIABLE",
        UnknownField => "E-UNKNOWN-FIELD",
        CalleeNotFunction => "E-CALLEE-NOT-FUNCTION",
        ConditionNotBoolean => "E-CONDITION-NOT-BOOLEAN",
        CopyOfUndefined => "E-COPY-UNDEFINED",
        MissingReturn => "E-MISSING-RETURN",
        BuiltinOperandMismatch => "E-BUILTIN-OPERANDS",
    }
}

fn runtime_message(err: &RuntimeError) -> String {
    use RuntimeErrorKind::*;
    let s = &err.subject;
    let detail = err.detail.as_deref().unwrap_or("?");
    match err.kind {
        NotReadable => format!("`{s}` is not readable"),
        NotWriteable => format!("`{s}` is not writeable"),
        NotUnique => format!("`{s}` is not unique"),
        AliasTargetShared => format!("`{s}` is shared and cannot be re-aliased"),
        AliasMutabilityMismatch => {
            format!("`{s}` is already aliased with a different mutability")
        }
        ImmutableMutation => format!("`{s}` is not mutating"),
        UndefinedVariable => format!("`{s}` is not bound"),
        UnknownField => format!("`{s}` has no field `{detail}`"),
        CalleeNotFunction => format!("`{s}` is not a function"),
        ConditionNotBoolean => format!("condition `{s}` is not a boolean"),
        CopyOfUndefined => format!("`{s}` cannot be copied: part of it is undefined"),
        MissingReturn => "`return` is used outside of a function".to_string(),
        BuiltinOperandMismatch => format!("`{detail}` cannot be applied to `{s}`"),
    }
}

impl From<&RuntimeError> for Diagnostic {
    fn from(err: &RuntimeError) -> Self {
        Diagnostic {
            code: runtime_code(err.kind),
            severity: Severity::Runtime,
            message: runtime_message(err),
            span: Some(err.span),
            state: err.state,
            subject: Some(err.subject.clone()),
        }
    }
}

impl From<&SyntaxError> for Diagnostic {
    fn from(err: &SyntaxError) -> Self {
        let code = match err {
            SyntaxError::Lex { .. } => "S-LEX",
            SyntaxError::Parse { .. } => "S-PARSE",
            SyntaxError::DuplicateParameter { .. } => "S-DUPLICATE-PARAMETER",
            SyntaxError::DuplicateArgumentName { .. } => "S-DUPLICATE-ARGUMENT",
            SyntaxError::DuplicateField { .. } => "S-DUPLICATE-FIELD",
            SyntaxError::ShadowingDeclaration { .. } => "S-SHADOWING",
        };
        Diagnostic::static_error(code, err.to_string(), Some(err.span()))
    }
}

impl From<&TypeError> for Diagnostic {
    fn from(err: &TypeError) -> Self {
        let code = match err {
            TypeError::UnknownVariable { .. } => "S-UNKNOWN-VARIABLE",
            TypeError::FreeVariable { .. } => "S-FREE-VARIABLE",
            TypeError::UnknownField { .. } => "S-UNKNOWN-FIELD",
            TypeError::NotAFunctionType { .. } => "S-NOT-A-FUNCTION",
            TypeError::NotAStructure { .. } => "S-NOT-A-STRUCTURE",
            TypeError::MalformedQualifiers { .. } => "S-MALFORMED-QUALIFIERS",
            TypeError::UnknownTypeName { .. } => "S-UNKNOWN-TYPE",
            TypeError::NonContractive { .. } => "S-NON-CONTRACTIVE",
            TypeError::MissingArgument { .. } => "S-MISSING-ARGUMENT",
            TypeError::UnknownParameterName { .. } => "S-UNKNOWN-PARAMETER",
        };
        Diagnostic::static_error(code, err.to_string(), Some(err.span()))
    }
}

impl Diagnostic {
    pub fn static_error(code: &'static str, message: String, span: Option<SourceSpan>) -> Self {
        Diagnostic {
            code,
            severity: Severity::Static,
            message,
            span,
            state: None,
            subject: None,
        }
    }

    pub fn io(path: &str, err: &std::io::Error) -> Self {
        Diagnostic::static_error("S-IO", format!("cannot read `{path}`: {err}"), None)
    }

    /// `code=... severity=... line=... column=... state=...`, one record.
    pub fn machine(&self) -> String {
        let (line, column) = self.span.map_or((0, 0), |s| (s.line, s.column));
        let state = self.state.map_or("-", ReferenceState::name);
        format!(
            "code={} severity={} line={line} column={column} state={state}",
            self.code, self.severity
        )
    }
}

/// Summary line, location, the offending source line with a caret
/// underline, then the code and state.
pub fn render(d: &Diagnostic, source: &str) -> String {
    let mut out = format!("{} error: {}\n", d.severity, d.message);
    if let Some(span) = d.span {
        let number = span.line.to_string();
        let pad = " ".repeat(number.len());
        out.push_str(&format!("{pad}--> {span}\n"));
        if let Some(text) = source.lines().nth(span.line.saturating_sub(1) as usize) {
            let col = span.column.saturating_sub(1) as usize;
            let lead: String = text
                .chars()
                .take(col)
                .map(|c| if c == '\t' { '\t' } else { ' ' })
                .collect();
            let rest = text.chars().count().saturating_sub(col).max(1);
            let width = span.end.saturating_sub(span.start).clamp(1, rest);
            out.push_str(&format!("{pad} |\n{number} | {text}\n"));
            out.push_str(&format!("{pad} | {lead}{}\n", "^".repeat(width)));
        }
    }
    out.push_str(&format!("  = code: {}\n", d.code));
    if let (Some(state), Some(subject)) = (d.state, &d.subject) {
        out.push_str(&format!("  = state: `{subject}` is {state}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn runtime(kind: RuntimeErrorKind) -> RuntimeError {
        RuntimeError::new(kind, SourceSpan::new(27, 34, 1, 28), "a")
            .with_state(ReferenceState::Unique)
    }

    #[test]
    fn codes_are_unique_and_cover_every_runtime_kind() {
        let mut seen = std::collections::HashSet::new();
        assert!(CODES.iter().all(|c| seen.insert(*c)));
        let runtime: std::collections::HashSet<_> = RuntimeErrorKind::ALL
            .iter()
            .map(|k| runtime_code(*k))
            .collect();
        assert_eq!(runtime.len(), RuntimeErrorKind::ALL.len());
        assert!(runtime.iter().all(|c| CODES.contains(c)));
        let runtime_codes = CODES.iter().filter(|c| c.starts_with("E-")).count();
        assert_eq!(runtime_codes, RuntimeErrorKind::ALL.len());
    }

    #[test]
    fn not_mutating_rendering() {
        let src = "let a: @cst Int { a <- 42; a := 10 }";
        let d = Diagnostic::from(&runtime(RuntimeErrorKind::ImmutableMutation));
        assert_eq!(
            render(&d, src),
            "runtime error: `a` is not mutating\n \
             --> 1:28\n  |\n1 | let a: @cst Int { a <- 42; a := 10 }\n  |                            ^^^^^^^\n  \
             = code: E-IMMUTABLE-MUTATION\n  = state: `a` is unique\n"
        );
    }

    #[test]
    fn not_unique_mentions_state() {
        let err = RuntimeError::new(
            RuntimeErrorKind::NotUnique,
            SourceSpan::new(0, 1, 1, 1),
            "s",
        )
        .with_state(ReferenceState::Shared);
        let d = Diagnostic::from(&err);
        assert!(render(&d, "s").contains("`s` is shared"));
        assert_eq!(
            d.machine(),
            "code=E-NOT-UNIQUE severity=runtime line=1 column=1 state=shared"
        );
    }

    #[test]
    fn rendering_is_total() {
        for kind in RuntimeErrorKind::ALL {
            let d = Diagnostic::from(&runtime(kind).with_detail("x"));
            let text = render(&d, "");
            assert!(text.starts_with("runtime error: "));
            assert!(text.contains(d.code));
        }
    }

    #[test]
    fn static_diagnostics() {
        let err = parse("let a: Int { let a: Int { 1 } }").unwrap_err();
        let d = Diagnostic::from(&err);
        assert_eq!(d.code, "S-SHADOWING");
        assert_eq!(d.severity, Severity::Static);
        let d = Diagnostic::from(&TypeError::UnknownParameterName {
            span: SourceSpan::new(0, 1, 1, 1),
            name: "q".into(),
        });
        assert_eq!(d.severity, Severity::Static);
        assert_eq!(
            d.machine(),
            "code=S-UNKNOWN-PARAMETER severity=static line=1 column=1 state=-"
        );
        let io = Diagnostic::io("x.azc", &std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(
            render(&io, ""),
            format!("static error: {}\n  = code: S-IO\n", io.message)
        );
    }

    #[test]
    fn caret_is_clamped_to_the_line() {
        let d = Diagnostic::static_error("S-PARSE", "x".into(), Some(SourceSpan::new(2, 40, 1, 3)));
        assert!(render(&d, "ab\ncd").contains("1 | ab\n  |   ^\n"));
    }
}
