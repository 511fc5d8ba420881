use thiserror::Error;

use crate::context::ReferenceState;
use crate::syntax::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuntimeErrorKind {
    NotReadable,
    NotWriteable,
    NotUnique,
    AliasTargetShared,
    AliasMutabilityMismatch,
    ImmutableMutation,
    UndefinedVariable,
    UnknownField,
    CalleeNotFunction,
    ConditionNotBoolean,
    CopyOfUndefined,
    MissingReturn,
    BuiltinOperandMismatch,
}

impl RuntimeErrorKind {
    pub const ALL: [RuntimeErrorKind; 13] = [
        RuntimeErrorKind::NotReadable,
        RuntimeErrorKind::NotWriteable,
        RuntimeErrorKind::NotUnique,
        RuntimeErrorKind::AliasTargetShared,
        RuntimeErrorKind::AliasMutabilityMismatch,
        RuntimeErrorKind::ImmutableMutation,
        RuntimeErrorKind::UndefinedVariable,
        RuntimeErrorKind::UnknownField,
        RuntimeErrorKind::CalleeNotFunction,
        RuntimeErrorKind::ConditionNotBoolean,
        RuntimeErrorKind::CopyOfUndefined,
        RuntimeErrorKind::MissingReturn,
        RuntimeErrorKind::BuiltinOperandMismatch,
    ];
}

/// A failed rule premise. `subject` is the user-facing spelling of the
/// offending term; `state` is its typestate when the failure happened.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind:?} on `{subject}` at {span}")]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub span: SourceSpan,
    pub subject: String,
    pub state: Option<ReferenceState>,
    /// Extra detail: the missing field, the built-in name.
    pub detail: Option<String>,
}

impl RuntimeError {
    pub fn new(kind: RuntimeErrorKind, span: SourceSpan, subject: impl Into<String>) -> Self {
        RuntimeError {
            kind,
            span,
            subject: subject.into(),
            state: None,
            detail: None,
        }
    }

    pub fn with_state(mut self, state: ReferenceState) -> Self {
        self.state = Some(state);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}
