//! Qualifiers, capability sets and the static typing function.

mod env;

pub use env::{build_type_env, check_arity_and_names, TypeEnv};

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::context::RefId;
use crate::syntax::{SourceSpan, TypeExpr, TypeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qualifier {
    Brw,
    Own,
    Cst,
    Mut,
}

impl Qualifier {
    pub fn is_reference(self) -> bool {
        matches!(self, Qualifier::Brw | Qualifier::Own)
    }

    pub fn is_mutability(self) -> bool {
        !self.is_reference()
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Qualifier::Brw => "@brw",
            Qualifier::Own => "@own",
            Qualifier::Cst => "@cst",
            Qualifier::Mut => "@mut",
        })
    }
}

/// Exactly one reference qualifier and exactly one mutability qualifier.
pub fn well_formed(quals: &BTreeSet<Qualifier>) -> bool {
    quals.iter().filter(|q| q.is_reference()).count() == 1
        && quals.iter().filter(|q| q.is_mutability()).count() == 1
}

/// A subset of `{ro, rw} ∪ {b[r] | r ∈ R}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CapabilitySet {
    pub ro: bool,
    pub rw: bool,
    pub borrows: BTreeSet<RefId>,
}

impl CapabilitySet {
    pub fn empty() -> Self {
        CapabilitySet::default()
    }

    pub fn read_only() -> Self {
        CapabilitySet {
            ro: true,
            ..Default::default()
        }
    }

    pub fn read_write() -> Self {
        CapabilitySet {
            ro: true,
            rw: true,
            ..Default::default()
        }
    }

    pub fn with_borrow(mut self, owner: RefId) -> Self {
        self.borrows.insert(owner);
        self
    }

    pub fn is_empty(&self) -> bool {
        !self.ro && !self.rw && self.borrows.is_empty()
    }

    pub fn borrows(&self, owner: RefId) -> bool {
        self.borrows.contains(&owner)
    }
}

impl fmt::Display for CapabilitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.ro {
            parts.push("ro".to_string());
        }
        if self.rw {
            parts.push("rw".to_string());
        }
        for owner in &self.borrows {
            parts.push(format!("b[{owner}]"));
        }
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `ic`: read-write and read-only for `@mut` types, read-only otherwise.
pub fn initial_capabilities(ty: &TypeExpr) -> CapabilitySet {
    if ty.has_qualifier(Qualifier::Mut) {
        CapabilitySet::read_write()
    } else {
        CapabilitySet::read_only()
    }
}

/// Type of an atom literal with no other context.
pub fn literal_type(name: &str) -> TypeExpr {
    TypeExpr::atomic([Qualifier::Own, Qualifier::Mut], name)
}

/// Equi-recursive structural equality. Parameter and field lists compare
/// as maps.
pub fn types_equal(a: &TypeExpr, b: &TypeExpr) -> bool {
    equal_in(a, b, &mut HashSet::new())
}

fn equal_in(a: &TypeExpr, b: &TypeExpr, assumed: &mut HashSet<(TypeExpr, TypeExpr)>) -> bool {
    let a_rec = matches!(a.kind, TypeKind::Rec { .. });
    let b_rec = matches!(b.kind, TypeKind::Rec { .. });
    if a_rec || b_rec {
        if !assumed.insert((a.clone(), b.clone())) {
            return true;
        }
        return equal_in(&a.unfold(), &b.unfold(), assumed);
    }
    if a.quals != b.quals {
        return false;
    }
    match (&a.kind, &b.kind) {
        (TypeKind::Atomic(x), TypeKind::Atomic(y)) => x == y,
        (TypeKind::Var(x), TypeKind::Var(y)) => x == y,
        (
            TypeKind::Function {
                params: pa,
                codomain: ca,
            },
            TypeKind::Function {
                params: pb,
                codomain: cb,
            },
        ) => maps_equal(pa, pb, assumed) && equal_in(ca, cb, assumed),
        (TypeKind::Structure(fa), TypeKind::Structure(fb)) => maps_equal(fa, fb, assumed),
        _ => false,
    }
}

fn maps_equal(
    a: &[(String, TypeExpr)],
    b: &[(String, TypeExpr)],
    assumed: &mut HashSet<(TypeExpr, TypeExpr)>,
) -> bool {
    a.len() == b.len()
        && a.iter().all(|(name, ta)| {
            b.iter()
                .find(|(other, _)| other == name)
                .is_some_and(|(_, tb)| equal_in(ta, tb, assumed))
        })
}

/// Static rejections found while building or checking the typing function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("`{name}` is not declared")]
    UnknownVariable { span: SourceSpan, name: String },
    #[error("`{name}` is declared outside the function; functions do not capture variables")]
    FreeVariable { span: SourceSpan, name: String },
    #[error("type `{ty}` has no field `{field}`")]
    UnknownField {
        span: SourceSpan,
        field: String,
        ty: String,
    },
    #[error("type `{ty}` is not a function type")]
    NotAFunctionType { span: SourceSpan, ty: String },
    #[error("type `{ty}` is not a structure type")]
    NotAStructure { span: SourceSpan, ty: String },
    #[error("type `{ty}` needs exactly one of @own/@brw and exactly one of @cst/@mut")]
    MalformedQualifiers { span: SourceSpan, ty: String },
    #[error("unknown type `{name}`")]
    UnknownTypeName { span: SourceSpan, name: String },
    #[error("recursive type `rec {var}` does not unfold to a concrete type")]
    NonContractive { span: SourceSpan, var: String },
    #[error("missing argument for parameter `{name}`")]
    MissingArgument { span: SourceSpan, name: String },
    #[error("the callee has no parameter named `{name}`")]
    UnknownParameterName { span: SourceSpan, name: String },
}

impl TypeError {
    pub fn span(&self) -> SourceSpan {
        match self {
            TypeError::UnknownVariable { span, .. }
            | TypeError::FreeVariable { span, .. }
            | TypeError::UnknownField { span, .. }
            | TypeError::NotAFunctionType { span, .. }
            | TypeError::NotAStructure { span, .. }
            | TypeError::MalformedQualifiers { span, .. }
            | TypeError::UnknownTypeName { span, .. }
            | TypeError::NonContractive { span, .. }
            | TypeError::MissingArgument { span, .. }
            | TypeError::UnknownParameterName { span, .. } => *span,
        }
    }
}
