use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::RefId;
use crate::syntax::{Literal, Term, TypeExpr};

/// Primitive operations bound in the prelude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Add,
    Sub,
    Mul,
    Eq,
    Gt,
    Not,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Add,
        Builtin::Sub,
        Builtin::Mul,
        Builtin::Eq,
        Builtin::Gt,
        Builtin::Not,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Mul => "*",
            Builtin::Eq => "==",
            Builtin::Gt => ">",
            Builtin::Not => "not",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionBody {
    Term(Arc<Term>),
    Builtin(Builtin),
}

/// A function value. No environment is captured.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionValue {
    pub ty: TypeExpr,
    pub params: Vec<String>,
    pub body: FunctionBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Undefined,
    Atom(Literal),
    /// Records keep their closed structure type so copies can initialize
    /// field capabilities.
    Record {
        ty: TypeExpr,
        fields: BTreeMap<String, RefId>,
    },
    Function(FunctionValue),
}

impl Value {
    pub fn record_fields(&self) -> Option<&BTreeMap<String, RefId>> {
        match self {
            Value::Record { fields, .. } => Some(fields),
            _ => None,
        }
    }
}

/// Shallow rendering used by the context dump.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undefined => f.write_str("undefined"),
            Value::Atom(lit) => write!(f, "{lit}"),
            Value::Record { fields, .. } => {
                f.write_str("{")?;
                for (i, (name, r)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {r}")?;
                }
                f.write_str("}")
            }
            Value::Function(fun) => match fun.body {
                FunctionBody::Term(_) => f.write_str("<fun>"),
                FunctionBody::Builtin(b) => write!(f, "<builtin {}>", b.name()),
            },
        }
    }
}
