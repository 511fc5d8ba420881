//! Abstract syntax of the assignment calculus.
//!
//! Every [`Term`] carries a [`NodeId`] (the key of the static typing
//! function) and a [`SourceSpan`]. Structural equality ignores both, so a
//! term re-parsed from its pretty-printed form compares equal to the
//! original.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::typesys::Qualifier;

/// Byte range plus the 1-based line/column of its first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize, line: u32, column: u32) -> Self {
        debug_assert!(start <= end);
        SourceSpan {
            start,
            end,
            line,
            column,
        }
    }

    /// Smallest span covering `self` and `other`.
    pub fn to(self, other: SourceSpan) -> SourceSpan {
        if other.end <= self.start {
            return SourceSpan::new(other.start, self.end, other.line, other.column);
        }
        SourceSpan::new(self.start, self.end.max(other.end), self.line, self.column)
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// The three assignment operators `&-`, `:=` and `<-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AssignOp {
    Alias,
    Copy,
    Move,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Alias => "&-",
            AssignOp::Copy => ":=",
            AssignOp::Move => "<-",
        }
    }
}

impl fmt::Display for AssignOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Atomic literals: signed integers and booleans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Bool(bool),
}

impl Literal {
    /// Name of the atomic type the literal inhabits.
    pub fn type_name(self) -> &'static str {
        match self {
            Literal::Int(_) => "Int",
            Literal::Bool(_) => "Bool",
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(n) => write!(f, "{n}"),
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Identity of a term node; key of the typing function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    /// Used for terms manufactured by the evaluator (built-in bodies).
    pub const SYNTHETIC: NodeId = NodeId(u32::MAX);
}

/// An identifier occurrence. Equality compares names only.
#[derive(Debug, Clone, Eq)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: SourceSpan) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

/// One `name <op> value` entry of an argument list.
#[derive(Debug, Clone, PartialEq)]
pub struct Argument {
    pub name: Ident,
    pub op: AssignOp,
    pub value: Term,
}

#[derive(Debug, Clone)]
pub struct Term {
    pub id: NodeId,
    pub span: SourceSpan,
    pub kind: TermKind,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    Atom(Literal),
    Var(Ident),
    Field {
        target: Box<Term>,
        field: Ident,
    },
    New(TypeExpr),
    Let {
        name: Ident,
        ty: TypeExpr,
        body: Box<Term>,
    },
    Lambda {
        ty: TypeExpr,
        params: Vec<Ident>,
        body: Arc<Term>,
    },
    AssignVar {
        name: Ident,
        op: AssignOp,
        value: Box<Term>,
    },
    AssignField {
        target: Box<Term>,
        field: Ident,
        op: AssignOp,
        value: Box<Term>,
    },
    Call {
        callee: Box<Term>,
        args: Vec<Argument>,
    },
    Return {
        op: AssignOp,
        value: Box<Term>,
    },
    If {
        cond: Box<Term>,
        then_branch: Box<Term>,
        else_branch: Box<Term>,
    },
    Seq(Box<Term>, Box<Term>),
    /// `probe x`: evaluates like `x` and records the typestate of `x`.
    Probe(Ident),
}

impl Term {
    pub fn new(id: NodeId, span: SourceSpan, kind: TermKind) -> Self {
        Term { id, span, kind }
    }

    /// Calls every direct child term, in evaluation order.
    pub fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Term)) {
        match &self.kind {
            TermKind::Atom(_) | TermKind::Var(_) | TermKind::New(_) | TermKind::Probe(_) => {}
            TermKind::Field { target, .. } => f(target),
            TermKind::Let { body, .. } => f(body),
            TermKind::Lambda { body, .. } => f(body),
            TermKind::AssignVar { value, .. } => f(value),
            TermKind::AssignField { target, value, .. } => {
                f(value);
                f(target);
            }
            TermKind::Call { callee, args } => {
                f(callee);
                for arg in args {
                    f(&arg.value);
                }
            }
            TermKind::Return { value, .. } => f(value),
            TermKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                f(cond);
                f(then_branch);
                f(else_branch);
            }
            TermKind::Seq(first, second) => {
                f(first);
                f(second);
            }
        }
    }

    /// Pre-order traversal of the whole tree, lambda bodies included.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        self.for_each_child(|child| child.walk(f));
    }
}

/// A qualified type annotation.
///
/// Recursive binders and recursive variables carry an empty qualifier set:
/// their qualifiers are those of the binder's body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeExpr {
    pub quals: BTreeSet<Qualifier>,
    pub kind: TypeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeKind {
    Atomic(String),
    Function {
        params: Vec<(String, TypeExpr)>,
        codomain: Box<TypeExpr>,
    },
    Structure(Vec<(String, TypeExpr)>),
    Rec {
        var: String,
        body: Box<TypeExpr>,
    },
    Var(String),
}

impl TypeExpr {
    pub fn new(quals: impl IntoIterator<Item = Qualifier>, kind: TypeKind) -> Self {
        TypeExpr {
            quals: quals.into_iter().collect(),
            kind,
        }
    }

    pub fn atomic(quals: impl IntoIterator<Item = Qualifier>, name: &str) -> Self {
        TypeExpr::new(quals, TypeKind::Atomic(name.to_string()))
    }

    pub fn rec(var: &str, body: TypeExpr) -> Self {
        TypeExpr {
            quals: BTreeSet::new(),
            kind: TypeKind::Rec {
                var: var.to_string(),
                body: Box::new(body),
            },
        }
    }

    pub fn var(var: &str) -> Self {
        TypeExpr {
            quals: BTreeSet::new(),
            kind: TypeKind::Var(var.to_string()),
        }
    }

    /// Replaces the recursive binder at the root with one unrolling of its
    /// body. Other types are returned unchanged.
    pub fn unfold(&self) -> TypeExpr {
        let mut ty = self.clone();
        // Nested binders (`rec a . rec b . ...`) unroll until a concrete head.
        // Non-contractive types (`rec a . a`) are rejected by the type checker;
        // the bound only keeps this total.
        for _ in 0..64 {
            match &ty.kind {
                TypeKind::Rec { var, body } => ty = body.substitute(var, &ty),
                _ => break,
            }
        }
        ty
    }

    /// Capture-avoiding substitution of the recursive variable `var`.
    pub fn substitute(&self, var: &str, with: &TypeExpr) -> TypeExpr {
        let kind = match &self.kind {
            TypeKind::Var(v) if v == var => return with.clone(),
            TypeKind::Var(_) | TypeKind::Atomic(_) => return self.clone(),
            TypeKind::Rec { var: inner, .. } if inner == var => return self.clone(),
            TypeKind::Rec { var: inner, body } => TypeKind::Rec {
                var: inner.clone(),
                body: Box::new(body.substitute(var, with)),
            },
            TypeKind::Function { params, codomain } => TypeKind::Function {
                params: params
                    .iter()
                    .map(|(n, t)| (n.clone(), t.substitute(var, with)))
                    .collect(),
                codomain: Box::new(codomain.substitute(var, with)),
            },
            TypeKind::Structure(fields) => TypeKind::Structure(
                fields
                    .iter()
                    .map(|(n, t)| (n.clone(), t.substitute(var, with)))
                    .collect(),
            ),
        };
        TypeExpr {
            quals: self.quals.clone(),
            kind,
        }
    }

    /// Effective qualifiers, looking through recursive binders.
    pub fn qualifiers(&self) -> BTreeSet<Qualifier> {
        match &self.kind {
            TypeKind::Rec { body, .. } => body.qualifiers(),
            _ => self.quals.clone(),
        }
    }

    pub fn has_qualifier(&self, q: Qualifier) -> bool {
        self.qualifiers().contains(&q)
    }

    /// Parameter list of a function type (after unfolding).
    pub fn function_params(&self) -> Option<Vec<(String, TypeExpr)>> {
        match self.unfold().kind {
            TypeKind::Function { params, .. } => Some(params),
            _ => None,
        }
    }

    pub fn codomain(&self) -> Option<TypeExpr> {
        match self.unfold().kind {
            TypeKind::Function { codomain, .. } => Some(*codomain),
            _ => None,
        }
    }

    /// Field list of a structure type (after unfolding).
    pub fn structure_fields(&self) -> Option<Vec<(String, TypeExpr)>> {
        match self.unfold().kind {
            TypeKind::Structure(fields) => Some(fields),
            _ => None,
        }
    }

    pub fn field_type(&self, field: &str) -> Option<TypeExpr> {
        self.structure_fields()?
            .into_iter()
            .find(|(name, _)| name == field)
            .map(|(_, ty)| ty)
    }
}

/// Machine-generated identifiers contain `#`, which the lexer never accepts
/// in user identifiers.
pub fn is_machine_name(name: &str) -> bool {
    name.contains('#')
}

/// User-facing spelling of a possibly α-renamed identifier.
pub fn display_name(name: &str) -> &str {
    match name.find('#') {
        Some(idx) => &name[..idx],
        None => name,
    }
}
