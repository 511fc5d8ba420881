use std::collections::BTreeMap;

use super::{literal_type, well_formed, Qualifier, TypeError};
use crate::syntax::{format_type, SourceSpan, Term, TermKind, TypeExpr, TypeKind};

/// Flow-insensitive typing function: node identity to type.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeEnv {
    node_types: BTreeMap<crate::syntax::NodeId, TypeExpr>,
}

impl TypeEnv {
    pub fn node_type(&self, id: crate::syntax::NodeId) -> Option<&TypeExpr> {
        self.node_types.get(&id)
    }

    pub fn len(&self) -> usize {
        self.node_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_types.is_empty()
    }

    /// Type of a prelude built-in, if `name` is one.
    pub fn prelude_type(name: &str) -> Option<TypeExpr> {
        let int = || TypeExpr::atomic([Qualifier::Own, Qualifier::Cst], "Int");
        let bool_ = || TypeExpr::atomic([Qualifier::Own, Qualifier::Cst], "Bool");
        let result = |name: &str| TypeExpr::atomic([Qualifier::Own, Qualifier::Mut], name);
        let (params, codomain) = match name {
            "+" | "-" | "*" => (
                vec![("lhs".to_string(), int()), ("rhs".to_string(), int())],
                result("Int"),
            ),
            "==" | ">" => (
                vec![("lhs".to_string(), int()), ("rhs".to_string(), int())],
                result("Bool"),
            ),
            "not" => (vec![("value".to_string(), bool_())], result("Bool")),
            _ => return None,
        };
        Some(TypeExpr::new(
            [Qualifier::Own, Qualifier::Cst],
            TypeKind::Function {
                params,
                codomain: Box::new(codomain),
            },
        ))
    }
}

struct Frame {
    lambda_boundary: bool,
    codomain: Option<TypeExpr>,
    names: Vec<(String, TypeExpr)>,
}

struct Builder {
    node_types: BTreeMap<crate::syntax::NodeId, TypeExpr>,
    frames: Vec<Frame>,
}

/// Propagates annotations through the program. Also rejects references to
/// undeclared names, names captured from outside a function body, unknown
/// fields, calls on non-function types and ill-formed annotations.
pub fn build_type_env(program: &Term) -> Result<TypeEnv, TypeError> {
    let mut builder = Builder {
        node_types: BTreeMap::new(),
        frames: vec![Frame {
            lambda_boundary: false,
            codomain: None,
            names: Vec::new(),
        }],
    };
    builder.visit(program)?;
    Ok(TypeEnv {
        node_types: builder.node_types,
    })
}

impl Builder {
    fn lookup(&self, name: &str, span: SourceSpan) -> Result<TypeExpr, TypeError> {
        let mut crossed = false;
        for frame in self.frames.iter().rev() {
            if let Some((_, ty)) = frame.names.iter().rev().find(|(n, _)| n == name) {
                if crossed {
                    return Err(TypeError::FreeVariable {
                        span,
                        name: name.to_string(),
                    });
                }
                return Ok(ty.clone());
            }
            crossed |= frame.lambda_boundary;
        }
        TypeEnv::prelude_type(name).ok_or_else(|| TypeError::UnknownVariable {
            span,
            name: name.to_string(),
        })
    }

    fn codomain(&self) -> Option<TypeExpr> {
        self.frames
            .iter()
            .rev()
            .find(|f| f.lambda_boundary)
            .and_then(|f| f.codomain.clone())
    }

    fn field_of(
        &self,
        target: &TypeExpr,
        field: &str,
        span: SourceSpan,
    ) -> Result<TypeExpr, TypeError> {
        let fields = target
            .structure_fields()
            .ok_or_else(|| TypeError::NotAStructure {
                span,
                ty: format_type(target),
            })?;
        fields
            .into_iter()
            .find(|(name, _)| name == field)
            .map(|(_, ty)| ty)
            .ok_or_else(|| TypeError::UnknownField {
                span,
                field: field.to_string(),
                ty: format_type(target),
            })
    }

    fn visit(&mut self, term: &Term) -> Result<Option<TypeExpr>, TypeError> {
        let ty = match &term.kind {
            TermKind::Atom(lit) => Some(literal_type(lit.type_name())),
            TermKind::Var(id) => Some(self.lookup(&id.name, id.span)?),
            TermKind::Probe(id) => Some(self.lookup(&id.name, id.span)?),
            TermKind::Field { target, field } => match self.visit(target)? {
                Some(target_ty) => Some(self.field_of(&target_ty, &field.name, field.span)?),
                None => None,
            },
            TermKind::New(ty) => {
                check_annotation(ty, term.span)?;
                if ty.structure_fields().is_none() {
                    return Err(TypeError::NotAStructure {
                        span: term.span,
                        ty: format_type(ty),
                    });
                }
                Some(ty.clone())
            }
            TermKind::Let { name, ty, body } => {
                check_annotation(ty, name.span)?;
                self.frames
                    .last_mut()
                    .expect("root frame")
                    .names
                    .push((name.name.clone(), ty.clone()));
                let body_ty = self.visit(body);
                self.frames.last_mut().expect("root frame").names.pop();
                body_ty?
            }
            TermKind::Lambda { ty, body, .. } => {
                check_annotation(ty, term.span)?;
                let params = ty.function_params().unwrap_or_default();
                self.frames.push(Frame {
                    lambda_boundary: true,
                    codomain: ty.codomain(),
                    names: params,
                });
                let result = self.visit(body);
                self.frames.pop();
                result?;
                Some(ty.clone())
            }
            TermKind::AssignVar { name, value, .. } => {
                self.visit(value)?;
                Some(self.lookup(&name.name, name.span)?)
            }
            TermKind::AssignField {
                target,
                field,
                value,
                ..
            } => {
                self.visit(value)?;
                match self.visit(target)? {
                    Some(target_ty) => Some(self.field_of(&target_ty, &field.name, field.span)?),
                    None => None,
                }
            }
            TermKind::Call { callee, args } => {
                let callee_ty = self.visit(callee)?;
                for arg in args {
                    self.visit(&arg.value)?;
                }
                match callee_ty {
                    Some(ct) => Some(ct.codomain().ok_or_else(|| TypeError::NotAFunctionType {
                        span: callee.span,
                        ty: format_type(&ct),
                    })?),
                    None => None,
                }
            }
            TermKind::Return { value, .. } => {
                self.visit(value)?;
                self.codomain()
            }
            TermKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.visit(cond)?;
                let then_ty = self.visit(then_branch)?;
                let else_ty = self.visit(else_branch)?;
                then_ty.or(else_ty)
            }
            TermKind::Seq(first, second) => {
                self.visit(first)?;
                self.visit(second)?
            }
        };
        if let Some(ty) = &ty {
            self.node_types.insert(term.id, ty.clone());
        }
        Ok(ty)
    }
}

/// Qualifier well-formedness at every nesting level, known atomic names and
/// contractive recursive binders.
fn check_annotation(ty: &TypeExpr, span: SourceSpan) -> Result<(), TypeError> {
    match &ty.kind {
        TypeKind::Var(_) => Ok(()),
        TypeKind::Rec { var, body } => {
            let mut head = body.as_ref();
            while let TypeKind::Rec { body, .. } = &head.kind {
                head = body;
            }
            if matches!(head.kind, TypeKind::Var(_)) {
                return Err(TypeError::NonContractive {
                    span,
                    var: var.clone(),
                });
            }
            check_annotation(body, span)
        }
        _ => {
            if !well_formed(&ty.quals) {
                return Err(TypeError::MalformedQualifiers {
                    span,
                    ty: format_type(ty),
                });
            }
            match &ty.kind {
                TypeKind::Atomic(name) if name == "Int" || name == "Bool" => Ok(()),
                TypeKind::Atomic(name) => Err(TypeError::UnknownTypeName {
                    span,
                    name: name.clone(),
                }),
                TypeKind::Function { params, codomain } => {
                    for (_, p) in params {
                        check_annotation(p, span)?;
                    }
                    check_annotation(codomain, span)
                }
                TypeKind::Structure(fields) => {
                    for (_, f) in fields {
                        check_annotation(f, span)?;
                    }
                    Ok(())
                }
                TypeKind::Var(_) | TypeKind::Rec { .. } => unreachable!(),
            }
        }
    }
}

/// Every call must name each parameter of its callee exactly once.
pub fn check_arity_and_names(program: &Term, env: &TypeEnv) -> Vec<TypeError> {
    let mut errors = Vec::new();
    program.walk(&mut |term| {
        let TermKind::Call { callee, args } = &term.kind else {
            return;
        };
        let Some(params) = env.node_type(callee.id).and_then(|t| t.function_params()) else {
            return;
        };
        for arg in args {
            if !params.iter().any(|(p, _)| *p == arg.name.name) {
                errors.push(TypeError::UnknownParameterName {
                    span: arg.name.span,
                    name: arg.name.name.clone(),
                });
            }
        }
        for (param, _) in &params {
            if !args.iter().any(|a| a.name.name == *param) {
                errors.push(TypeError::MissingArgument {
                    span: term.span,
                    name: param.clone(),
                });
            }
        }
    });
    errors
}
