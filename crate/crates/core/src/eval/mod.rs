//! Big-step evaluator. Each term evaluates to a reference identifier and an
//! updated context; every rule application can be recorded as a trace event.

mod error;
mod trace;

pub use error::{RuntimeError, RuntimeErrorKind};
pub use trace::{render_trace, TraceEvent};

use std::collections::HashMap;

use crate::context::{
    Builtin, EvalContext, FunctionBody, FunctionValue, Location, RefId, ReferenceState, Value,
};
use crate::syntax::{
    format_term, AssignOp, Ident, Literal, NodeId, SourceSpan, Term, TermKind, TypeExpr,
};
use crate::typesys::{initial_capabilities, literal_type, CapabilitySet, Qualifier, TypeEnv};

/// Name under which the return identifier is bound in the variable table.
/// `return` is a keyword, so user programs cannot spell it as a variable.
pub const RETURN_NAME: &str = "return";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Keep every binding and capability at scope exit.
    pub strict_rules: bool,
    pub trace: bool,
}

/// A `probe x` observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub name: String,
    pub state: ReferenceState,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub result: Result<RefId, RuntimeError>,
    pub context: EvalContext,
    pub trace: Vec<TraceEvent>,
    pub probes: Vec<Probe>,
}

/// A context holding only the prelude built-ins.
pub fn prelude_context() -> EvalContext {
    let mut ctx = EvalContext::new();
    for builtin in Builtin::ALL {
        let ty = TypeEnv::prelude_type(builtin.name()).expect("prelude type");
        let params = ty
            .function_params()
            .unwrap_or_default()
            .into_iter()
            .map(|(name, _)| name)
            .collect();
        let caps = initial_capabilities(&ty);
        let r = ctx.allocate(
            Value::Function(FunctionValue {
                ty,
                params,
                body: FunctionBody::Builtin(builtin),
            }),
            caps,
        );
        ctx.bind_name(builtin.name(), r);
    }
    ctx
}

pub fn evaluate(env: &TypeEnv, program: &Term, options: EvalOptions) -> Evaluation {
    evaluate_in(env, prelude_context(), program, options)
}

pub fn evaluate_in(
    env: &TypeEnv,
    ctx: EvalContext,
    program: &Term,
    options: EvalOptions,
) -> Evaluation {
    let mut interp = Interpreter {
        env,
        ctx,
        options,
        trace: Vec::new(),
        probes: Vec::new(),
        frames: vec![HashMap::new()],
        return_types: Vec::new(),
        fresh_names: 0,
    };
    let result = interp.eval(program);
    Evaluation {
        result,
        context: interp.ctx,
        trace: interp.trace,
        probes: interp.probes,
    }
}

enum Rhs<'t> {
    Term(&'t Term),
    Ref(RefId, &'t str),
}

enum Lhs<'t> {
    /// A source identifier, resolved through the current renaming frame.
    Name(&'t Ident),
    /// An already-resolved table name (argument bindings).
    Bound {
        name: &'t str,
        display: &'t str,
        span: SourceSpan,
    },
    Return,
    Field {
        target: &'t Term,
        field: &'t Ident,
    },
}

fn term_text(term: &Term) -> String {
    let text = format_term(term);
    match text.split_once('\n') {
        Some((first, _)) => format!("{} ...", first.trim_end()),
        None => text,
    }
}

fn fallback_type() -> TypeExpr {
    TypeExpr::atomic([Qualifier::Own, Qualifier::Cst], "Int")
}

struct Interpreter<'e> {
    env: &'e TypeEnv,
    ctx: EvalContext,
    options: EvalOptions,
    trace: Vec<TraceEvent>,
    probes: Vec<Probe>,
    /// Per activation: source name to variable-table name (α-renaming).
    frames: Vec<HashMap<String, String>>,
    return_types: Vec<TypeExpr>,
    fresh_names: u32,
}

impl Interpreter<'_> {
    fn emit(
        &mut self,
        rule: &'static str,
        span: SourceSpan,
        detail: impl FnOnce(&EvalContext) -> Vec<(&'static str, String)>,
    ) {
        if self.options.trace {
            let detail = detail(&self.ctx);
            self.trace.push(TraceEvent { rule, span, detail });
        }
    }

    fn type_of(&self, id: NodeId) -> TypeExpr {
        self.env
            .node_type(id)
            .cloned()
            .unwrap_or_else(fallback_type)
    }

    fn resolve<'a>(&'a self, name: &'a str) -> &'a str {
        self.frames
            .last()
            .and_then(|f| f.get(name))
            .map(String::as_str)
            .unwrap_or(name)
    }

    /// `name` itself, or a machine name when `name` is already bound.
    fn binding_name(&mut self, name: &str) -> String {
        if !self.ctx.is_bound_name(name) {
            return name.to_string();
        }
        loop {
            self.fresh_names += 1;
            let candidate = format!("{name}#{}", self.fresh_names);
            if !self.ctx.is_bound_name(&candidate) {
                return candidate;
            }
        }
    }

    fn eval(&mut self, term: &Term) -> Result<RefId, RuntimeError> {
        match &term.kind {
            TermKind::Atom(lit) => {
                let ty = self.type_of(term.id);
                Ok(self.atom(*lit, &ty, term.span))
            }
            TermKind::Var(id) => self.var(id, false),
            TermKind::Probe(id) => self.var(id, true),
            TermKind::Field { target, field } => {
                let r = self.eval(target)?;
                self.field(r, target, field)
            }
            TermKind::New(ty) => Ok(self.new_record(ty, term.span)),
            TermKind::Let { name, ty: _, body } => self.let_in(name, body, term.span),
            TermKind::Lambda { ty, params, body } => {
                let caps = initial_capabilities(ty);
                let r = self.ctx.allocate(
                    Value::Function(FunctionValue {
                        ty: ty.clone(),
                        params: params.iter().map(|p| p.name.clone()).collect(),
                        body: FunctionBody::Term(body.clone()),
                    }),
                    caps,
                );
                self.emit("E-Fun", term.span, |c| {
                    vec![("ref", r.to_string()), ("loc", c.location(r).to_string())]
                });
                Ok(r)
            }
            TermKind::AssignVar { name, op, value } => {
                let ty = self.type_of(term.id);
                self.assign(term.span, *op, Rhs::Term(value), Lhs::Name(name), &ty)
            }
            TermKind::AssignField {
                target,
                field,
                op,
                value,
            } => {
                let ty = self.type_of(term.id);
                self.assign(
                    term.span,
                    *op,
                    Rhs::Term(value),
                    Lhs::Field { target, field },
                    &ty,
                )
            }
            TermKind::Call { callee, args } => self.call(term, callee, args),
            TermKind::Return { op, value } => {
                let ty = match self.return_types.last() {
                    Some(ty) => ty.clone(),
                    None => self.type_of(term.id),
                };
                let r = self.assign(term.span, *op, Rhs::Term(value), Lhs::Return, &ty)?;
                self.emit("E-Ret", term.span, |_| vec![("ref", r.to_string())]);
                Ok(r)
            }
            TermKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.eval(cond)?;
                if !self.ctx.readable(c) {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::NotReadable,
                        cond.span,
                        term_text(cond),
                    )
                    .with_state(self.ctx.classify_state(c)));
                }
                let (rule, branch) = match self.ctx.value_of(c) {
                    Some(Value::Atom(Literal::Bool(true))) => ("E-Cond-True", then_branch),
                    Some(Value::Atom(Literal::Bool(false))) => ("E-Cond-False", else_branch),
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::ConditionNotBoolean,
                            cond.span,
                            term_text(cond),
                        ))
                    }
                };
                let r = self.eval(branch)?;
                self.emit(rule, term.span, |_| vec![("ref", r.to_string())]);
                Ok(r)
            }
            TermKind::Seq(first, second) => {
                self.eval(first)?;
                let r = self.eval(second)?;
                self.emit("E-Seq", term.span, |_| vec![("ref", r.to_string())]);
                Ok(r)
            }
        }
    }

    fn atom(&mut self, lit: Literal, ty: &TypeExpr, span: SourceSpan) -> RefId {
        let r = self
            .ctx
            .allocate(Value::Atom(lit), initial_capabilities(ty));
        self.emit("E-Atom", span, |c| {
            vec![
                ("ref", r.to_string()),
                ("loc", c.location(r).to_string()),
                ("value", lit.to_string()),
            ]
        });
        r
    }

    fn var(&mut self, id: &Ident, probe: bool) -> Result<RefId, RuntimeError> {
        let name = self.resolve(&id.name).to_string();
        let r = self.ctx.lookup(&name).ok_or_else(|| {
            RuntimeError::new(RuntimeErrorKind::UndefinedVariable, id.span, &id.name)
        })?;
        let state = self.ctx.classify_state(r);
        if probe {
            self.probes.push(Probe {
                name: id.name.clone(),
                state,
                span: id.span,
            });
        }
        self.emit("E-Var", id.span, |_| {
            let mut detail = vec![("name", name), ("ref", r.to_string())];
            if probe {
                detail.push(("probe", state.to_string()));
            }
            detail
        });
        Ok(r)
    }

    fn field(&mut self, r: RefId, target: &Term, field: &Ident) -> Result<RefId, RuntimeError> {
        if !self.ctx.readable(r) {
            return Err(RuntimeError::new(
                RuntimeErrorKind::NotReadable,
                target.span,
                term_text(target),
            )
            .with_state(self.ctx.classify_state(r)));
        }
        let found = self
            .ctx
            .value_of(r)
            .and_then(Value::record_fields)
            .and_then(|fields| fields.get(&field.name))
            .copied();
        let Some(field_ref) = found else {
            return Err(RuntimeError::new(
                RuntimeErrorKind::UnknownField,
                field.span,
                term_text(target),
            )
            .with_detail(&field.name));
        };
        self.emit("E-Field", target.span.to(field.span), |_| {
            vec![
                ("field", field.name.clone()),
                ("ref", field_ref.to_string()),
            ]
        });
        Ok(field_ref)
    }

    fn new_record(&mut self, ty: &TypeExpr, span: SourceSpan) -> RefId {
        let mut fields = std::collections::BTreeMap::new();
        for (name, _) in ty.structure_fields().unwrap_or_default() {
            fields.insert(name, self.ctx.declare());
        }
        let r = self.ctx.allocate(
            Value::Record {
                ty: ty.unfold(),
                fields,
            },
            initial_capabilities(ty),
        );
        self.emit("E-New", span, |c| {
            let fields = match c.value_of(r) {
                Some(Value::Record { fields, .. }) => fields
                    .iter()
                    .map(|(n, f)| format!("{n}:{f}"))
                    .collect::<Vec<_>>()
                    .join(","),
                _ => String::new(),
            };
            vec![
                ("ref", r.to_string()),
                ("loc", c.location(r).to_string()),
                ("fields", fields),
            ]
        });
        r
    }

    fn let_in(
        &mut self,
        name: &Ident,
        body: &Term,
        span: SourceSpan,
    ) -> Result<RefId, RuntimeError> {
        let actual = self.binding_name(&name.name);
        let r = self.ctx.declare();
        self.ctx.bind_name(&actual, r);
        let previous = self
            .frames
            .last_mut()
            .expect("frame")
            .insert(name.name.clone(), actual.clone());
        let result = self.eval(body);
        let frame = self.frames.last_mut().expect("frame");
        match previous {
            Some(p) => frame.insert(name.name.clone(), p),
            None => frame.remove(&name.name),
        };
        let result = result?;
        if !self.options.strict_rules {
            self.ctx.release_binding_except(&actual, Some(result));
        }
        self.emit("E-Let", span, |_| {
            vec![("name", actual), ("ref", r.to_string())]
        });
        Ok(result)
    }

    fn lhs_subject(lhs: &Lhs) -> String {
        match lhs {
            Lhs::Name(id) => id.name.clone(),
            Lhs::Bound { display, .. } => display.to_string(),
            Lhs::Return => "return value".to_string(),
            Lhs::Field { target, field } => format!("{}.{}", term_text(target), field.name),
        }
    }

    fn assign(
        &mut self,
        span: SourceSpan,
        op: AssignOp,
        rhs: Rhs,
        lhs: Lhs,
        lhs_ty: &TypeExpr,
    ) -> Result<RefId, RuntimeError> {
        let right = match rhs {
            Rhs::Term(t) => self.eval(t)?,
            Rhs::Ref(r, _) => r,
        };
        let right_subject = || match rhs {
            Rhs::Term(t) => term_text(t),
            Rhs::Ref(_, s) => s.to_string(),
        };
        let left = match &lhs {
            Lhs::Name(id) => self.var(id, false)?,
            Lhs::Bound {
                name,
                display,
                span,
            } => self.ctx.lookup(name).ok_or_else(|| {
                RuntimeError::new(RuntimeErrorKind::UndefinedVariable, *span, *display)
            })?,
            Lhs::Return => self.ctx.lookup(RETURN_NAME).ok_or_else(|| {
                RuntimeError::new(RuntimeErrorKind::MissingReturn, span, "return value")
            })?,
            Lhs::Field { target, field } => {
                let t = self.eval(target)?;
                self.field(t, target, field)?
            }
        };

        let rule = match op {
            AssignOp::Copy => {
                if !self.ctx.readable(right) {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::NotReadable,
                        span,
                        right_subject(),
                    )
                    .with_state(self.ctx.classify_state(right)));
                }
                let source = self.ctx.location(right);
                let copy_failed =
                    |_| RuntimeError::new(RuntimeErrorKind::CopyOfUndefined, span, right_subject());
                if self.ctx.location(left).is_null() {
                    let target = self.ctx.fresh_location();
                    self.ctx.copy_into(source, target).map_err(copy_failed)?;
                    self.ctx.set_location(left, target);
                    self.ctx.set_caps(left, initial_capabilities(lhs_ty));
                    "E-Copy-Unalloc"
                } else if self.ctx.writeable(left) {
                    let target = self.ctx.location(left);
                    self.ctx.copy_into(source, target).map_err(copy_failed)?;
                    "E-Copy-Mutating"
                } else {
                    return Err(self.immutable(span, &lhs, left));
                }
            }
            AssignOp::Move => {
                // Only an owner can be moved out of: a borrowed reference is
                // rejected even though no one borrows from it.
                if !self.ctx.unique(right) || self.ctx.holds_borrow(right) {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::NotUnique,
                        span,
                        right_subject(),
                    )
                    .with_state(self.ctx.classify_state(right)));
                }
                let value = self
                    .ctx
                    .value_of(right)
                    .cloned()
                    .unwrap_or(Value::Undefined);
                let rule = if self.ctx.location(left).is_null() {
                    let target = self.ctx.fresh_location();
                    self.ctx.store(target, value);
                    self.ctx.set_location(left, target);
                    self.ctx.set_caps(left, initial_capabilities(lhs_ty));
                    "E-Move-Unalloc"
                } else if self.ctx.writeable(left) {
                    let target = self.ctx.location(left);
                    self.ctx.store(target, value);
                    "E-Move-Mutating"
                } else {
                    return Err(self.immutable(span, &lhs, left));
                };
                self.ctx.set_location(right, Location::NULL);
                self.ctx.set_caps(right, CapabilitySet::empty());
                rule
            }
            AssignOp::Alias => {
                let constant = !lhs_ty.has_qualifier(Qualifier::Mut);
                if constant && !self.ctx.readable(right) {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::NotReadable,
                        span,
                        right_subject(),
                    )
                    .with_state(self.ctx.classify_state(right)));
                }
                if !constant && !self.ctx.writeable(right) {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::NotWriteable,
                        span,
                        right_subject(),
                    )
                    .with_state(self.ctx.classify_state(right)));
                }
                if self.ctx.shared(left) {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::AliasTargetShared,
                        span,
                        Self::lhs_subject(&lhs),
                    )
                    .with_state(ReferenceState::Shared));
                }
                let compatible = self
                    .ctx
                    .borrowers(right)
                    .iter()
                    .all(|s| self.ctx.writeable(*s) != constant);
                if !compatible {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::AliasMutabilityMismatch,
                        span,
                        right_subject(),
                    )
                    .with_state(self.ctx.classify_state(right)));
                }
                let loc = self.ctx.location(right);
                self.ctx.set_location(left, loc);
                let caps = if constant {
                    CapabilitySet::read_only()
                } else {
                    CapabilitySet {
                        rw: true,
                        ..Default::default()
                    }
                };
                self.ctx.set_caps(left, caps.with_borrow(right));
                if constant {
                    "E-Alias-Cst"
                } else {
                    "E-Alias-Mut"
                }
            }
        };
        self.emit(rule, span, |c| {
            vec![
                ("left", left.to_string()),
                ("right", right.to_string()),
                ("left_state", c.classify_state(left).to_string()),
                ("right_state", c.classify_state(right).to_string()),
            ]
        });
        Ok(left)
    }

    fn immutable(&self, span: SourceSpan, lhs: &Lhs, left: RefId) -> RuntimeError {
        RuntimeError::new(
            RuntimeErrorKind::ImmutableMutation,
            span,
            Self::lhs_subject(lhs),
        )
        .with_state(self.ctx.classify_state(left))
    }

    fn call(
        &mut self,
        term: &Term,
        callee: &Term,
        args: &[crate::syntax::Argument],
    ) -> Result<RefId, RuntimeError> {
        let f = self.eval(callee)?;
        if !self.ctx.readable(f) {
            return Err(RuntimeError::new(
                RuntimeErrorKind::NotReadable,
                callee.span,
                term_text(callee),
            )
            .with_state(self.ctx.classify_state(f)));
        }
        let fun = match self.ctx.value_of(f) {
            Some(Value::Function(fun)) => fun.clone(),
            _ => {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::CalleeNotFunction,
                    callee.span,
                    term_text(callee),
                ))
            }
        };
        self.emit("E-Callee", callee.span, |_| vec![("ref", f.to_string())]);

        // Arguments: `let σx: τx { σx ◁ t }` in source order, the value
        // evaluated in the caller's frame. Bindings outlive the body.
        let params = fun.ty.function_params().unwrap_or_default();
        let mut frame = HashMap::new();
        let mut bound = Vec::with_capacity(args.len());
        for arg in args {
            let param_ty = params
                .iter()
                .find(|(n, _)| *n == arg.name.name)
                .map(|(_, t)| t.clone())
                .unwrap_or_else(fallback_type);
            let actual = self.binding_name(&arg.name.name);
            let r = self.ctx.declare();
            self.ctx.bind_name(&actual, r);
            self.assign(
                arg.name.span.to(arg.value.span),
                arg.op,
                Rhs::Term(&arg.value),
                Lhs::Bound {
                    name: &actual,
                    display: &arg.name.name,
                    span: arg.name.span,
                },
                &param_ty,
            )?;
            self.emit("E-Let", arg.name.span, |_| {
                vec![("name", actual.clone()), ("ref", r.to_string())]
            });
            frame.insert(arg.name.name.clone(), actual.clone());
            bound.push((actual, arg.name.span));
        }
        self.emit("E-Args-0", term.span, |_| Vec::new());
        for (actual, span) in bound.iter().rev() {
            self.emit("E-Args-N", *span, |_| vec![("param", actual.clone())]);
        }

        let return_ty = fun.ty.codomain().unwrap_or_else(fallback_type);
        let ret = self.ctx.declare();
        let outer_ret = self.ctx.bind_name(RETURN_NAME, ret);
        self.frames.push(frame);
        self.return_types.push(return_ty.clone());
        let body = match &fun.body {
            FunctionBody::Term(body) => self.eval(body).map(|_| ()),
            FunctionBody::Builtin(b) => self.builtin(*b, &fun.params, &return_ty, term.span),
        };
        self.frames.pop();
        self.return_types.pop();
        body?;
        self.emit("E-Let", term.span, |_| {
            vec![("name", RETURN_NAME.to_string()), ("ref", ret.to_string())]
        });

        match outer_ret {
            Some(outer) => {
                self.ctx.bind_name(RETURN_NAME, outer);
            }
            None if !self.options.strict_rules => {
                self.ctx.unbind_name(RETURN_NAME);
            }
            None => {}
        }
        if !self.options.strict_rules {
            for (actual, _) in &bound {
                self.ctx.release_binding_except(actual, Some(ret));
            }
        }
        self.emit("E-Call", term.span, |_| vec![("ref", ret.to_string())]);
        Ok(ret)
    }

    /// Body of a prelude function: read the (copied) operands, then
    /// `return <- result`.
    fn builtin(
        &mut self,
        builtin: Builtin,
        params: &[String],
        return_ty: &TypeExpr,
        span: SourceSpan,
    ) -> Result<(), RuntimeError> {
        let mismatch = || {
            RuntimeError::new(
                RuntimeErrorKind::BuiltinOperandMismatch,
                span,
                builtin.name(),
            )
        };
        let mut operands = Vec::with_capacity(params.len());
        for param in params {
            let name = self.resolve(param).to_string();
            let r = self.ctx.lookup(&name).ok_or_else(|| {
                RuntimeError::new(RuntimeErrorKind::UndefinedVariable, span, param)
            })?;
            if !self.ctx.readable(r) {
                return Err(
                    RuntimeError::new(RuntimeErrorKind::NotReadable, span, param)
                        .with_state(self.ctx.classify_state(r)),
                );
            }
            match self.ctx.value_of(r) {
                Some(Value::Atom(lit)) => operands.push(*lit),
                _ => return Err(mismatch()),
            }
        }
        use Literal::{Bool, Int};
        let result = match (builtin, operands.as_slice()) {
            (Builtin::Add, [Int(a), Int(b)]) => Int(a.wrapping_add(*b)),
            (Builtin::Sub, [Int(a), Int(b)]) => Int(a.wrapping_sub(*b)),
            (Builtin::Mul, [Int(a), Int(b)]) => Int(a.wrapping_mul(*b)),
            (Builtin::Eq, [Int(a), Int(b)]) => Bool(a == b),
            (Builtin::Eq, [Bool(a), Bool(b)]) => Bool(a == b),
            (Builtin::Gt, [Int(a), Int(b)]) => Bool(a > b),
            (Builtin::Not, [Bool(a)]) => Bool(!a),
            _ => return Err(mismatch()),
        };
        let atom = self.atom(result, &literal_type(result.type_name()), span);
        let text = result.to_string();
        let r = self.assign(
            span,
            AssignOp::Move,
            Rhs::Ref(atom, &text),
            Lhs::Return,
            return_ty,
        )?;
        self.emit("E-Ret", span, |_| vec![("ref", r.to_string())]);
        Ok(())
    }
}

#[cfg(test)]
mod tests;
