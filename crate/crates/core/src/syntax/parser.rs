//! Recursive-descent parser.
//!
//! Concrete grammar (newline and `;` both separate sequence items):
//!
//! ```text
//! seq      ::= stmt ((";" | NL) stmt)*            right-associative
//! stmt     ::= "return" op expr | "probe" IDENT | expr (op expr)?
//! expr     ::= add (("==" | ">") add)?
//! add      ::= mul (("+" | "-") mul)*
//! mul      ::= postfix ("*" postfix)*
//! postfix  ::= primary ("(" args ")" | "." IDENT)*
//! primary  ::= INT | "-" INT | "true" | "false" | IDENT | "(" seq ")"
//!            | "let" IDENT ":" type "{" seq "}"
//!            | qual* "fun" "(" params ")" "->" type "{" seq "}"
//!            | "new" type
//!            | "if" expr "{" seq "}" "else" ("{" seq "}" | if)
//! type     ::= qual* (IDENT | "(" params ")" "->" type | "{" params "}")
//!            | "rec" IDENT "." type
//! ```

use std::collections::BTreeSet;
use std::sync::Arc;

use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::SyntaxError;
use crate::typesys::Qualifier;

/// Names bound in the initial context; reserved everywhere.
pub const PRELUDE_NAMES: [&str; 6] = ["+", "-", "*", "==", ">", "not"];

struct Scope {
    lambda_boundary: bool,
    names: Vec<String>,
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    next_id: u32,
    scopes: Vec<Scope>,
    rec_vars: Vec<String>,
}

/// Parses a whole program. Shadowing, repeated parameters and repeated
/// argument names are rejected here, before any typing or evaluation.
pub fn parse_program(tokens: &[Token]) -> Result<Term, SyntaxError> {
    if tokens.last().map(|t| &t.kind) != Some(&TokenKind::Eof) {
        return Err(SyntaxError::Parse {
            span: tokens.last().map(|t| t.span).unwrap_or_default(),
            expected: vec!["end of input".into()],
            found: "truncated token stream".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        next_id: 0,
        scopes: vec![Scope {
            lambda_boundary: true,
            names: Vec::new(),
        }],
        rec_vars: Vec::new(),
    };
    parser.skip_newlines();
    let term = parser.seq()?;
    parser.skip_newlines();
    parser.expect(TokenKind::Eof)?;
    Ok(term)
}

/// Parses a program whose free variables are the given pre-declared names.
/// Used to run statements against an existing context.
pub fn parse_with_scope(tokens: &[Token], declared: &[&str]) -> Result<Term, SyntaxError> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        next_id: 0,
        scopes: vec![Scope {
            lambda_boundary: true,
            names: declared.iter().map(|s| s.to_string()).collect(),
        }],
        rec_vars: Vec::new(),
    };
    parser.skip_newlines();
    let term = parser.seq()?;
    parser.skip_newlines();
    parser.expect(TokenKind::Eof)?;
    Ok(term)
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> &Token {
        let tok = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn skip_newlines(&mut self) {
        while self.at(&TokenKind::Newline) {
            self.bump();
        }
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError::Parse {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<SourceSpan, SyntaxError> {
        if self.at(&kind) {
            Ok(self.bump().span)
        } else {
            Err(SyntaxError::Parse {
                span: self.span(),
                expected: vec![kind.to_string()],
                found: self.peek().to_string(),
            })
        }
    }

    fn ident(&mut self) -> Result<Ident, SyntaxError> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident::new(name, span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn node(&mut self, span: SourceSpan, kind: TermKind) -> Term {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        Term::new(id, span, kind)
    }

    fn from(&self, start: SourceSpan) -> SourceSpan {
        start.to(self.prev_span())
    }

    // ---- scopes -------------------------------------------------------

    fn visible_in_frame(&self, name: &str) -> bool {
        for scope in self.scopes.iter().rev() {
            if scope.names.iter().any(|n| n == name) {
                return true;
            }
            if scope.lambda_boundary {
                break;
            }
        }
        false
    }

    fn declare(&mut self, ident: &Ident) -> Result<(), SyntaxError> {
        if PRELUDE_NAMES.contains(&ident.name.as_str()) || self.visible_in_frame(&ident.name) {
            return Err(SyntaxError::ShadowingDeclaration {
                span: ident.span,
                name: ident.name.clone(),
            });
        }
        self.scopes
            .last_mut()
            .expect("scope stack is never empty")
            .names
            .push(ident.name.clone());
        Ok(())
    }

    // ---- terms --------------------------------------------------------

    fn seq(&mut self) -> Result<Term, SyntaxError> {
        let mut items = vec![self.stmt()?];
        loop {
            if !matches!(self.peek(), TokenKind::Semi | TokenKind::Newline) {
                break;
            }
            while matches!(self.peek(), TokenKind::Semi | TokenKind::Newline) {
                self.bump();
            }
            if matches!(
                self.peek(),
                TokenKind::RBrace | TokenKind::RParen | TokenKind::Eof
            ) {
                break;
            }
            items.push(self.stmt()?);
        }
        let mut term = items.pop().expect("at least one item");
        while let Some(first) = items.pop() {
            let span = first.span.to(term.span);
            term = self.node(span, TermKind::Seq(Box::new(first), Box::new(term)));
        }
        Ok(term)
    }

    fn assign_op(&mut self) -> Option<AssignOp> {
        let op = match self.peek() {
            TokenKind::OpAlias => AssignOp::Alias,
            TokenKind::OpCopy => AssignOp::Copy,
            TokenKind::OpMove => AssignOp::Move,
            _ => return None,
        };
        self.bump();
        self.skip_newlines();
        Some(op)
    }

    fn stmt(&mut self) -> Result<Term, SyntaxError> {
        let start = self.span();
        match self.peek() {
            TokenKind::Return => {
                self.bump();
                let op = self
                    .assign_op()
                    .ok_or_else(|| self.error(&["`&-`", "`:=`", "`<-`"]))?;
                let value = self.expr()?;
                let span = self.from(start);
                return Ok(self.node(
                    span,
                    TermKind::Return {
                        op,
                        value: Box::new(value),
                    },
                ));
            }
            TokenKind::Probe => {
                self.bump();
                let name = self.ident()?;
                let span = self.from(start);
                return Ok(self.node(span, TermKind::Probe(name)));
            }
            _ => {}
        }
        let lhs = self.expr()?;
        let Some(op) = self.assign_op() else {
            return Ok(lhs);
        };
        let value = Box::new(self.expr()?);
        let span = self.from(start);
        let kind = match lhs.kind {
            TermKind::Var(name) => TermKind::AssignVar { name, op, value },
            TermKind::Field { target, field } => TermKind::AssignField {
                target,
                field,
                op,
                value,
            },
            _ => {
                return Err(SyntaxError::Parse {
                    span: lhs.span,
                    expected: vec!["variable or field as assignment target".into()],
                    found: "expression".into(),
                })
            }
        };
        Ok(self.node(span, kind))
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        let left = self.additive()?;
        let name = match self.peek() {
            TokenKind::EqEq => "==",
            TokenKind::Gt => ">",
            _ => return Ok(left),
        };
        let op_span = self.bump().span;
        self.skip_newlines();
        let right = self.additive()?;
        Ok(self.infix(name, op_span, left, right))
    }

    fn additive(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.multiplicative()?;
        loop {
            let name = match self.peek() {
                TokenKind::Plus => "+",
                TokenKind::Minus => "-",
                _ => return Ok(left),
            };
            let op_span = self.bump().span;
            self.skip_newlines();
            let right = self.multiplicative()?;
            left = self.infix(name, op_span, left, right);
        }
    }

    fn multiplicative(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.postfix()?;
        while self.at(&TokenKind::Star) {
            let op_span = self.bump().span;
            self.skip_newlines();
            let right = self.postfix()?;
            left = self.infix("*", op_span, left, right);
        }
        Ok(left)
    }

    /// `a + b` is sugar for `+(lhs := a, rhs := b)`.
    fn infix(&mut self, name: &str, op_span: SourceSpan, left: Term, right: Term) -> Term {
        let span = left.span.to(right.span);
        let callee = self.node(op_span, TermKind::Var(Ident::new(name, op_span)));
        let args = vec![
            Argument {
                name: Ident::new("lhs", left.span),
                op: AssignOp::Copy,
                value: left,
            },
            Argument {
                name: Ident::new("rhs", right.span),
                op: AssignOp::Copy,
                value: right,
            },
        ];
        self.node(
            span,
            TermKind::Call {
                callee: Box::new(callee),
                args,
            },
        )
    }

    fn postfix(&mut self) -> Result<Term, SyntaxError> {
        let start = self.span();
        let mut term = self.primary()?;
        loop {
            match self.peek() {
                TokenKind::LParen => {
                    self.bump();
                    let args = self.arguments()?;
                    self.expect(TokenKind::RParen)?;
                    let span = self.from(start);
                    term = self.node(
                        span,
                        TermKind::Call {
                            callee: Box::new(term),
                            args,
                        },
                    );
                }
                TokenKind::Dot => {
                    self.bump();
                    let field = self.ident()?;
                    let span = self.from(start);
                    term = self.node(
                        span,
                        TermKind::Field {
                            target: Box::new(term),
                            field,
                        },
                    );
                }
                _ => return Ok(term),
            }
        }
    }

    fn arguments(&mut self) -> Result<Vec<Argument>, SyntaxError> {
        let mut args: Vec<Argument> = Vec::new();
        while !self.at(&TokenKind::RParen) {
            let name = self.ident()?;
            let op = self
                .assign_op()
                .ok_or_else(|| self.error(&["`&-`", "`:=`", "`<-`"]))?;
            let value = self.expr()?;
            if args.iter().any(|a| a.name.name == name.name) {
                return Err(SyntaxError::DuplicateArgumentName {
                    span: name.span,
                    name: name.name,
                });
            }
            args.push(Argument { name, op, value });
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        Ok(args)
    }

    fn primary(&mut self) -> Result<Term, SyntaxError> {
        let start = self.span();
        match self.peek().clone() {
            TokenKind::Int(n) => {
                self.bump();
                let value = i64::try_from(n).map_err(|_| SyntaxError::Parse {
                    span: start,
                    expected: vec!["integer literal within 64 bits".into()],
                    found: format!("`{n}`"),
                })?;
                Ok(self.node(start, TermKind::Atom(Literal::Int(value))))
            }
            TokenKind::Minus => {
                self.bump();
                let TokenKind::Int(n) = self.peek().clone() else {
                    return Err(self.error(&["integer literal"]));
                };
                self.bump();
                let value = 0i128 - n as i128;
                let value = i64::try_from(value).map_err(|_| SyntaxError::Parse {
                    span: self.from(start),
                    expected: vec!["integer literal within 64 bits".into()],
                    found: format!("`-{n}`"),
                })?;
                let span = self.from(start);
                Ok(self.node(span, TermKind::Atom(Literal::Int(value))))
            }
            TokenKind::True | TokenKind::False => {
                let value = self.at(&TokenKind::True);
                self.bump();
                Ok(self.node(start, TermKind::Atom(Literal::Bool(value))))
            }
            TokenKind::Ident(_) => {
                let name = self.ident()?;
                Ok(self.node(start, TermKind::Var(name)))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.seq()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Let => self.let_term(),
            TokenKind::Fun | TokenKind::Qual(_) => self.lambda(),
            TokenKind::New => {
                self.bump();
                let ty = self.type_expr()?;
                let span = self.from(start);
                Ok(self.node(span, TermKind::New(ty)))
            }
            TokenKind::If => self.if_term(),
            _ => Err(self.error(&["expression"])),
        }
    }

    fn block(&mut self) -> Result<Term, SyntaxError> {
        self.skip_newlines();
        self.expect(TokenKind::LBrace)?;
        self.skip_newlines();
        let body = self.seq()?;
        self.skip_newlines();
        self.expect(TokenKind::RBrace)?;
        Ok(body)
    }

    fn let_term(&mut self) -> Result<Term, SyntaxError> {
        let start = self.expect(TokenKind::Let)?;
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let ty = self.type_expr()?;
        self.declare(&name)?;
        self.scopes.push(Scope {
            lambda_boundary: false,
            names: Vec::new(),
        });
        let body = self.block();
        self.scopes.pop();
        self.pop_declaration(&name);
        let body = body?;
        let span = self.from(start);
        Ok(self.node(
            span,
            TermKind::Let {
                name,
                ty,
                body: Box::new(body),
            },
        ))
    }

    fn pop_declaration(&mut self, name: &Ident) {
        if let Some(scope) = self.scopes.last_mut() {
            if let Some(idx) = scope.names.iter().rposition(|n| *n == name.name) {
                scope.names.remove(idx);
            }
        }
    }

    fn lambda(&mut self) -> Result<Term, SyntaxError> {
        let start = self.span();
        let quals = self.qualifiers();
        self.expect(TokenKind::Fun)?;
        self.expect(TokenKind::LParen)?;
        let params = self.typed_params(ParamKind::Parameter)?;
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Arrow)?;
        self.skip_newlines();
        let codomain = self.type_expr()?;

        let mut scope = Scope {
            lambda_boundary: true,
            names: Vec::new(),
        };
        let mut idents = Vec::new();
        for (ident, _) in &params {
            if PRELUDE_NAMES.contains(&ident.name.as_str()) {
                return Err(SyntaxError::ShadowingDeclaration {
                    span: ident.span,
                    name: ident.name.clone(),
                });
            }
            scope.names.push(ident.name.clone());
            idents.push(ident.clone());
        }
        self.scopes.push(scope);
        let body = self.block();
        self.scopes.pop();
        let body = body?;

        let ty = TypeExpr::new(
            with_defaults(quals),
            TypeKind::Function {
                params: params.into_iter().map(|(i, t)| (i.name, t)).collect(),
                codomain: Box::new(codomain),
            },
        );
        let span = self.from(start);
        Ok(self.node(
            span,
            TermKind::Lambda {
                ty,
                params: idents,
                body: Arc::new(body),
            },
        ))
    }

    fn if_term(&mut self) -> Result<Term, SyntaxError> {
        let start = self.expect(TokenKind::If)?;
        let cond = self.expr()?;
        let then_branch = self.block()?;
        self.skip_newlines();
        self.expect(TokenKind::Else)?;
        let else_branch = if self.at(&TokenKind::If) {
            self.if_term()?
        } else {
            self.block()?
        };
        let span = self.from(start);
        Ok(self.node(
            span,
            TermKind::If {
                cond: Box::new(cond),
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
            },
        ))
    }

    // ---- types --------------------------------------------------------

    fn qualifiers(&mut self) -> Vec<Qualifier> {
        let mut quals = Vec::new();
        while let TokenKind::Qual(q) = self.peek() {
            quals.push(*q);
            self.bump();
        }
        quals
    }

    fn typed_params(&mut self, kind: ParamKind) -> Result<Vec<(Ident, TypeExpr)>, SyntaxError> {
        let close = match kind {
            ParamKind::Parameter => TokenKind::RParen,
            ParamKind::Field => TokenKind::RBrace,
        };
        let mut params: Vec<(Ident, TypeExpr)> = Vec::new();
        self.skip_newlines();
        while !self.at(&close) {
            let name = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let ty = self.type_expr()?;
            if params.iter().any(|(n, _)| n.name == name.name) {
                return Err(match kind {
                    ParamKind::Parameter => SyntaxError::DuplicateParameter {
                        span: name.span,
                        name: name.name,
                    },
                    ParamKind::Field => SyntaxError::DuplicateField {
                        span: name.span,
                        name: name.name,
                    },
                });
            }
            params.push((name, ty));
            self.skip_newlines();
            if !self.eat(&TokenKind::Comma) {
                break;
            }
            self.skip_newlines();
        }
        self.skip_newlines();
        Ok(params)
    }

    fn type_expr(&mut self) -> Result<TypeExpr, SyntaxError> {
        let qual_span = self.span();
        let quals = self.qualifiers();
        match self.peek().clone() {
            TokenKind::Rec => {
                if !quals.is_empty() {
                    return Err(SyntaxError::Parse {
                        span: qual_span,
                        expected: vec!["qualifiers after `rec α .`".into()],
                        found: "qualifier before `rec`".into(),
                    });
                }
                self.bump();
                let var = self.ident()?;
                self.expect(TokenKind::Dot)?;
                self.rec_vars.push(var.name.clone());
                let body = self.type_expr();
                self.rec_vars.pop();
                Ok(TypeExpr::rec(&var.name, body?))
            }
            TokenKind::Ident(name) => {
                let span = self.bump().span;
                if self.rec_vars.contains(&name) {
                    if !quals.is_empty() {
                        return Err(SyntaxError::Parse {
                            span,
                            expected: vec!["unqualified recursive type variable".into()],
                            found: format!("qualified `{name}`"),
                        });
                    }
                    return Ok(TypeExpr::var(&name));
                }
                Ok(TypeExpr::new(with_defaults(quals), TypeKind::Atomic(name)))
            }
            TokenKind::LParen => {
                self.bump();
                let params = self.typed_params(ParamKind::Parameter)?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Arrow)?;
                let codomain = self.type_expr()?;
                Ok(TypeExpr::new(
                    with_defaults(quals),
                    TypeKind::Function {
                        params: params.into_iter().map(|(i, t)| (i.name, t)).collect(),
                        codomain: Box::new(codomain),
                    },
                ))
            }
            TokenKind::LBrace => {
                self.bump();
                let fields = self.typed_params(ParamKind::Field)?;
                self.expect(TokenKind::RBrace)?;
                Ok(TypeExpr::new(
                    with_defaults(quals),
                    TypeKind::Structure(fields.into_iter().map(|(i, t)| (i.name, t)).collect()),
                ))
            }
            _ => Err(self.error(&["type"])),
        }
    }
}

#[derive(Clone, Copy)]
enum ParamKind {
    Parameter,
    Field,
}

/// Omitted qualifiers default to `@own` and `@cst`. Explicit conflicting
/// qualifiers are kept so the type checker can reject them.
fn with_defaults(quals: Vec<Qualifier>) -> BTreeSet<Qualifier> {
    let mut set: BTreeSet<Qualifier> = quals.into_iter().collect();
    if !set.contains(&Qualifier::Own) && !set.contains(&Qualifier::Brw) {
        set.insert(Qualifier::Own);
    }
    if !set.contains(&Qualifier::Cst) && !set.contains(&Qualifier::Mut) {
        set.insert(Qualifier::Cst);
    }
    set
}
