//! Deterministic pretty-printer. Output re-parses to a structurally equal
//! term.

use std::collections::BTreeSet;

use super::ast::*;
use crate::typesys::Qualifier;

const INDENT: &str = "    ";

// Precedence levels, loosest first.
const STMT: u8 = 0;
const CMP: u8 = 1;
const ADD: u8 = 2;
const MUL: u8 = 3;
const POSTFIX: u8 = 4;

pub fn format_term(term: &Term) -> String {
    let mut out = String::new();
    block_items(term, 0, &mut out);
    out
}

pub fn format_type(ty: &TypeExpr) -> String {
    let mut out = String::new();
    type_into(ty, &mut out);
    out
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str(INDENT);
    }
}

/// A right-nested sequence rendered one item per line.
fn block_items(term: &Term, indent: usize, out: &mut String) {
    let mut current = term;
    loop {
        pad(out, indent);
        match &current.kind {
            TermKind::Seq(first, rest) => {
                stmt(first, indent, out);
                out.push('\n');
                current = rest;
            }
            _ => {
                stmt(current, indent, out);
                return;
            }
        }
    }
}

fn braced(term: &Term, indent: usize, out: &mut String) {
    out.push_str("{\n");
    block_items(term, indent + 1, out);
    out.push('\n');
    pad(out, indent);
    out.push('}');
}

fn stmt(term: &Term, indent: usize, out: &mut String) {
    match &term.kind {
        TermKind::Seq(..) => {
            // A left-nested sequence item: newlines are insignificant inside
            // parentheses, so separate with `;`.
            out.push('(');
            inline_seq(term, indent, out);
            out.push(')');
        }
        TermKind::AssignVar { name, op, value } => {
            out.push_str(&name.name);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            expr(value, CMP, indent, out);
        }
        TermKind::AssignField {
            target,
            field,
            op,
            value,
        } => {
            expr(target, POSTFIX, indent, out);
            out.push('.');
            out.push_str(&field.name);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            expr(value, CMP, indent, out);
        }
        TermKind::Return { op, value } => {
            out.push_str("return ");
            out.push_str(op.symbol());
            out.push(' ');
            expr(value, CMP, indent, out);
        }
        TermKind::Probe(name) => {
            out.push_str("probe ");
            out.push_str(&name.name);
        }
        _ => expr(term, CMP, indent, out),
    }
}

fn inline_seq(term: &Term, indent: usize, out: &mut String) {
    match &term.kind {
        TermKind::Seq(first, rest) => {
            stmt(first, indent, out);
            out.push_str("; ");
            inline_seq(rest, indent, out);
        }
        _ => stmt(term, indent, out),
    }
}

fn precedence(term: &Term) -> u8 {
    match &term.kind {
        TermKind::Seq(..)
        | TermKind::AssignVar { .. }
        | TermKind::AssignField { .. }
        | TermKind::Return { .. }
        | TermKind::Probe(_) => STMT,
        TermKind::Call { callee, .. } => match infix_name(callee) {
            Some("==") | Some(">") => CMP,
            Some("+") | Some("-") => ADD,
            Some("*") => MUL,
            _ => POSTFIX,
        },
        _ => POSTFIX,
    }
}

fn infix_name(callee: &Term) -> Option<&str> {
    match &callee.kind {
        TermKind::Var(id) if matches!(id.name.as_str(), "+" | "-" | "*" | "==" | ">") => {
            Some(id.name.as_str())
        }
        _ => None,
    }
}

fn expr(term: &Term, min_prec: u8, indent: usize, out: &mut String) {
    if precedence(term) < min_prec {
        out.push('(');
        if matches!(term.kind, TermKind::Seq(..)) {
            inline_seq(term, indent, out);
        } else {
            stmt(term, indent, out);
        }
        out.push(')');
        return;
    }
    match &term.kind {
        TermKind::Atom(lit) => out.push_str(&lit.to_string()),
        TermKind::Var(id) => out.push_str(&id.name),
        TermKind::Field { target, field } => {
            expr(target, POSTFIX, indent, out);
            out.push('.');
            out.push_str(&field.name);
        }
        TermKind::New(ty) => {
            out.push_str("new ");
            type_into(ty, out);
        }
        TermKind::Let { name, ty, body } => {
            out.push_str("let ");
            out.push_str(&name.name);
            out.push_str(": ");
            type_into(ty, out);
            out.push(' ');
            braced(body, indent, out);
        }
        TermKind::Lambda { ty, params, body } => {
            let prefix = qualifier_prefix(&ty.quals, true);
            out.push_str(&prefix);
            out.push_str("fun(");
            let declared = ty.function_params().unwrap_or_default();
            for (i, param) in params.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&param.name);
                out.push_str(": ");
                match declared.iter().find(|(n, _)| *n == param.name) {
                    Some((_, pty)) => type_into(pty, out),
                    None => out.push_str("Int"),
                }
            }
            out.push_str(") -> ");
            match ty.codomain() {
                Some(codomain) => type_into(&codomain, out),
                None => out.push_str("Int"),
            }
            out.push(' ');
            braced(body, indent, out);
        }
        TermKind::Call { callee, args } => {
            if let Some(op) = infix_name(callee) {
                if let [lhs, rhs] = args.as_slice() {
                    let prec = precedence(term);
                    let (left_min, right_min) = if prec == CMP {
                        (ADD, ADD)
                    } else {
                        (prec, prec + 1)
                    };
                    expr(&lhs.value, left_min, indent, out);
                    out.push(' ');
                    out.push_str(op);
                    out.push(' ');
                    expr(&rhs.value, right_min, indent, out);
                    return;
                }
            }
            expr(callee, POSTFIX, indent, out);
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&arg.name.name);
                out.push(' ');
                out.push_str(arg.op.symbol());
                out.push(' ');
                expr(&arg.value, CMP, indent, out);
            }
            out.push(')');
        }
        TermKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            out.push_str("if ");
            expr(cond, CMP, indent, out);
            out.push(' ');
            braced(then_branch, indent, out);
            out.push_str(" else ");
            braced(else_branch, indent, out);
        }
        TermKind::Seq(..)
        | TermKind::AssignVar { .. }
        | TermKind::AssignField { .. }
        | TermKind::Return { .. }
        | TermKind::Probe(_) => stmt(term, indent, out),
    }
}

/// Reference qualifiers are printed only when they differ from the `@own`
/// default; the mutability qualifier is always printed for types.
fn qualifier_prefix(quals: &BTreeSet<Qualifier>, omit_defaults: bool) -> String {
    let mut parts = Vec::new();
    let brw = quals.contains(&Qualifier::Brw);
    let own = quals.contains(&Qualifier::Own);
    if own && brw {
        parts.push("@own");
    }
    if brw {
        parts.push("@brw");
    }
    let cst = quals.contains(&Qualifier::Cst);
    let mutable = quals.contains(&Qualifier::Mut);
    if cst && (mutable || !omit_defaults) {
        parts.push("@cst");
    }
    if mutable {
        parts.push("@mut");
    }
    let mut prefix = parts.join(" ");
    if !prefix.is_empty() {
        prefix.push(' ');
    }
    prefix
}

fn type_into(ty: &TypeExpr, out: &mut String) {
    match &ty.kind {
        TypeKind::Rec { var, body } => {
            out.push_str("rec ");
            out.push_str(var);
            out.push_str(" . ");
            type_into(body, out);
        }
        TypeKind::Var(var) => out.push_str(var),
        TypeKind::Atomic(name) => {
            out.push_str(&qualifier_prefix(&ty.quals, false));
            out.push_str(name);
        }
        TypeKind::Function { params, codomain } => {
            out.push_str(&qualifier_prefix(&ty.quals, false));
            out.push('(');
            typed_list(params, out);
            out.push_str(") -> ");
            type_into(codomain, out);
        }
        TypeKind::Structure(fields) => {
            out.push_str(&qualifier_prefix(&ty.quals, false));
            out.push('{');
            typed_list(fields, out);
            out.push('}');
        }
    }
}

fn typed_list(items: &[(String, TypeExpr)], out: &mut String) {
    for (i, (name, ty)) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(name);
        out.push_str(": ");
        type_into(ty, out);
    }
}
