//! Canonical rendering of value graphs, read straight from the context
//! tables. Two graphs are isomorphic iff their renderings are equal.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use acalc::context::{EvalContext, FunctionBody, Location, Value};
use acalc::syntax::{format_term, format_type, PRELUDE_NAMES};

fn location_of(ctx: &EvalContext, r: acalc::context::RefId) -> Location {
    ctx.refs().get(&r).copied().unwrap_or(Location::NULL)
}

/// Locations are numbered in breadth-first order from the roots, taken in
/// the given order, with record fields visited by name.
pub fn canonical(ctx: &EvalContext, roots: &[(String, Location)]) -> String {
    let mut ids: HashMap<Location, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |loc: Location, queue: &mut VecDeque<Location>| {
        let next = ids.len();
        *ids.entry(loc).or_insert_with(|| {
            queue.push_back(loc);
            next
        })
    };
    let mut out = String::new();
    for (name, loc) in roots {
        if loc.is_null() {
            let _ = writeln!(out, "{name} -> unbound");
        } else {
            let id = intern(*loc, &mut queue);
            let _ = writeln!(out, "{name} -> #{id}");
        }
    }
    let mut n = 0;
    while let Some(loc) = queue.pop_front() {
        let _ = write!(out, "#{n} = ");
        n += 1;
        match ctx.mem().get(&loc) {
            None | Some(Value::Undefined) => out.push_str("undefined"),
            Some(Value::Atom(lit)) => {
                let _ = write!(out, "{lit}");
            }
            Some(Value::Record { fields, .. }) => {
                out.push('{');
                for (name, r) in fields {
                    let field = location_of(ctx, *r);
                    if field.is_null() {
                        let _ = write!(out, " {name}: unbound");
                    } else {
                        let id = intern(field, &mut queue);
                        let _ = write!(out, " {name}: #{id}");
                    }
                }
                out.push_str(" }");
            }
            Some(Value::Function(fun)) => {
                let _ = write!(out, "fun {} ", format_type(&fun.ty));
                match &fun.body {
                    FunctionBody::Term(body) => out.push_str(&format_term(body)),
                    FunctionBody::Builtin(b) => out.push_str(b.name()),
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Graph reachable from the user-visible bindings: everything in the
/// variable table except built-ins, machine-renamed names and the return
/// identifier.
pub fn observable_store(ctx: &EvalContext) -> String {
    let roots: Vec<_> = ctx
        .vars()
        .iter()
        .filter(|(name, _)| {
            !name.contains('#')
                && name.as_str() != "return"
                && !PRELUDE_NAMES.contains(&name.as_str())
        })
        .map(|(name, r)| (name.clone(), location_of(ctx, *r)))
        .collect();
    canonical(ctx, &roots)
}

pub fn reachable(ctx: &EvalContext, root: Location) -> BTreeSet<Location> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(loc) = stack.pop() {
        if loc.is_null() || !seen.insert(loc) {
            continue;
        }
        if let Some(Value::Record { fields, .. }) = ctx.mem().get(&loc) {
            stack.extend(fields.values().map(|r| location_of(ctx, *r)));
        }
    }
    seen
}
