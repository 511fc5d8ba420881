use std::collections::BTreeSet;
use std::fmt::Write;

use super::{EvalContext, Location, RefId, Value};

impl EvalContext {
    /// Text rendering of the four tables, each sorted by key.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("vars:\n");
        for (name, r) in self.vars() {
            let _ = writeln!(out, "  {name} -> {r}");
        }
        out.push_str("refs:\n");
        for (r, loc) in self.refs() {
            let _ = writeln!(out, "  {r} -> {loc}");
        }
        out.push_str("mem:\n");
        for (loc, value) in self.mem() {
            let _ = writeln!(out, "  {loc} = {value}");
        }
        out.push_str("caps:\n");
        for (r, caps) in self.cap_table() {
            let _ = writeln!(out, "  {r} = {caps}");
        }
        out
    }

    /// User-facing rendering of the value `r` refers to.
    pub fn render_value(&self, r: RefId) -> String {
        let mut out = String::new();
        self.render_into(self.location(r), &mut BTreeSet::new(), &mut out);
        out
    }

    fn render_into(&self, loc: Location, path: &mut BTreeSet<Location>, out: &mut String) {
        if loc.is_null() {
            out.push_str("<unbound>");
            return;
        }
        match self.value(loc) {
            None | Some(Value::Undefined) => out.push_str("<undefined>"),
            Some(Value::Record { fields, .. }) => {
                if !path.insert(loc) {
                    out.push_str("<cycle>");
                    return;
                }
                out.push('{');
                for (i, (name, field)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(name);
                    out.push_str(": ");
                    self.render_into(self.location(*field), path, out);
                }
                out.push('}');
                path.remove(&loc);
            }
            Some(other) => {
                let _ = write!(out, "{other}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Literal, TypeExpr, TypeKind};
    use crate::typesys::{CapabilitySet, Qualifier};

    #[test]
    fn dump_is_sorted_and_complete() {
        let mut ctx = EvalContext::new();
        let b = ctx.allocate(Value::Atom(Literal::Bool(true)), CapabilitySet::read_only());
        let a = ctx.allocate(Value::Atom(Literal::Int(7)), CapabilitySet::read_write());
        ctx.bind_name("b", b);
        ctx.bind_name("a", a);
        assert_eq!(
            ctx.dump(),
            "vars:\n  a -> r2\n  b -> r1\n\
             refs:\n  r1 -> l1\n  r2 -> l2\n\
             mem:\n  l1 = true\n  l2 = 7\n\
             caps:\n  r1 = {ro}\n  r2 = {ro, rw}\n"
        );
    }

    #[test]
    fn values_render_with_unbound_fields_and_cycles() {
        let mut ctx = EvalContext::new();
        let ty = TypeExpr::new(
            [Qualifier::Own, Qualifier::Mut],
            TypeKind::Structure(vec![]),
        );
        let x = ctx.allocate(Value::Atom(Literal::Int(1)), CapabilitySet::read_write());
        let y = ctx.declare();
        let me = ctx.declare();
        let rec = ctx.allocate(
            Value::Record {
                ty,
                fields: [("x".into(), x), ("y".into(), y), ("z".into(), me)].into(),
            },
            CapabilitySet::read_write(),
        );
        ctx.set_location(me, ctx.location(rec));
        assert_eq!(ctx.render_value(rec), "{x: 1, y: <unbound>, z: <cycle>}");
        assert_eq!(ctx.render_value(y), "<unbound>");
    }
}
