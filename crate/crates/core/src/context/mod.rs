//! The evaluation context: variable, reference, memory and capability
//! tables, plus the predicates the assignment rules are stated in.

mod copy;
mod dump;
mod value;

pub use copy::CopyError;
pub use value::{Builtin, FunctionBody, FunctionValue, Value};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::typesys::CapabilitySet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefId(pub u32);

impl fmt::Display for RefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// A memory address. `Location::NULL` (0) marks an unbound reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location(pub u32);

impl Location {
    pub const NULL: Location = Location(0);

    pub fn is_null(self) -> bool {
        self == Location::NULL
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// Typestate of a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReferenceState {
    Unallocated,
    Unique,
    Shared,
    Borrowed,
    Moved,
}

impl ReferenceState {
    pub const ALL: [ReferenceState; 5] = [
        ReferenceState::Unallocated,
        ReferenceState::Unique,
        ReferenceState::Shared,
        ReferenceState::Borrowed,
        ReferenceState::Moved,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceState::Unallocated => "unallocated",
            ReferenceState::Unique => "unique",
            ReferenceState::Shared => "shared",
            ReferenceState::Borrowed => "borrowed",
            ReferenceState::Moved => "moved",
        }
    }
}

impl fmt::Display for ReferenceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

static NO_CAPS: CapabilitySet = CapabilitySet {
    ro: false,
    rw: false,
    borrows: BTreeSet::new(),
};

#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    vars: BTreeMap<String, RefId>,
    refs: BTreeMap<RefId, Location>,
    mem: BTreeMap<Location, Value>,
    caps: BTreeMap<RefId, CapabilitySet>,
    ever_bound: BTreeSet<RefId>,
    next_ref: u32,
    next_loc: u32,
    // Reverse indexes; derived from the tables above.
    holders: BTreeMap<RefId, BTreeSet<RefId>>,
    refs_at: BTreeMap<Location, BTreeSet<RefId>>,
    containers: BTreeMap<RefId, BTreeSet<Location>>,
}

impl EvalContext {
    pub fn new() -> Self {
        EvalContext::default()
    }

    pub fn fresh_ref(&mut self) -> RefId {
        self.next_ref += 1;
        RefId(self.next_ref)
    }

    pub fn fresh_location(&mut self) -> Location {
        self.next_loc += 1;
        Location(self.next_loc)
    }

    // ---- ν ---------------------------------------------------------------

    pub fn lookup(&self, name: &str) -> Option<RefId> {
        self.vars.get(name).copied()
    }

    pub fn is_bound_name(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn bind_name(&mut self, name: &str, r: RefId) -> Option<RefId> {
        self.vars.insert(name.to_string(), r)
    }

    pub fn unbind_name(&mut self, name: &str) -> Option<RefId> {
        self.vars.remove(name)
    }

    // ---- ρ ---------------------------------------------------------------

    /// `ρ(r)`, with absent entries reading as null.
    pub fn location(&self, r: RefId) -> Location {
        self.refs.get(&r).copied().unwrap_or(Location::NULL)
    }

    pub fn set_location(&mut self, r: RefId, loc: Location) {
        if let Some(old) = self.refs.insert(r, loc) {
            if let Some(set) = self.refs_at.get_mut(&old) {
                set.remove(&r);
            }
        }
        if !loc.is_null() {
            self.refs_at.entry(loc).or_default().insert(r);
            self.ever_bound.insert(r);
        }
    }

    pub fn was_ever_bound(&self, r: RefId) -> bool {
        self.ever_bound.contains(&r)
    }

    // ---- μ ---------------------------------------------------------------

    pub fn value(&self, loc: Location) -> Option<&Value> {
        self.mem.get(&loc)
    }

    /// `μ(ρ(r))`.
    pub fn value_of(&self, r: RefId) -> Option<&Value> {
        let loc = self.location(r);
        if loc.is_null() {
            None
        } else {
            self.mem.get(&loc)
        }
    }

    pub fn store(&mut self, loc: Location, value: Value) {
        debug_assert!(!loc.is_null());
        if let Some(Value::Record { fields, .. }) = self.mem.get(&loc) {
            for field in fields.values() {
                if let Some(set) = self.containers.get_mut(field) {
                    set.remove(&loc);
                }
            }
        }
        if let Value::Record { fields, .. } = &value {
            for field in fields.values() {
                self.containers.entry(*field).or_default().insert(loc);
            }
        }
        self.mem.insert(loc, value);
    }

    // ---- κ ---------------------------------------------------------------

    pub fn caps(&self, r: RefId) -> &CapabilitySet {
        self.caps.get(&r).unwrap_or(&NO_CAPS)
    }

    pub fn set_caps(&mut self, r: RefId, caps: CapabilitySet) {
        if let Some(old) = self.caps.get(&r) {
            for owner in &old.borrows {
                if let Some(set) = self.holders.get_mut(owner) {
                    set.remove(&r);
                }
            }
        }
        for owner in &caps.borrows {
            self.holders.entry(*owner).or_default().insert(r);
        }
        self.caps.insert(r, caps);
    }

    /// Allocates a fresh reference bound to a fresh location holding `value`.
    pub fn allocate(&mut self, value: Value, caps: CapabilitySet) -> RefId {
        let r = self.fresh_ref();
        let loc = self.fresh_location();
        self.store(loc, value);
        self.set_location(r, loc);
        self.set_caps(r, caps);
        r
    }

    /// Declares a reference with no location and no capabilities.
    pub fn declare(&mut self) -> RefId {
        let r = self.fresh_ref();
        self.set_location(r, Location::NULL);
        self.set_caps(r, CapabilitySet::empty());
        r
    }

    // ---- predicates ---------------------------------------------------

    /// `s` denotes a record that reaches `r` through a chain of fields.
    pub fn contains(&self, s: RefId, r: RefId) -> bool {
        let mut visited = BTreeSet::new();
        let mut stack = vec![s];
        while let Some(current) = stack.pop() {
            let loc = self.location(current);
            if loc.is_null() || !visited.insert(loc) {
                continue;
            }
            if let Some(fields) = self.mem.get(&loc).and_then(Value::record_fields) {
                for field in fields.values() {
                    if *field == r {
                        return true;
                    }
                    stack.push(*field);
                }
            }
        }
        false
    }

    /// Every reference `s` with `contains(s, r)`.
    pub fn containers_of(&self, r: RefId) -> BTreeSet<RefId> {
        let mut found = BTreeSet::new();
        let mut stack = vec![r];
        let mut seen_locs = BTreeSet::new();
        while let Some(current) = stack.pop() {
            let Some(locs) = self.containers.get(&current) else {
                continue;
            };
            for loc in locs {
                if !seen_locs.insert(*loc) {
                    continue;
                }
                for s in self.refs_at.get(loc).into_iter().flatten() {
                    if found.insert(*s) {
                        stack.push(*s);
                    }
                }
            }
        }
        found
    }

    pub fn readable(&self, r: RefId) -> bool {
        let caps = self.caps(r);
        caps.ro || caps.rw
    }

    /// `rw ∈ κ(r)` and no container of `r` is non-writeable. Containment is
    /// transitive, so the recursive premise reduces to every container
    /// holding `rw`.
    pub fn writeable(&self, r: RefId) -> bool {
        self.caps(r).rw && self.containers_of(r).iter().all(|s| self.caps(*s).rw)
    }

    /// `B(r)`: references holding a borrow of `r`.
    pub fn borrowers(&self, r: RefId) -> BTreeSet<RefId> {
        self.holders.get(&r).cloned().unwrap_or_default()
    }

    fn has_borrowers(&self, r: RefId) -> bool {
        self.holders.get(&r).is_some_and(|set| !set.is_empty())
    }

    pub fn shared(&self, r: RefId) -> bool {
        self.readable(r) && self.has_borrowers(r)
    }

    pub fn unique(&self, r: RefId) -> bool {
        self.readable(r) && !self.has_borrowers(r)
    }

    pub fn holds_borrow(&self, r: RefId) -> bool {
        !self.caps(r).borrows.is_empty()
    }

    pub fn classify_state(&self, r: RefId) -> ReferenceState {
        let dead = if self.was_ever_bound(r) {
            ReferenceState::Moved
        } else {
            ReferenceState::Unallocated
        };
        if self.location(r).is_null() {
            return dead;
        }
        if self.holds_borrow(r) {
            ReferenceState::Borrowed
        } else if !self.readable(r) {
            dead
        } else if self.has_borrowers(r) {
            ReferenceState::Shared
        } else {
            ReferenceState::Unique
        }
    }

    // ---- scope exit ---------------------------------------------------

    /// Unbinds `name` and strips the reference it named of its location and
    /// capabilities, returning any borrow fragment it held.
    pub fn release_binding(&mut self, name: &str) {
        self.release_binding_except(name, None);
    }

    /// As [`release_binding`](Self::release_binding), but a reference equal
    /// to `keep` survives as an anonymous temporary.
    pub fn release_binding_except(&mut self, name: &str, keep: Option<RefId>) {
        let Some(r) = self.vars.remove(name) else {
            return;
        };
        if Some(r) == keep {
            return;
        }
        self.set_caps(r, CapabilitySet::empty());
        self.set_location(r, Location::NULL);
    }

    // ---- table views --------------------------------------------------

    pub fn vars(&self) -> &BTreeMap<String, RefId> {
        &self.vars
    }

    pub fn refs(&self) -> &BTreeMap<RefId, Location> {
        &self.refs
    }

    pub fn mem(&self) -> &BTreeMap<Location, Value> {
        &self.mem
    }

    pub fn cap_table(&self) -> &BTreeMap<RefId, CapabilitySet> {
        &self.caps
    }

    /// Locations reachable from `loc` through record fields, `loc` included.
    pub fn reachable_locations(&self, loc: Location) -> BTreeSet<Location> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![loc];
        while let Some(current) = stack.pop() {
            if current.is_null() || !seen.insert(current) {
                continue;
            }
            if let Some(fields) = self.mem.get(&current).and_then(Value::record_fields) {
                stack.extend(fields.values().map(|f| self.location(*f)));
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Literal, TypeExpr, TypeKind};
    use crate::typesys::Qualifier;

    fn int(n: i64) -> Value {
        Value::Atom(Literal::Int(n))
    }

    fn record(ctx: &mut EvalContext, quals: &[Qualifier], fields: &[(&str, RefId)]) -> RefId {
        let ty = TypeExpr::new(
            quals.iter().copied(),
            TypeKind::Structure(
                fields
                    .iter()
                    .map(|(n, _)| {
                        (
                            n.to_string(),
                            TypeExpr::atomic([Qualifier::Own, Qualifier::Mut], "Int"),
                        )
                    })
                    .collect(),
            ),
        );
        let caps = crate::typesys::initial_capabilities(&ty);
        let value = Value::Record {
            ty,
            fields: fields.iter().map(|(n, r)| (n.to_string(), *r)).collect(),
        };
        ctx.allocate(value, caps)
    }

    #[test]
    fn fresh_ids_are_monotone() {
        let mut ctx = EvalContext::new();
        assert_eq!(ctx.fresh_ref(), RefId(1));
        assert_eq!(ctx.fresh_ref(), RefId(2));
        assert_eq!(ctx.fresh_location(), Location(1));
        let a = ctx.fresh_location();
        let b = ctx.fresh_location();
        assert_ne!(a, b);
        assert!(!a.is_null());
    }

    #[test]
    fn contains_direct_nested_and_atoms() {
        let mut ctx = EvalContext::new();
        let leaf = ctx.allocate(int(1), CapabilitySet::read_write());
        let inner = record(&mut ctx, &[Qualifier::Own, Qualifier::Mut], &[("x", leaf)]);
        let outer = record(&mut ctx, &[Qualifier::Own, Qualifier::Mut], &[("i", inner)]);
        assert!(ctx.contains(inner, leaf));
        assert!(ctx.contains(outer, leaf));
        assert!(!ctx.contains(leaf, leaf));
        assert!(!ctx.contains(leaf, inner));
    }

    #[test]
    fn contains_terminates_on_cycles() {
        let mut ctx = EvalContext::new();
        let field = ctx.declare();
        let node = record(
            &mut ctx,
            &[Qualifier::Own, Qualifier::Mut],
            &[("next", field)],
        );
        let loc = ctx.location(node);
        ctx.set_location(field, loc);
        let stranger = ctx.declare();
        assert!(ctx.contains(node, field));
        assert!(!ctx.contains(node, stranger));
    }

    #[test]
    fn readable_follows_capabilities() {
        let mut ctx = EvalContext::new();
        let r = ctx.allocate(int(1), CapabilitySet::read_only());
        assert!(ctx.readable(r));
        ctx.set_caps(r, CapabilitySet::empty());
        assert!(!ctx.readable(r));
        ctx.set_caps(
            r,
            CapabilitySet {
                rw: true,
                ..Default::default()
            },
        );
        assert!(ctx.readable(r));
    }

    #[test]
    fn writeable_respects_deep_immutability() {
        let mut ctx = EvalContext::new();
        let leaf = ctx.allocate(int(1), CapabilitySet::read_write());
        assert!(ctx.writeable(leaf));
        let frozen = record(&mut ctx, &[Qualifier::Own, Qualifier::Cst], &[("x", leaf)]);
        assert!(!ctx.writeable(leaf));
        assert!(!ctx.writeable(frozen));
        // Unbinding the container lifts the restriction.
        ctx.set_location(frozen, Location::NULL);
        assert!(ctx.writeable(leaf));
        let ro = ctx.allocate(int(2), CapabilitySet::read_only());
        assert!(!ctx.writeable(ro));
    }

    #[test]
    fn writeable_through_mutable_cycle() {
        let mut ctx = EvalContext::new();
        let field = ctx.declare();
        let node = record(
            &mut ctx,
            &[Qualifier::Own, Qualifier::Mut],
            &[("next", field)],
        );
        ctx.set_location(field, ctx.location(node));
        ctx.set_caps(field, CapabilitySet::read_write());
        assert!(ctx.writeable(field));
        assert!(ctx.writeable(node));
    }

    #[test]
    fn sharing_and_borrowers() {
        let mut ctx = EvalContext::new();
        let a = ctx.allocate(int(10), CapabilitySet::read_write());
        let c = ctx.declare();
        let d = ctx.declare();
        assert!(ctx.unique(a) && !ctx.shared(a));
        assert!(ctx.borrowers(a).is_empty());
        ctx.set_location(c, ctx.location(a));
        ctx.set_caps(c, CapabilitySet::read_only().with_borrow(a));
        assert!(ctx.shared(a) && !ctx.unique(a));
        assert_eq!(ctx.borrowers(a), BTreeSet::from([c]));
        ctx.set_location(d, ctx.location(a));
        ctx.set_caps(d, CapabilitySet::read_only().with_borrow(a));
        assert_eq!(ctx.borrowers(a), BTreeSet::from([c, d]));
        ctx.set_caps(c, CapabilitySet::empty());
        ctx.set_caps(d, CapabilitySet::empty());
        assert!(ctx.unique(a));
        ctx.set_caps(a, CapabilitySet::empty());
        assert!(!ctx.shared(a) && !ctx.unique(a));
    }

    #[test]
    fn classification() {
        let mut ctx = EvalContext::new();
        let fresh = ctx.declare();
        assert_eq!(ctx.classify_state(fresh), ReferenceState::Unallocated);
        let a = ctx.allocate(int(10), CapabilitySet::read_write());
        assert_eq!(ctx.classify_state(a), ReferenceState::Unique);
        let c = ctx.declare();
        ctx.set_location(c, ctx.location(a));
        ctx.set_caps(c, CapabilitySet::read_only().with_borrow(a));
        assert_eq!(ctx.classify_state(a), ReferenceState::Shared);
        assert_eq!(ctx.classify_state(c), ReferenceState::Borrowed);
        ctx.set_location(a, Location::NULL);
        ctx.set_caps(a, CapabilitySet::empty());
        assert_eq!(ctx.classify_state(a), ReferenceState::Moved);
    }

    #[test]
    fn release_returns_borrow_fragment() {
        let mut ctx = EvalContext::new();
        let a = ctx.allocate(int(10), CapabilitySet::read_write());
        let c = ctx.declare();
        ctx.bind_name("c", c);
        ctx.set_location(c, ctx.location(a));
        ctx.set_caps(c, CapabilitySet::read_only().with_borrow(a));
        assert!(!ctx.unique(a));
        ctx.release_binding("c");
        assert!(ctx.unique(a));
        assert!(ctx.lookup("c").is_none());
        assert!(ctx.location(c).is_null());
    }

    #[test]
    fn releasing_an_owner_leaves_borrowers_dangling() {
        let mut ctx = EvalContext::new();
        let a = ctx.allocate(int(10), CapabilitySet::read_write());
        ctx.bind_name("a", a);
        let c = ctx.declare();
        ctx.set_location(c, ctx.location(a));
        ctx.set_caps(c, CapabilitySet::read_only().with_borrow(a));
        ctx.release_binding("a");
        assert!(ctx.readable(c));
        assert!(!ctx.readable(a));
    }

    #[test]
    fn releasing_unallocated_only_unbinds() {
        let mut ctx = EvalContext::new();
        let x = ctx.declare();
        ctx.bind_name("x", x);
        ctx.release_binding("x");
        assert!(ctx.lookup("x").is_none());
        assert!(ctx.caps(x).is_empty());
        assert!(ctx.location(x).is_null());
        assert_eq!(ctx.classify_state(x), ReferenceState::Unallocated);
    }

    #[test]
    fn release_can_keep_a_result() {
        let mut ctx = EvalContext::new();
        let a = ctx.allocate(int(10), CapabilitySet::read_write());
        ctx.bind_name("a", a);
        ctx.release_binding_except("a", Some(a));
        assert!(ctx.lookup("a").is_none());
        assert!(ctx.readable(a));
    }
}
