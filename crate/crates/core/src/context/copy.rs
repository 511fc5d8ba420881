use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{EvalContext, Location, RefId, Value};
use crate::typesys::{initial_capabilities, CapabilitySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CopyError {
    #[error("location {0} holds no value")]
    Undefined(Location),
    #[error("field reference {0} is unbound")]
    UnboundField(RefId),
}

/// Copies staged here are committed only once the whole graph has been
/// read, so the source is never observed half-overwritten.
struct Stager<'c> {
    ctx: &'c mut EvalContext,
    memo: HashMap<Location, Location>,
    values: Vec<(Location, Value)>,
    fields: Vec<(RefId, Location, CapabilitySet)>,
}

impl Stager<'_> {
    fn run(&mut self, root_src: Location, root_dst: Location) -> Result<(), CopyError> {
        self.memo.insert(root_src, root_dst);
        let mut work = vec![(root_src, root_dst)];
        while let Some((src, dst)) = work.pop() {
            let value = match self.ctx.value(src) {
                None | Some(Value::Undefined) => return Err(CopyError::Undefined(src)),
                Some(v) => v.clone(),
            };
            let copied = match value {
                Value::Record { ty, fields } => {
                    let field_types = ty.structure_fields().unwrap_or_default();
                    let mut new_fields = BTreeMap::new();
                    for (name, field_ref) in fields {
                        let field_src = self.ctx.location(field_ref);
                        if field_src.is_null() {
                            return Err(CopyError::UnboundField(field_ref));
                        }
                        let field_dst = match self.memo.get(&field_src) {
                            Some(existing) => *existing,
                            None => {
                                let fresh = self.ctx.fresh_location();
                                self.memo.insert(field_src, fresh);
                                work.push((field_src, fresh));
                                fresh
                            }
                        };
                        let caps = field_types
                            .iter()
                            .find(|(n, _)| *n == name)
                            .map(|(_, t)| initial_capabilities(t))
                            .unwrap_or_else(CapabilitySet::read_only);
                        let new_ref = self.ctx.fresh_ref();
                        self.fields.push((new_ref, field_dst, caps));
                        new_fields.insert(name, new_ref);
                    }
                    Value::Record {
                        ty,
                        fields: new_fields,
                    }
                }
                other => other,
            };
            self.values.push((dst, copied));
        }
        Ok(())
    }

    fn commit(self) {
        for (loc, value) in self.values {
            self.ctx.store(loc, value);
        }
        for (r, loc, caps) in self.fields {
            self.ctx.set_location(r, loc);
            self.ctx.set_caps(r, caps);
        }
    }
}

impl EvalContext {
    /// Deep copy of the value at `src` into a fresh location. Sharing and
    /// cycles inside the source graph are reproduced in the copy.
    pub fn deep_copy(&mut self, src: Location) -> Result<Location, CopyError> {
        let dst = self.fresh_location();
        self.copy_into(src, dst)?;
        Ok(dst)
    }

    /// Deep copy of the value at `src`, stored at `dst`. References back to
    /// `src` inside the graph are redirected to `dst`.
    pub fn copy_into(&mut self, src: Location, dst: Location) -> Result<(), CopyError> {
        let mut stager = Stager {
            ctx: self,
            memo: HashMap::new(),
            values: Vec::new(),
            fields: Vec::new(),
        };
        stager.run(src, dst)?;
        stager.commit();
        Ok(())
    }
}
