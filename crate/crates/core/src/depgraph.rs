//! State-variable usage and the read-after-write (RAW) dependency map.
//!
//! `f` depends on `g` when some slot written by `g` is read by `f`. Usage is
//! flow-insensitive: every load or store in the lowered CFG counts, whether or
//! not the path reaching it is feasible, and mapping accesses count against
//! the whole slot regardless of key.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::frontend::ir::{Cfg, Instr, Slot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepError {
    #[error("`{0}` is not a public function of this contract")]
    UnknownFunction(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Usage {
    pub reads: BTreeSet<Slot>,
    pub writes: BTreeSet<Slot>,
}

/// Per-function read and write sets, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsageTable {
    pub functions: Vec<(String, Usage)>,
}

impl UsageTable {
    pub fn get(&self, function: &str) -> Option<&Usage> {
        self.functions
            .iter()
            .find(|(name, _)| name == function)
            .map(|(_, u)| u)
    }
}

pub fn compute_usage(cfgs: &[Cfg]) -> UsageTable {
    let functions = cfgs
        .iter()
        .map(|cfg| {
            let mut usage = Usage::default();
            for (_, instr) in cfg.instrs() {
                match instr {
                    Instr::SLoad { slot, .. } | Instr::SLoadMap { slot, .. } => {
                        usage.reads.insert(*slot);
                    }
                    Instr::SStore { slot, .. } | Instr::SStoreMap { slot, .. } => {
                        usage.writes.insert(*slot);
                    }
                    _ => {}
                }
            }
            (cfg.function.clone(), usage)
        })
        .collect();
    UsageTable { functions }
}

/// The dependency dictionary and its transpose. Both maps have every public
/// function as a key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawMap {
    /// `deps[f]`: functions whose writes `f` reads.
    pub deps: BTreeMap<String, BTreeSet<String>>,
    /// `inverse_deps[g]`: functions that read something `g` writes.
    pub inverse_deps: BTreeMap<String, BTreeSet<String>>,
    /// Public functions in declaration order.
    pub order: Vec<String>,
}

pub fn compute_raw_map(usage: &UsageTable) -> RawMap {
    let mut writers: BTreeMap<Slot, BTreeSet<&str>> = BTreeMap::new();
    for (name, u) in &usage.functions {
        for &slot in &u.writes {
            writers.entry(slot).or_default().insert(name);
        }
    }

    let mut raw = RawMap {
        order: usage.functions.iter().map(|(n, _)| n.clone()).collect(),
        ..RawMap::default()
    };
    for name in &raw.order {
        raw.deps.insert(name.clone(), BTreeSet::new());
        raw.inverse_deps.insert(name.clone(), BTreeSet::new());
    }
    for (reader, u) in &usage.functions {
        for slot in &u.reads {
            for &writer in writers.get(slot).into_iter().flatten() {
                raw.deps.get_mut(reader).unwrap().insert(writer.to_string());
                raw.inverse_deps
                    .get_mut(writer)
                    .unwrap()
                    .insert(reader.clone());
            }
        }
    }
    raw
}

/// Candidate next-transaction functions after a transaction that ran `g`.
pub fn dependents_of<'a>(raw: &'a RawMap, g: &str) -> Result<&'a BTreeSet<String>, DepError> {
    raw.inverse_deps
        .get(g)
        .ok_or_else(|| DepError::UnknownFunction(g.to_string()))
}

impl RawMap {
    pub fn edge_count(&self) -> usize {
        self.deps.values().map(BTreeSet::len).sum()
    }

    /// `{"deps": {..}, "inverse": {..}}` with lexicographically sorted
    /// function lists; functions with no entries are omitted.
    pub fn to_json(&self) -> Value {
        fn side(map: &BTreeMap<String, BTreeSet<String>>) -> Value {
            let mut out = Map::new();
            for (k, v) in map.iter().filter(|(_, v)| !v.is_empty()) {
                out.insert(k.clone(), json!(v.iter().collect::<Vec<_>>()));
            }
            Value::Object(out)
        }
        json!({ "deps": side(&self.deps), "inverse": side(&self.inverse_deps) })
    }
}
