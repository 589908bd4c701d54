#![allow(dead_code)]

pub mod concrete;
pub mod enumerate;
pub mod oracles;

use std::collections::BTreeMap;

use depthscan::detectors::{Detector, Finding};
use depthscan::explorer::{ContractBundle, Observer};
use depthscan::frontend::CREATOR_ADDRESS;
use depthscan::solver::{check, CheckResult, SolverBudget};
use depthscan::symcore::expr::{SymOrigin, Symbol, Value};
use depthscan::symcore::{EventKind, TermKind, TxEndState, TxOutcome};

use concrete::{concretely_wraps, replay, CKind, CSlot, CVal};

/// Keeps every end state the explorer produces.
#[derive(Default)]
pub struct EndStates(pub Vec<TxEndState>);

impl Observer for EndStates {
    fn on_outcome(&mut self, _sequence: &[String], outcome: &TxOutcome) {
        self.0.extend(outcome.end_states.iter().cloned());
    }
}

fn attacker(f: &Finding, width: u32) -> u64 {
    f.model.get(&Symbol::word(SymOrigin::Attacker, width))
}

/// Replays a finding's sequence concretely and checks that its last
/// transaction reaches the flagged site and violates the property there.
pub fn replay_finding(bundle: &ContractBundle, f: &Finding, width: u32) -> Result<(), String> {
    if f.depth as usize != f.sequence.len() {
        return Err(format!(
            "depth {} for a sequence of {}",
            f.depth,
            f.sequence.len()
        ));
    }
    let txs = replay(bundle, &f.sequence, &f.model, width);
    let (last, prefix) = txs.split_last().ok_or("empty sequence")?;
    for t in prefix {
        if matches!(t.terminator, TermKind::Revert | TermKind::Selfdestruct) {
            return Err(format!(
                "{} ended with {:?} before the last transaction",
                t.function, t.terminator
            ));
        }
    }
    let ev = last
        .trace
        .iter()
        .find(|e| e.ordinal == f.ordinal)
        .ok_or_else(|| format!("no event {} in the last transaction", f.ordinal))?;
    if ev.site != f.location.site || last.function != f.location.function {
        return Err(format!(
            "reached {}@{} instead of {}",
            last.function, ev.site.0, f.location
        ));
    }
    match f.detector {
        Detector::UnrestrictedSelfdestruct => {
            let a = attacker(f, width);
            if last.terminator != TermKind::Selfdestruct
                || !matches!(ev.kind, CKind::Selfdestruct { .. })
            {
                return Err("did not selfdestruct".into());
            }
            if a == 0 || a == CREATOR_ADDRESS {
                return Err(format!("attacker {a} is not arbitrary"));
            }
            if let Some(t) = txs.iter().find(|t| t.caller != a) {
                return Err(format!(
                    "{} sent by {} not the attacker {a}",
                    t.function, t.caller
                ));
            }
        }
        Detector::Reentrancy => {
            if !matches!(ev.kind, CKind::Call { .. }) {
                return Err("flagged event is not a call".into());
            }
            if last.caller != attacker(f, width) {
                return Err("caller is not the attacker".into());
            }
            let read_before = |slot| {
                last.trace
                    .iter()
                    .any(|e| e.ordinal < ev.ordinal && e.kind == CKind::Read(slot))
            };
            let write_after = last.trace.iter().any(|e| {
                e.ordinal > ev.ordinal && matches!(e.kind, CKind::Write(s) if read_before(s))
            });
            if !write_after {
                return Err("no guard write after the call".into());
            }
        }
        Detector::IntegerOverflow => match ev.kind {
            CKind::Arith { op, a, b } if concretely_wraps(op, a, b, width) => {}
            ref other => return Err(format!("no wraparound: {other:?}")),
        },
    }
    Ok(())
}

fn same_kind(sym: &EventKind, con: &CKind) -> bool {
    match (sym, con) {
        (EventKind::StorageRead { slot }, CKind::Read(s)) => slot == s,
        (EventKind::StorageWrite { slot }, CKind::Write(s)) => slot == s,
        (EventKind::ExternalCall { .. }, CKind::Call { .. }) => true,
        (EventKind::ArithOverflowSite { op, .. }, CKind::Arith { op: o, .. }) => op == o,
        (EventKind::SelfdestructEvent { .. }, CKind::Selfdestruct { .. }) => true,
        _ => false,
    }
}

fn nonzero(m: &BTreeMap<u64, u64>) -> BTreeMap<u64, u64> {
    m.iter()
        .filter(|(_, v)| **v != 0)
        .map(|(k, v)| (*k, *v))
        .collect()
}

/// Solves the path condition of `end`, runs its sequence concretely under
/// the model, and compares path, terminator, events and final storage.
pub fn concretize(bundle: &ContractBundle, end: &TxEndState, width: u32) -> Result<(), String> {
    let model =
        match check(&end.world.constraints, SolverBudget::default()).map_err(|e| e.to_string())? {
            CheckResult::Sat(m) => m,
            other => return Err(format!("path condition is {other:?}")),
        };
    let txs = replay(bundle, &end.world.sequence(), &model, width);
    let last = txs.last().ok_or("empty history")?;
    if last.terminator != end.terminator {
        return Err(format!(
            "terminator {:?} vs symbolic {:?}",
            last.terminator, end.terminator
        ));
    }
    if last.blocks != end.blocks {
        return Err(format!(
            "blocks {:?} vs symbolic {:?}",
            last.blocks, end.blocks
        ));
    }
    let events_match = last.trace.len() == end.trace.len()
        && last.trace.iter().zip(&end.trace).all(|(c, s)| {
            c.ordinal == s.ordinal && c.site == s.site && same_kind(&s.kind, &c.kind)
        });
    if !events_match {
        return Err("event traces differ".into());
    }
    // Final storage agrees slot by slot.
    let mut state = concrete::deploy(bundle);
    for (i, f) in end.world.sequence().iter().enumerate() {
        concrete::run_tx(
            bundle.cfg(f).unwrap(),
            &mut state,
            i as u32 + 1,
            &model,
            width,
        );
    }
    for (slot, (sym, con)) in end.world.storage.iter().zip(&state.storage).enumerate() {
        let ok = match (model.eval(sym), con) {
            (Value::Word(a), CSlot::Val(CVal::W(b))) => a == *b,
            (Value::Bool(a), CSlot::Val(CVal::B(b))) => a == *b,
            (Value::Array(a), CSlot::Map(b)) => nonzero(&a) == nonzero(b),
            _ => false,
        };
        if !ok {
            return Err(format!("slot {slot} differs"));
        }
    }
    Ok(())
}
