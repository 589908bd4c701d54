//! Security properties checked on transaction end states.
//!
//! Each detector conjoins the path constraints of an end state with the
//! negation of its property and reports a [`Finding`] when the solver finds a
//! model. An Unknown answer produces no finding and a warning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::frontend::ir::{SiteId, Slot};
use crate::frontend::CREATOR_ADDRESS;
use crate::solver::{CheckResult, Model, Solver, SolverError};
use crate::symcore::expr::{BinOp, SymExpr, SymOrigin, Symbol, Width};
use crate::symcore::{Constraint, EventKind, TxEndState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    Reentrancy,
    UnrestrictedSelfdestruct,
    IntegerOverflow,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::Reentrancy => "reentrancy",
            Detector::UnrestrictedSelfdestruct => "unrestricted-selfdestruct",
            Detector::IntegerOverflow => "integer-overflow",
        })
    }
}

/// An instruction: the function and the site id within its CFG.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Location {
    pub function: String,
    pub site: SiteId,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.function, self.site.0)
    }
}

pub type FindingKey = (Detector, Location);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub detector: Detector,
    pub location: Location,
    /// Trace ordinal of the flagged event in the last transaction.
    pub ordinal: u32,
    pub sequence: Vec<String>,
    pub depth: u32,
    /// Concrete inputs for every transaction of the sequence.
    pub model: Model,
}

impl Finding {
    pub fn key(&self) -> FindingKey {
        (self.detector, self.location.clone())
    }
}

#[derive(Debug, Clone, Default)]
pub struct DetectorOutput {
    pub findings: Vec<Finding>,
    pub unknowns: u64,
    pub warnings: Vec<String>,
}

pub struct DetectorContext<'a> {
    pub solver: &'a mut Solver,
    pub width: Width,
    /// Findings already reported in this run; their sites are not rechecked.
    pub known: &'a BTreeSet<FindingKey>,
}

fn attacker(width: Width) -> SymExpr {
    SymExpr::sym(Symbol::word(SymOrigin::Attacker, width))
}

fn caller(tx: u32, width: Width) -> SymExpr {
    SymExpr::sym(Symbol::word(SymOrigin::Caller { tx }, width))
}

impl DetectorContext<'_> {
    /// Solves `end`'s constraints plus `extra`; a model becomes a finding.
    fn query(
        &mut self,
        end: &TxEndState,
        extra: Vec<SymExpr>,
        detector: Detector,
        site: SiteId,
        ordinal: u32,
        out: &mut DetectorOutput,
    ) -> Result<bool, SolverError> {
        let mut q = end.world.constraints.clone();
        q.extend(extra.into_iter().map(Constraint::new));
        match self.solver.check(&q)? {
            CheckResult::Sat(model) => {
                debug_assert!(model.satisfies(&q));
                out.findings.push(Finding {
                    detector,
                    location: Location {
                        function: end.function.clone(),
                        site,
                    },
                    ordinal,
                    sequence: end.world.sequence(),
                    depth: end.tx,
                    model,
                });
                Ok(true)
            }
            CheckResult::Unsat => Ok(false),
            CheckResult::Unknown => {
                out.unknowns += 1;
                out.warnings.push(format!(
                    "{detector}: solver gave up at {}@{} after [{}]",
                    end.function,
                    site.0,
                    end.world.sequence().join(", ")
                ));
                Ok(false)
            }
        }
    }

    fn is_known(&self, detector: Detector, end: &TxEndState, site: SiteId) -> bool {
        self.known.contains(&(
            detector,
            Location {
                function: end.function.clone(),
                site,
            },
        ))
    }

    /// A single account other than the creator and the zero address sent
    /// every transaction of the sequence, and the last one selfdestructed.
    pub fn detect_unrestricted_selfdestruct(
        &mut self,
        end: &TxEndState,
        out: &mut DetectorOutput,
    ) -> Result<(), SolverError> {
        let Some(ev) = end
            .trace
            .iter()
            .find(|e| matches!(e.kind, EventKind::SelfdestructEvent { .. }))
        else {
            return Ok(());
        };
        let d = Detector::UnrestrictedSelfdestruct;
        if self.is_known(d, end, ev.site) {
            return Ok(());
        }
        let w = self.width;
        let mut extra: Vec<SymExpr> = end
            .world
            .history
            .iter()
            .map(|r| SymExpr::eq(caller(r.tx, w), attacker(w)))
            .collect();
        extra.push(SymExpr::ne(attacker(w), SymExpr::word(CREATOR_ADDRESS, w)));
        extra.push(SymExpr::ne(attacker(w), SymExpr::word(0, w)));
        self.query(end, extra, d, ev.site, ev.ordinal, out)?;
        Ok(())
    }

    /// An external call followed on the same path by a write to a slot that
    /// was read before the call.
    pub fn detect_reentrancy(
        &mut self,
        end: &TxEndState,
        out: &mut DetectorOutput,
    ) -> Result<(), SolverError> {
        let d = Detector::Reentrancy;
        let mut read_before: BTreeSet<Slot> = BTreeSet::new();
        let mut flagged: BTreeSet<SiteId> = BTreeSet::new();
        for (i, ev) in end.trace.iter().enumerate() {
            match ev.kind {
                EventKind::StorageRead { slot } => {
                    read_before.insert(slot);
                }
                EventKind::ExternalCall { .. } => {
                    if flagged.contains(&ev.site) || self.is_known(d, end, ev.site) {
                        continue;
                    }
                    let guard_write_after = end.trace[i + 1..].iter().any(|later| {
                        matches!(later.kind, EventKind::StorageWrite { slot } if read_before.contains(&slot))
                    });
                    if !guard_write_after {
                        continue;
                    }
                    let extra = vec![SymExpr::eq(
                        caller(end.tx, self.width),
                        attacker(self.width),
                    )];
                    if self.query(end, extra, d, ev.site, ev.ordinal, out)? {
                        flagged.insert(ev.site);
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Wraparound at an addition, subtraction or multiplication site.
    pub fn detect_integer_overflow(
        &mut self,
        end: &TxEndState,
        out: &mut DetectorOutput,
    ) -> Result<(), SolverError> {
        let d = Detector::IntegerOverflow;
        let mut done: BTreeSet<SiteId> = BTreeSet::new();
        for ev in &end.trace {
            let EventKind::ArithOverflowSite { op, lhs, rhs } = &ev.kind else {
                continue;
            };
            if done.contains(&ev.site) || self.is_known(d, end, ev.site) {
                continue;
            }
            let cond = wraps(*op, lhs, rhs, self.width);
            if cond.as_bool() == Some(false) {
                continue;
            }
            if self.query(end, vec![cond], d, ev.site, ev.ordinal, out)? {
                done.insert(ev.site);
            }
        }
        Ok(())
    }
}

/// The operation wraps around modulo 2^width.
pub fn wraps(op: BinOp, a: &SymExpr, b: &SymExpr, width: Width) -> SymExpr {
    let (a, b) = (a.clone(), b.clone());
    match op {
        BinOp::Add => SymExpr::ult(SymExpr::add(a.clone(), b), a),
        BinOp::Sub => SymExpr::ult(a, b),
        BinOp::Mul => SymExpr::and(
            SymExpr::ne(b.clone(), SymExpr::word(0, width)),
            SymExpr::ne(SymExpr::div(SymExpr::mul(a.clone(), b.clone()), b), a),
        ),
        _ => SymExpr::boolean(false),
    }
}

/// Runs the reentrancy, selfdestruct and overflow detectors in that order.
pub fn run_all(
    end: &TxEndState,
    ctx: &mut DetectorContext<'_>,
) -> Result<DetectorOutput, SolverError> {
    let mut out = DetectorOutput::default();
    ctx.detect_reentrancy(end, &mut out)?;
    ctx.detect_unrestricted_selfdestruct(end, &mut out)?;
    ctx.detect_integer_overflow(end, &mut out)?;
    Ok(out)
}

/// Counts findings per detector.
pub fn summarize(findings: &[Finding]) -> BTreeMap<Detector, usize> {
    let mut m = BTreeMap::new();
    for f in findings {
        *m.entry(f.detector).or_insert(0) += 1;
    }
    m
}
