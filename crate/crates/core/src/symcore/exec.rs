use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::expr::{self, SymExpr, SymOrigin, Symbol, Width, DEFAULT_WIDTH};
use super::{Constraint, EventKind, TermKind, TraceEvent, TxEndState, TxRecord, WorldState};
use crate::frontend::ast::ValueType;
use crate::frontend::ir::{BlockId, Cfg, EnvValue, Instr, Operand, Rvalue, SiteId, Terminator};
use crate::solver::{CheckResult, Model, Solver, SolverError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("the contract has self-destructed")]
    NotAlive,
    #[error("transaction indices start at 1")]
    BadTxIndex,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExecLimits {
    pub width: Width,
    /// Iterations allowed per loop; longer paths are dropped.
    pub loop_bound: u32,
    /// End states per transaction before exploration stops.
    pub max_paths: usize,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            width: DEFAULT_WIDTH,
            loop_bound: 3,
            max_paths: 512,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TxOutcome {
    pub end_states: Vec<TxEndState>,
    /// `max_paths` was hit; `end_states` is a prefix of the full result.
    pub truncated: bool,
    /// Paths discarded for exceeding the loop bound.
    pub loop_drops: u64,
    /// Branch feasibility checks that came back Unknown.
    pub unknown_branches: u64,
}

#[derive(Clone)]
struct Path {
    block: BlockId,
    storage: Vec<SymExpr>,
    locals: Vec<Option<SymExpr>>,
    constraints: Vec<Constraint>,
    trace: Vec<TraceEvent>,
    arrivals: BTreeMap<BlockId, u32>,
    blocks: Vec<BlockId>,
    conds: Vec<SymExpr>,
    witness: Option<Model>,
}

impl Path {
    fn event(&mut self, site: SiteId, kind: EventKind) -> u32 {
        let ordinal = self.trace.len() as u32;
        self.trace.push(TraceEvent {
            ordinal,
            site,
            kind,
        });
        ordinal
    }
}

struct Exec<'a> {
    cfg: &'a Cfg,
    world: &'a WorldState,
    tx: u32,
    limits: ExecLimits,
}

impl Exec<'_> {
    fn operand(&self, p: &Path, op: &Operand) -> SymExpr {
        match op {
            Operand::Local(id) => {
                p.locals[id.0 as usize]
                    .clone()
                    .unwrap_or_else(|| match self.cfg.local(*id).ty {
                        ValueType::Bool => SymExpr::boolean(false),
                        _ => SymExpr::word(0, self.limits.width),
                    })
            }
            Operand::Word(v) => SymExpr::word(*v, self.limits.width),
            Operand::Bool(b) => SymExpr::boolean(*b),
        }
    }

    fn word_sym(&self, origin: SymOrigin) -> SymExpr {
        SymExpr::sym(Symbol::word(origin, self.limits.width))
    }

    fn step(&self, p: &mut Path, site: SiteId, instr: &Instr) {
        match instr {
            Instr::Assign { dest, rvalue } => {
                let v = match rvalue {
                    Rvalue::Use(op) => self.operand(p, op),
                    Rvalue::Not(op) => SymExpr::not(self.operand(p, op)),
                    Rvalue::Binary(op, a, b) => {
                        let (x, y) = (self.operand(p, a), self.operand(p, b));
                        if op.is_wrapping() {
                            p.event(
                                site,
                                EventKind::ArithOverflowSite {
                                    op: *op,
                                    lhs: x.clone(),
                                    rhs: y.clone(),
                                },
                            );
                        }
                        SymExpr::bin(*op, x, y)
                    }
                };
                p.locals[dest.0 as usize] = Some(v);
            }
            Instr::SLoad { dest, slot } => {
                p.event(site, EventKind::StorageRead { slot: *slot });
                p.locals[dest.0 as usize] = Some(p.storage[*slot as usize].clone());
            }
            Instr::SLoadMap { dest, slot, key } => {
                p.event(site, EventKind::StorageRead { slot: *slot });
                let k = self.operand(p, key);
                let v = SymExpr::select(p.storage[*slot as usize].clone(), k);
                p.locals[dest.0 as usize] = Some(v);
            }
            Instr::SStore { slot, src } => {
                p.event(site, EventKind::StorageWrite { slot: *slot });
                p.storage[*slot as usize] = self.operand(p, src);
            }
            Instr::SStoreMap { slot, key, src } => {
                p.event(site, EventKind::StorageWrite { slot: *slot });
                let (k, v) = (self.operand(p, key), self.operand(p, src));
                let arr = p.storage[*slot as usize].clone();
                p.storage[*slot as usize] = SymExpr::store(arr, k, v);
            }
            Instr::Env { dest, which } => {
                let tx = self.tx;
                let word = match which {
                    EnvValue::Caller => self.word_sym(SymOrigin::Caller { tx }),
                    EnvValue::CallValue => self.word_sym(SymOrigin::CallValue { tx }),
                    EnvValue::Arg(arg) => self.word_sym(SymOrigin::Calldata { tx, arg: *arg }),
                };
                let v = match self.cfg.local(*dest).ty {
                    ValueType::Bool => SymExpr::ne(word, SymExpr::word(0, self.limits.width)),
                    _ => word,
                };
                p.locals[dest.0 as usize] = Some(v);
            }
            Instr::ExtCall {
                dest,
                target,
                value,
            } => {
                let kind = EventKind::ExternalCall {
                    target: self.operand(p, target),
                    value: self.operand(p, value),
                };
                let ordinal = p.event(site, kind);
                let ret = Symbol::boolean(SymOrigin::ExtcallRet {
                    tx: self.tx,
                    ordinal,
                });
                p.locals[dest.0 as usize] = Some(SymExpr::sym(ret));
            }
        }
    }

    /// Moves to `target`; false when the loop bound rules the move out.
    fn enter(&self, p: &mut Path, target: BlockId) -> bool {
        if self.cfg.loop_headers.contains(&target) {
            let n = p.arrivals.entry(target).or_insert(0);
            *n += 1;
            if *n > self.limits.loop_bound + 1 {
                return false;
            }
        }
        p.block = target;
        p.blocks.push(target);
        true
    }

    fn all_constraints(&self, p: &Path, extra: &SymExpr) -> Vec<Constraint> {
        let mut cs = self.world.constraints.clone();
        cs.extend(p.constraints.iter().cloned());
        cs.push(Constraint::new(extra.clone()));
        cs
    }

    fn finish(&self, p: Path, terminator: TermKind) -> TxEndState {
        let wrote_storage = p
            .trace
            .iter()
            .any(|e| matches!(e.kind, EventKind::StorageWrite { .. }));
        let mut constraints = self.world.constraints.clone();
        constraints.extend(p.constraints);
        let mut history = self.world.history.clone();
        history.push(TxRecord {
            function: self.cfg.function.clone(),
            tx: self.tx,
        });
        let storage = if terminator == TermKind::Revert {
            self.world.storage.clone()
        } else {
            p.storage
        };
        TxEndState {
            world: WorldState {
                storage,
                constraints,
                history,
                alive: terminator != TermKind::Selfdestruct,
                witness: p.witness,
            },
            function: self.cfg.function.clone(),
            tx: self.tx,
            terminator,
            wrote_storage,
            trace: p.trace,
            blocks: p.blocks,
            branch_conditions: p.conds,
        }
    }
}

/// Runs `cfg` as transaction number `tx` from `world`.
///
/// Paths are explored depth first, then-branch first, with a feasibility
/// check at every symbolic branch. A path whose check returns Unknown is
/// kept. Every transaction assumes a nonzero caller.
pub fn exec_transaction(
    cfg: &Cfg,
    world: &WorldState,
    tx: u32,
    limits: &ExecLimits,
    solver: &mut Solver,
) -> Result<TxOutcome, ExecError> {
    if !world.alive {
        return Err(ExecError::NotAlive);
    }
    if tx == 0 {
        return Err(ExecError::BadTxIndex);
    }
    let ex = Exec {
        cfg,
        world,
        tx,
        limits: *limits,
    };
    let caller = ex.word_sym(SymOrigin::Caller { tx });
    let caller_nonzero = SymExpr::ne(caller.clone(), SymExpr::word(0, limits.width));
    let witness = world.witness.clone().map(|mut m| {
        if let expr::Node::Sym(s) = caller.node() {
            m.insert(*s, 1);
        }
        m
    });

    let mut start = Path {
        block: cfg.entry,
        storage: world.storage.clone(),
        locals: vec![None; cfg.locals.len()],
        constraints: vec![Constraint::new(caller_nonzero)],
        trace: Vec::new(),
        arrivals: BTreeMap::new(),
        blocks: Vec::new(),
        conds: Vec::new(),
        witness,
    };
    let mut out = TxOutcome::default();
    if !ex.enter(&mut start, cfg.entry) {
        out.loop_drops += 1;
        return Ok(out);
    }

    let mut stack = vec![start];
    while let Some(mut p) = stack.pop() {
        if out.end_states.len() >= limits.max_paths {
            out.truncated = true;
            break;
        }
        let block = cfg.block(p.block);
        for (site, instr) in &block.instrs {
            ex.step(&mut p, *site, instr);
        }
        match &block.term {
            Terminator::Jump(target) => {
                if ex.enter(&mut p, *target) {
                    stack.push(p);
                } else {
                    out.loop_drops += 1;
                }
            }
            Terminator::Branch {
                cond,
                then_block,
                else_block,
            } => {
                let c = ex.operand(&p, cond);
                let sides = [
                    (c.clone(), *then_block),
                    (SymExpr::not(c.clone()), *else_block),
                ];
                if let Some(b) = c.as_bool() {
                    let target = if b { *then_block } else { *else_block };
                    if ex.enter(&mut p, target) {
                        stack.push(p);
                    } else {
                        out.loop_drops += 1;
                    }
                    continue;
                }
                let mut next = Vec::new();
                for (side, target) in sides {
                    let covered = p.witness.as_ref().is_some_and(|m| m.eval(&side).as_bool());
                    let witness = if covered {
                        p.witness.clone()
                    } else {
                        match solver.check(&ex.all_constraints(&p, &side))? {
                            CheckResult::Unsat => continue,
                            CheckResult::Sat(m) => Some(m),
                            CheckResult::Unknown => {
                                out.unknown_branches += 1;
                                None
                            }
                        }
                    };
                    let mut q = p.clone();
                    q.constraints.push(Constraint::new(side.clone()));
                    q.conds.push(side);
                    q.witness = witness;
                    if ex.enter(&mut q, target) {
                        next.push(q);
                    } else {
                        out.loop_drops += 1;
                    }
                }
                // Then-side on top of the stack.
                stack.extend(next.into_iter().rev());
            }
            Terminator::Return => out.end_states.push(ex.finish(p, TermKind::Return)),
            Terminator::Stop => out.end_states.push(ex.finish(p, TermKind::Stop)),
            Terminator::Revert => out.end_states.push(ex.finish(p, TermKind::Revert)),
            Terminator::Selfdestruct(op) => {
                let beneficiary = ex.operand(&p, op);
                p.event(
                    block.term_site,
                    EventKind::SelfdestructEvent { beneficiary },
                );
                out.end_states.push(ex.finish(p, TermKind::Selfdestruct));
            }
        }
    }
    if !stack.is_empty() {
        out.truncated = true;
    }
    Ok(out)
}
