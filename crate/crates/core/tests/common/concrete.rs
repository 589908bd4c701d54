//! A concrete interpreter for lowered contracts, written independently of
//! the symbolic executor. Inputs come from a solver model; anything the
//! model leaves out reads as zero.

use std::collections::BTreeMap;

use depthscan::explorer::ContractBundle;
use depthscan::frontend::ast::{StateType, ValueType};
use depthscan::frontend::ir::{
    BinOp, BlockId, Cfg, EnvValue, Instr, Operand, Rvalue, SiteId, Slot, Terminator,
};
use depthscan::solver::Model;
use depthscan::symcore::expr::{SymOrigin, Symbol};
use depthscan::symcore::TermKind;

const FUEL: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CVal {
    W(u64),
    B(bool),
}

impl CVal {
    fn w(self) -> u64 {
        match self {
            CVal::W(v) => v,
            CVal::B(b) => panic!("expected word, found bool {b}"),
        }
    }

    fn b(self) -> bool {
        match self {
            CVal::B(b) => b,
            CVal::W(v) => panic!("expected bool, found word {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CSlot {
    Val(CVal),
    Map(BTreeMap<u64, u64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CKind {
    Read(Slot),
    Write(Slot),
    Call { target: u64, value: u64 },
    Arith { op: BinOp, a: u64, b: u64 },
    Selfdestruct { beneficiary: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CEvent {
    pub ordinal: u32,
    pub site: SiteId,
    pub kind: CKind,
}

#[derive(Debug, Clone)]
pub struct CTx {
    pub function: String,
    pub caller: u64,
    pub terminator: TermKind,
    pub blocks: Vec<BlockId>,
    pub trace: Vec<CEvent>,
}

#[derive(Debug, Clone)]
pub struct CState {
    pub storage: Vec<CSlot>,
    pub alive: bool,
}

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// True when `op` on `a`, `b` leaves the `width`-bit range.
pub fn concretely_wraps(op: BinOp, a: u64, b: u64, width: u32) -> bool {
    let m = mask(width) as u128;
    let (a, b) = (a as u128, b as u128);
    match op {
        BinOp::Add => a + b > m,
        BinOp::Sub => a < b,
        BinOp::Mul => a * b > m,
        _ => false,
    }
}

pub fn deploy(bundle: &ContractBundle) -> CState {
    let storage = bundle
        .unit
        .state_vars
        .iter()
        .map(|v| match v.ty {
            StateType::Value(ValueType::Bool) => CSlot::Val(CVal::B(false)),
            StateType::Value(_) => CSlot::Val(CVal::W(0)),
            StateType::Mapping(_) => CSlot::Map(BTreeMap::new()),
        })
        .collect();
    CState {
        storage,
        alive: true,
    }
}

struct Machine<'a> {
    cfg: &'a Cfg,
    tx: u32,
    width: u32,
    model: &'a Model,
    locals: Vec<Option<CVal>>,
    trace: Vec<CEvent>,
}

impl Machine<'_> {
    fn input(&self, origin: SymOrigin) -> u64 {
        self.model.get(&Symbol::word(origin, self.width)) & mask(self.width)
    }

    fn op(&self, o: &Operand) -> CVal {
        match o {
            Operand::Word(v) => CVal::W(v & mask(self.width)),
            Operand::Bool(b) => CVal::B(*b),
            Operand::Local(l) => self.locals[l.0 as usize].unwrap_or(match self.cfg.local(*l).ty {
                ValueType::Bool => CVal::B(false),
                _ => CVal::W(0),
            }),
        }
    }

    fn event(&mut self, site: SiteId, kind: CKind) -> u32 {
        let ordinal = self.trace.len() as u32;
        self.trace.push(CEvent {
            ordinal,
            site,
            kind,
        });
        ordinal
    }

    fn binary(&mut self, site: SiteId, op: BinOp, x: CVal, y: CVal) -> CVal {
        let m = mask(self.width);
        match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul => {
                let (a, b) = (x.w(), y.w());
                self.event(site, CKind::Arith { op, a, b });
                CVal::W(
                    match op {
                        BinOp::Add => a.wrapping_add(b),
                        BinOp::Sub => a.wrapping_sub(b),
                        _ => a.wrapping_mul(b),
                    } & m,
                )
            }
            BinOp::Div => CVal::W(if y.w() == 0 { 0 } else { x.w() / y.w() }),
            BinOp::Lt => CVal::B(x.w() < y.w()),
            BinOp::Gt => CVal::B(x.w() > y.w()),
            BinOp::Eq => CVal::B(x == y),
            BinOp::Ne => CVal::B(x != y),
            BinOp::And => CVal::B(x.b() && y.b()),
            BinOp::Or => CVal::B(x.b() || y.b()),
        }
    }
}

/// Runs one transaction; `state` is updated unless the transaction reverts.
pub fn run_tx(cfg: &Cfg, state: &mut CState, tx: u32, model: &Model, width: u32) -> CTx {
    assert!(state.alive, "transaction on a destroyed contract");
    let mut m = Machine {
        cfg,
        tx,
        width,
        model,
        locals: vec![None; cfg.locals.len()],
        trace: Vec::new(),
    };
    let caller = m.input(SymOrigin::Caller { tx });
    let mut storage = state.storage.clone();
    let mut blocks = vec![cfg.entry];
    let mut cur = cfg.entry;
    let mut fuel = FUEL;
    let terminator = loop {
        fuel = fuel.checked_sub(1).expect("concrete run out of fuel");
        let block = cfg.block(cur);
        for (site, instr) in &block.instrs {
            let site = *site;
            match instr {
                Instr::Assign { dest, rvalue } => {
                    let v = match rvalue {
                        Rvalue::Use(o) => m.op(o),
                        Rvalue::Not(o) => CVal::B(!m.op(o).b()),
                        Rvalue::Binary(op, a, b) => {
                            let (x, y) = (m.op(a), m.op(b));
                            m.binary(site, *op, x, y)
                        }
                    };
                    m.locals[dest.0 as usize] = Some(v);
                }
                Instr::SLoad { dest, slot } => {
                    m.event(site, CKind::Read(*slot));
                    let CSlot::Val(v) = &storage[*slot as usize] else {
                        panic!("scalar load from mapping")
                    };
                    m.locals[dest.0 as usize] = Some(*v);
                }
                Instr::SLoadMap { dest, slot, key } => {
                    m.event(site, CKind::Read(*slot));
                    let k = m.op(key).w();
                    let CSlot::Map(map) = &storage[*slot as usize] else {
                        panic!("indexed load from scalar")
                    };
                    m.locals[dest.0 as usize] = Some(CVal::W(map.get(&k).copied().unwrap_or(0)));
                }
                Instr::SStore { slot, src } => {
                    m.event(site, CKind::Write(*slot));
                    storage[*slot as usize] = CSlot::Val(m.op(src));
                }
                Instr::SStoreMap { slot, key, src } => {
                    m.event(site, CKind::Write(*slot));
                    let (k, v) = (m.op(key).w(), m.op(src).w());
                    let CSlot::Map(map) = &mut storage[*slot as usize] else {
                        panic!("indexed store to scalar")
                    };
                    map.insert(k, v);
                }
                Instr::Env { dest, which } => {
                    let word = match which {
                        EnvValue::Caller => caller,
                        EnvValue::CallValue => m.input(SymOrigin::CallValue { tx }),
                        EnvValue::Arg(arg) => m.input(SymOrigin::Calldata { tx, arg: *arg }),
                    };
                    let v = match cfg.local(*dest).ty {
                        ValueType::Bool => CVal::B(word != 0),
                        _ => CVal::W(word),
                    };
                    m.locals[dest.0 as usize] = Some(v);
                }
                Instr::ExtCall {
                    dest,
                    target,
                    value,
                } => {
                    let (t, v) = (m.op(target).w(), m.op(value).w());
                    let ordinal = m.event(
                        site,
                        CKind::Call {
                            target: t,
                            value: v,
                        },
                    );
                    let ok = model.get(&Symbol::boolean(SymOrigin::ExtcallRet {
                        tx: m.tx,
                        ordinal,
                    })) != 0;
                    m.locals[dest.0 as usize] = Some(CVal::B(ok));
                }
            }
        }
        let next = match &block.term {
            Terminator::Jump(b) => *b,
            Terminator::Branch {
                cond,
                then_block,
                else_block,
            } => {
                if m.op(cond).b() {
                    *then_block
                } else {
                    *else_block
                }
            }
            Terminator::Return => break TermKind::Return,
            Terminator::Stop => break TermKind::Stop,
            Terminator::Revert => break TermKind::Revert,
            Terminator::Selfdestruct(o) => {
                let beneficiary = m.op(o).w();
                m.event(block.term_site, CKind::Selfdestruct { beneficiary });
                break TermKind::Selfdestruct;
            }
        };
        blocks.push(next);
        cur = next;
    };
    match terminator {
        TermKind::Revert => {}
        TermKind::Selfdestruct => {
            state.storage = storage;
            state.alive = false;
        }
        _ => state.storage = storage,
    }
    CTx {
        function: cfg.function.clone(),
        caller,
        terminator,
        blocks,
        trace: m.trace,
    }
}

/// Replays `sequence` from deployment with inputs from `model`.
pub fn replay(bundle: &ContractBundle, sequence: &[String], model: &Model, width: u32) -> Vec<CTx> {
    let mut state = deploy(bundle);
    sequence
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let cfg = bundle.cfg(f).expect("function in sequence");
            run_tx(cfg, &mut state, i as u32 + 1, model, width)
        })
        .collect()
}
