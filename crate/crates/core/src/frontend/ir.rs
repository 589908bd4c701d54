//! Per-function control-flow graph in three-address form.
//!
//! Every instruction and terminator carries a [`SiteId`] that is unique within
//! its function; findings are located by `(function, site)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::ValueType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalId(pub u32);

pub type Slot = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Word arithmetic that can wrap around.
    pub fn is_wrapping(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Local(LocalId),
    Word(u64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rvalue {
    Use(Operand),
    Binary(BinOp, Operand, Operand),
    Not(Operand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvValue {
    Caller,
    CallValue,
    Arg(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Assign {
        dest: LocalId,
        rvalue: Rvalue,
    },
    SLoad {
        dest: LocalId,
        slot: Slot,
    },
    SLoadMap {
        dest: LocalId,
        slot: Slot,
        key: Operand,
    },
    SStore {
        slot: Slot,
        src: Operand,
    },
    SStoreMap {
        slot: Slot,
        key: Operand,
        src: Operand,
    },
    Env {
        dest: LocalId,
        which: EnvValue,
    },
    ExtCall {
        dest: LocalId,
        target: Operand,
        value: Operand,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminator {
    Jump(BlockId),
    Branch {
        cond: Operand,
        then_block: BlockId,
        else_block: BlockId,
    },
    Return,
    Revert,
    Stop,
    Selfdestruct(Operand),
}

impl Terminator {
    pub fn successors(&self) -> Vec<BlockId> {
        match self {
            Terminator::Jump(b) => vec![*b],
            Terminator::Branch {
                then_block,
                else_block,
                ..
            } => vec![*then_block, *else_block],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub instrs: Vec<(SiteId, Instr)>,
    pub term: Terminator,
    pub term_site: SiteId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecl {
    pub name: String,
    pub ty: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub function: String,
    pub params: Vec<ValueType>,
    pub locals: Vec<LocalDecl>,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    pub loop_headers: BTreeSet<BlockId>,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.0 as usize]
    }

    pub fn local(&self, id: LocalId) -> &LocalDecl {
        &self.locals[id.0 as usize]
    }

    /// Iterates over every `(site, instruction)` in block order.
    pub fn instrs(&self) -> impl Iterator<Item = &(SiteId, Instr)> {
        self.blocks.iter().flat_map(|b| b.instrs.iter())
    }

    /// Blocks reachable from the entry.
    pub fn reachable(&self) -> BTreeSet<BlockId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.entry];
        while let Some(b) = stack.pop() {
            if seen.insert(b) {
                stack.extend(self.block(b).term.successors());
            }
        }
        seen
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Local(l) => write!(f, "%{}", l.0),
            Operand::Word(w) => write!(f, "{w}"),
            Operand::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Assign { dest, rvalue } => match rvalue {
                Rvalue::Use(o) => write!(f, "%{} = {o}", dest.0),
                Rvalue::Binary(op, a, b) => write!(f, "%{} = {a} {} {b}", dest.0, op.symbol()),
                Rvalue::Not(o) => write!(f, "%{} = !{o}", dest.0),
            },
            Instr::SLoad { dest, slot } => write!(f, "%{} = sload {slot}", dest.0),
            Instr::SLoadMap { dest, slot, key } => write!(f, "%{} = sload {slot}[{key}]", dest.0),
            Instr::SStore { slot, src } => write!(f, "sstore {slot} <- {src}"),
            Instr::SStoreMap { slot, key, src } => write!(f, "sstore {slot}[{key}] <- {src}"),
            Instr::Env { dest, which } => match which {
                EnvValue::Caller => write!(f, "%{} = env caller", dest.0),
                EnvValue::CallValue => write!(f, "%{} = env callvalue", dest.0),
                EnvValue::Arg(i) => write!(f, "%{} = env arg{i}", dest.0),
            },
            Instr::ExtCall {
                dest,
                target,
                value,
            } => write!(f, "%{} = call {target} value {value}", dest.0),
        }
    }
}

impl fmt::Display for Terminator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminator::Jump(b) => write!(f, "jump b{}", b.0),
            Terminator::Branch {
                cond,
                then_block,
                else_block,
            } => write!(f, "branch {cond} ? b{} : b{}", then_block.0, else_block.0),
            Terminator::Return => f.write_str("return"),
            Terminator::Revert => f.write_str("revert"),
            Terminator::Stop => f.write_str("stop"),
            Terminator::Selfdestruct(o) => write!(f, "selfdestruct {o}"),
        }
    }
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "function {} (entry b{})", self.function, self.entry.0)?;
        for (i, l) in self.locals.iter().enumerate() {
            writeln!(f, "  local %{i}: {} {}", l.ty, l.name)?;
        }
        for b in &self.blocks {
            let header = if self.loop_headers.contains(&b.id) {
                " (loop header)"
            } else {
                ""
            };
            writeln!(f, "b{}:{header}", b.id.0)?;
            for (site, instr) in &b.instrs {
                writeln!(f, "  @{:<3} {instr}", site.0)?;
            }
            writeln!(f, "  @{:<3} {}", b.term_site.0, b.term)?;
        }
        Ok(())
    }
}
