//! Symbolic execution of single transactions.
//!
//! A [`WorldState`] is the contract's storage plus the constraints gathered
//! by earlier transactions. [`exec_transaction`] runs one public function
//! from it and returns one [`TxEndState`] per feasible path.

mod exec;
pub mod expr;

use serde::Serialize;

use crate::frontend::ast::{StateType, ValueType};
use crate::frontend::ir::{BlockId, SiteId, Slot};
use crate::frontend::ContractUnit;
use crate::solver::Model;
use expr::{BinOp, SymExpr, Width};

pub use exec::{exec_transaction, ExecError, ExecLimits, TxOutcome};
pub use expr::simplify;

/// A boolean expression over symbols only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint(SymExpr);

impl Constraint {
    pub fn new(e: SymExpr) -> Constraint {
        Constraint(e)
    }

    pub fn expr(&self) -> &SymExpr {
        &self.0
    }
}

impl Serialize for Constraint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TxRecord {
    pub function: String,
    pub tx: u32,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    /// Indexed by slot: words and booleans for scalars, arrays for mappings.
    pub storage: Vec<SymExpr>,
    pub constraints: Vec<Constraint>,
    pub history: Vec<TxRecord>,
    pub alive: bool,
    /// A model of `constraints`, when one is known. Lets the executor skip
    /// solver calls for branch sides the model already satisfies.
    pub witness: Option<Model>,
}

impl WorldState {
    /// Freshly deployed: every slot zero, `false` or the zero array.
    pub fn deploy(unit: &ContractUnit, width: Width) -> WorldState {
        let storage = unit
            .state_vars
            .iter()
            .map(|v| match v.ty {
                StateType::Value(ValueType::Bool) => SymExpr::boolean(false),
                StateType::Value(_) => SymExpr::word(0, width),
                StateType::Mapping(_) => SymExpr::zero_array(width),
            })
            .collect();
        WorldState {
            storage,
            constraints: Vec::new(),
            history: Vec::new(),
            alive: true,
            witness: Some(Model::new()),
        }
    }

    /// Index of the next transaction, counting from 1.
    pub fn next_tx(&self) -> u32 {
        self.history.len() as u32 + 1
    }

    pub fn sequence(&self) -> Vec<String> {
        self.history.iter().map(|r| r.function.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TermKind {
    Stop,
    Return,
    Revert,
    Selfdestruct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    StorageRead {
        slot: Slot,
    },
    StorageWrite {
        slot: Slot,
    },
    ExternalCall {
        target: SymExpr,
        value: SymExpr,
    },
    ArithOverflowSite {
        op: BinOp,
        lhs: SymExpr,
        rhs: SymExpr,
    },
    SelfdestructEvent {
        beneficiary: SymExpr,
    },
}

/// Something observable that happened on a path. Ordinals count events
/// within one transaction and strictly increase along the path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub ordinal: u32,
    pub site: SiteId,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
pub struct TxEndState {
    /// The world after the transaction. A reverted transaction keeps the
    /// storage it started with.
    pub world: WorldState,
    pub function: String,
    pub tx: u32,
    pub terminator: TermKind,
    pub wrote_storage: bool,
    pub trace: Vec<TraceEvent>,
    /// Blocks in visiting order.
    pub blocks: Vec<BlockId>,
    /// The branch conditions this path assumed, in order.
    pub branch_conditions: Vec<SymExpr>,
}
