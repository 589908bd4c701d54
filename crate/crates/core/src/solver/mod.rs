//! Satisfiability of constraint conjunctions over fixed-width words.
//!
//! [`check`] first propagates `symbol == constant` facts by substitution,
//! then bit-blasts whatever remains and hands it to a CDCL SAT solver. Every
//! satisfying model is re-checked by evaluating the original constraints.

mod bitblast;
pub mod sat;
mod smtlib;

use std::collections::{BTreeMap, HashMap};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::symcore::expr::{BinOp, Node, Sort, SymExpr, Symbol, Value};
use crate::symcore::Constraint;
use bitblast::Blaster;
use sat::SatResult;

pub use smtlib::to_smtlib;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("malformed constraint: {0}")]
    MalformedConstraint(String),
    #[error("internal error: model does not satisfy `{0}`")]
    ModelCheckFailed(String),
}

/// Search limit per query, in SAT conflicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SolverBudget {
    pub max_conflicts: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            max_conflicts: 100_000,
        }
    }
}

/// Concrete values for symbols. Booleans are 0 or 1; symbols without an
/// entry read as 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    values: BTreeMap<Symbol, u64>,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    pub fn get(&self, s: &Symbol) -> u64 {
        self.values.get(s).copied().unwrap_or(0)
    }

    pub fn insert(&mut self, s: Symbol, v: u64) {
        self.values.insert(s, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &u64)> {
        self.values.iter()
    }

    pub fn eval(&self, e: &SymExpr) -> Value {
        e.eval(&|s| self.get(s))
    }

    pub fn satisfies(&self, constraints: &[Constraint]) -> bool {
        constraints.iter().all(|c| self.eval(c.expr()).as_bool())
    }
}

impl Serialize for Model {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.values.iter().map(|(k, v)| (k.name(), v)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Sat(Model),
    Unsat,
    Unknown,
}

impl CheckResult {
    /// Not proven unsatisfiable.
    pub fn maybe_sat(&self) -> bool {
        !matches!(self, CheckResult::Unsat)
    }
}

fn malformed(e: &SymExpr, why: &str) -> SolverError {
    SolverError::MalformedConstraint(format!("{why} in `{e}`"))
}

/// Sort discipline: operands agree, widths are in 1..=64, constants fit
/// their width, and the root is boolean.
pub fn well_formed(root: &SymExpr) -> Result<(), SolverError> {
    if root.sort() != Sort::Bool {
        return Err(malformed(root, "non-boolean constraint"));
    }
    for e in root.postorder() {
        let ok_width = |w: u32| (1..=64).contains(&w);
        match e.node() {
            Node::Const { value, width } => {
                if !ok_width(*width) || *value > crate::symcore::expr::mask(*width) {
                    return Err(malformed(&e, "bad constant"));
                }
            }
            Node::Sym(s) => match s.sort {
                Sort::Word(w) | Sort::Array(w) if !ok_width(w) => {
                    return Err(malformed(&e, "bad symbol width"))
                }
                _ => {}
            },
            Node::ZeroArray(w) if !ok_width(*w) => return Err(malformed(&e, "bad array width")),
            Node::Bool(_) | Node::ZeroArray(_) => {}
            Node::Not(a) => {
                if a.sort() != Sort::Bool {
                    return Err(malformed(&e, "negated word"));
                }
            }
            Node::Bin(op, a, b) => {
                let (sa, sb) = (a.sort(), b.sort());
                if sa != sb {
                    return Err(malformed(&e, "operand sort mismatch"));
                }
                let fine = match op {
                    BinOp::And | BinOp::Or => sa == Sort::Bool,
                    BinOp::Eq | BinOp::Ne => !matches!(sa, Sort::Array(_)),
                    _ => matches!(sa, Sort::Word(_)),
                };
                if !fine {
                    return Err(malformed(&e, "operator applied to wrong sort"));
                }
            }
            Node::Ite(c, t, f) => {
                if c.sort() != Sort::Bool || t.sort() != f.sort() {
                    return Err(malformed(&e, "ite sort mismatch"));
                }
            }
            Node::Select(a, k) => match a.sort() {
                Sort::Array(w) if k.sort() == Sort::Word(w) => {}
                _ => return Err(malformed(&e, "select sort mismatch")),
            },
            Node::Store(a, k, v) => match a.sort() {
                Sort::Array(w) if k.sort() == Sort::Word(w) && v.sort() == Sort::Word(w) => {}
                _ => return Err(malformed(&e, "store sort mismatch")),
            },
        }
    }
    Ok(())
}

fn flatten_into(e: &SymExpr, out: &mut Vec<SymExpr>) {
    match e.node() {
        Node::Bin(BinOp::And, a, b) => {
            flatten_into(a, out);
            flatten_into(b, out);
        }
        Node::Bool(true) => {}
        _ => out.push(e.clone()),
    }
}

/// A `symbol := constant` fact implied by a top-level conjunct.
fn unit_binding(e: &SymExpr) -> Option<(Symbol, SymExpr)> {
    match e.node() {
        Node::Sym(s) if s.sort == Sort::Bool => Some((*s, SymExpr::boolean(true))),
        Node::Not(a) => match a.node() {
            Node::Sym(s) if s.sort == Sort::Bool => Some((*s, SymExpr::boolean(false))),
            _ => None,
        },
        Node::Bin(BinOp::Eq, a, b) => match (a.node(), b.as_const()) {
            (Node::Sym(s), Some(_)) => Some((*s, b.clone())),
            _ => None,
        },
        _ => None,
    }
}

/// Decides the conjunction of `constraints`.
pub fn check(constraints: &[Constraint], budget: SolverBudget) -> Result<CheckResult, SolverError> {
    for c in constraints {
        well_formed(c.expr())?;
    }
    let mut symbols = std::collections::BTreeSet::new();
    for c in constraints {
        symbols.extend(c.expr().symbols());
    }

    let mut conjuncts = Vec::new();
    for c in constraints {
        flatten_into(c.expr(), &mut conjuncts);
    }

    // Propagate unit equalities to a fixpoint.
    let mut fixed: BTreeMap<Symbol, SymExpr> = BTreeMap::new();
    loop {
        if conjuncts.iter().any(|e| e.as_bool() == Some(false)) {
            return Ok(CheckResult::Unsat);
        }
        let mut round: HashMap<Symbol, SymExpr> = HashMap::new();
        for e in &conjuncts {
            if let Some((s, v)) = unit_binding(e) {
                round.entry(s).or_insert(v);
            }
        }
        if round.is_empty() {
            break;
        }
        for (s, v) in &round {
            fixed.insert(*s, v.clone());
        }
        let mut next = Vec::new();
        for e in &conjuncts {
            flatten_into(&e.substitute(&round), &mut next);
        }
        conjuncts = next;
    }

    let mut model = Model::new();
    for (s, v) in &fixed {
        model.insert(*s, v.eval(&|_| 0).as_word());
    }

    if !conjuncts.is_empty() {
        let mut blaster = Blaster::new();
        for s in &symbols {
            if !fixed.contains_key(s) {
                blaster.declare(*s);
            }
        }
        for e in &conjuncts {
            blaster.assert(e)?;
        }
        match blaster.sat.solve(budget.max_conflicts) {
            SatResult::Unsat => return Ok(CheckResult::Unsat),
            SatResult::Unknown => return Ok(CheckResult::Unknown),
            SatResult::Sat(assignment) => {
                for (s, bits) in &blaster.sym_bits {
                    model.insert(*s, bitblast::decode(bits, &assignment));
                }
            }
        }
    }
    for s in &symbols {
        if !model.values.contains_key(s) {
            model.insert(*s, 0);
        }
    }
    for c in constraints {
        if !model.eval(c.expr()).as_bool() {
            return Err(SolverError::ModelCheckFailed(c.expr().to_string()));
        }
    }
    Ok(CheckResult::Sat(model))
}

/// Where a query comes from, for labeling dumped queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryContext {
    pub depth: u32,
    pub function: String,
    /// Queries issued so far, including this one.
    pub counter: u64,
}

impl QueryContext {
    /// `tx<depth>_<function>_<counter>`
    pub fn file_stem(&self) -> String {
        format!("tx{}_{}_{}", self.depth, self.function, self.counter)
    }
}

pub type QueryHook = Box<dyn FnMut(&QueryContext, &[Constraint])>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SolverStats {
    pub calls: u64,
    pub sat: u64,
    pub unsat: u64,
    pub unknown: u64,
}

/// A budgeted solver that counts its queries and can show each one to a
/// hook before solving it.
pub struct Solver {
    pub budget: SolverBudget,
    pub stats: SolverStats,
    context: QueryContext,
    hook: Option<QueryHook>,
}

impl Solver {
    pub fn new(budget: SolverBudget) -> Solver {
        Solver {
            budget,
            stats: SolverStats::default(),
            context: QueryContext::default(),
            hook: None,
        }
    }

    pub fn set_hook(&mut self, hook: QueryHook) {
        self.hook = Some(hook);
    }

    /// Labels subsequent queries with the transaction depth and function.
    pub fn set_context(&mut self, depth: u32, function: &str) {
        self.context.depth = depth;
        self.context.function = function.to_string();
    }

    pub fn check(&mut self, constraints: &[Constraint]) -> Result<CheckResult, SolverError> {
        self.stats.calls += 1;
        self.context.counter += 1;
        if let Some(hook) = self.hook.as_mut() {
            hook(&self.context, constraints);
        }
        let r = check(constraints, self.budget)?;
        match r {
            CheckResult::Sat(_) => self.stats.sat += 1,
            CheckResult::Unsat => self.stats.unsat += 1,
            CheckResult::Unknown => self.stats.unknown += 1,
        }
        Ok(r)
    }
}
