//! SMT-LIB v2 export, for cross-checking queries with an external solver.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::symcore::expr::{BinOp, Node, Sort, SymExpr};
use crate::symcore::Constraint;

fn sort_name(s: Sort) -> String {
    match s {
        Sort::Bool => "Bool".to_string(),
        Sort::Word(w) => format!("(_ BitVec {w})"),
        Sort::Array(w) => format!("(Array (_ BitVec {w}) (_ BitVec {w}))"),
    }
}

fn bv(value: u64, width: u32) -> String {
    format!("(_ bv{value} {width})")
}

struct Printer {
    names: HashMap<SymExpr, String>,
}

impl Printer {
    fn term(&self, e: &SymExpr) -> String {
        if let Some(n) = self.names.get(e) {
            return n.clone();
        }
        match e.node() {
            Node::Const { value, width } => bv(*value, *width),
            Node::Bool(b) => b.to_string(),
            Node::Sym(s) => s.name(),
            Node::Not(a) => format!("(not {})", self.term(a)),
            Node::Ite(c, t, f) => {
                format!("(ite {} {} {})", self.term(c), self.term(t), self.term(f))
            }
            Node::Select(a, k) => format!("(select {} {})", self.term(a), self.term(k)),
            Node::Store(a, k, v) => {
                format!("(store {} {} {})", self.term(a), self.term(k), self.term(v))
            }
            Node::ZeroArray(w) => {
                format!("((as const {}) {})", sort_name(Sort::Array(*w)), bv(0, *w))
            }
            Node::Bin(op, a, b) => {
                let (x, y) = (self.term(a), self.term(b));
                match op {
                    BinOp::Add => format!("(bvadd {x} {y})"),
                    BinOp::Sub => format!("(bvsub {x} {y})"),
                    BinOp::Mul => format!("(bvmul {x} {y})"),
                    BinOp::Div => {
                        let w = match a.sort() {
                            Sort::Word(w) => w,
                            _ => 1,
                        };
                        format!("(ite (= {y} {}) {} (bvudiv {x} {y}))", bv(0, w), bv(0, w))
                    }
                    BinOp::Lt => format!("(bvult {x} {y})"),
                    BinOp::Gt => format!("(bvugt {x} {y})"),
                    BinOp::Eq => format!("(= {x} {y})"),
                    BinOp::Ne => format!("(not (= {x} {y}))"),
                    BinOp::And => format!("(and {x} {y})"),
                    BinOp::Or => format!("(or {x} {y})"),
                }
            }
        }
    }
}

/// A self-contained script: symbol declarations, one `assert` per
/// constraint, `(check-sat)` and `(get-model)`. Subterms used more than once
/// are bound with `define-fun` so the text stays linear in the DAG size.
pub fn to_smtlib(constraints: &[Constraint]) -> String {
    let mut out = String::from("(set-logic QF_AUFBV)\n");

    let mut symbols = BTreeSet::new();
    let mut uses: HashMap<SymExpr, usize> = HashMap::new();
    let mut order: Vec<SymExpr> = Vec::new();
    for c in constraints {
        symbols.extend(c.expr().symbols());
        for e in c.expr().postorder() {
            if !uses.contains_key(&e) {
                order.push(e.clone());
                uses.insert(e.clone(), 0);
            }
        }
    }
    for e in &order {
        for child in e.children() {
            *uses.get_mut(child).expect("children precede parents") += 1;
        }
    }
    for s in &symbols {
        writeln!(out, "(declare-const {} {})", s.name(), sort_name(s.sort)).unwrap();
    }

    let mut printer = Printer {
        names: HashMap::new(),
    };
    for e in &order {
        if uses[e] > 1 && !e.children().is_empty() {
            let name = format!("t{}", printer.names.len());
            writeln!(
                out,
                "(define-fun {name} () {} {})",
                sort_name(e.sort()),
                printer.term(e)
            )
            .unwrap();
            printer.names.insert(e.clone(), name);
        }
    }
    if constraints.is_empty() {
        out.push_str("(assert true)\n");
    }
    for c in constraints {
        writeln!(out, "(assert {})", printer.term(c.expr())).unwrap();
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}
