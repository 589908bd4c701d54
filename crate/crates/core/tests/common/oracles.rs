//! Independent reference computations used as test oracles.

use std::collections::{BTreeMap, BTreeSet};

use depthscan::frontend::ast::{ContractUnit, Expr, FunctionDef, LValue, Stmt};

/// State variables read and written by a function, from its source,
/// including modifier bodies.
#[derive(Debug, Default, Clone)]
pub struct AstUsage {
    pub reads: BTreeSet<String>,
    pub writes: BTreeSet<String>,
}

fn expr_reads(unit: &ContractUnit, e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Var(n) => {
            if unit.state_var(n).is_some() {
                out.insert(n.clone());
            }
        }
        Expr::Index { base, key } => {
            out.insert(base.clone());
            expr_reads(unit, key, out);
        }
        Expr::Not(x) => expr_reads(unit, x, out),
        Expr::Binary(_, a, b)
        | Expr::Call {
            target: a,
            value: b,
        } => {
            expr_reads(unit, a, out);
            expr_reads(unit, b, out);
        }
        Expr::Num(_) | Expr::Bool(_) | Expr::MsgSender | Expr::MsgValue => {}
    }
}

fn stmt_usage(unit: &ContractUnit, s: &Stmt, locals: &mut BTreeSet<String>, u: &mut AstUsage) {
    match s {
        Stmt::VarDecl { name, init, .. } => {
            locals.insert(name.clone());
            if let Some(e) = init {
                expr_reads(unit, e, &mut u.reads);
            }
        }
        Stmt::Assign { target, op, value } => {
            expr_reads(unit, value, &mut u.reads);
            let compound = !matches!(op, depthscan::frontend::ast::AssignOp::Set);
            match target {
                LValue::Var(n) => {
                    if !locals.contains(n) && unit.state_var(n).is_some() {
                        u.writes.insert(n.clone());
                        if compound {
                            u.reads.insert(n.clone());
                        }
                    }
                }
                LValue::Index { base, key } => {
                    expr_reads(unit, key, &mut u.reads);
                    u.writes.insert(base.clone());
                    if compound {
                        u.reads.insert(base.clone());
                    }
                }
            }
        }
        Stmt::Require(e) | Stmt::Selfdestruct(e) | Stmt::Expr(e) => {
            expr_reads(unit, e, &mut u.reads)
        }
        Stmt::If {
            cond,
            then_body,
            else_body,
        } => {
            expr_reads(unit, cond, &mut u.reads);
            for s in then_body.iter().chain(else_body) {
                stmt_usage(unit, s, locals, u);
            }
        }
        Stmt::While { cond, body } => {
            expr_reads(unit, cond, &mut u.reads);
            for s in body {
                stmt_usage(unit, s, locals, u);
            }
        }
        Stmt::Revert | Stmt::Return => {}
    }
}

pub fn ast_usage(unit: &ContractUnit, f: &FunctionDef) -> AstUsage {
    let mut u = AstUsage::default();
    let mut locals: BTreeSet<String> = f.params.iter().map(|p| p.name.clone()).collect();
    for m in &f.modifiers {
        let md = unit.modifier(m).expect("declared modifier");
        for s in md.before.iter().chain(&md.after) {
            stmt_usage(unit, s, &mut locals, &mut u);
        }
    }
    for s in &f.body {
        stmt_usage(unit, s, &mut locals, &mut u);
    }
    // Locals shadowing state names never count.
    u.reads.retain(|n| unit.state_var(n).is_some());
    u
}

/// dependents[g] = functions reading something g writes.
pub fn dependents(unit: &ContractUnit) -> BTreeMap<String, BTreeSet<String>> {
    let fs: Vec<&FunctionDef> = unit.public_functions().collect();
    let usage: Vec<AstUsage> = fs.iter().map(|f| ast_usage(unit, f)).collect();
    let mut out = BTreeMap::new();
    for (g, ug) in fs.iter().zip(&usage) {
        let ds = fs
            .iter()
            .zip(&usage)
            .filter(|(_, uf)| !uf.reads.is_disjoint(&ug.writes))
            .map(|(f, _)| f.name.clone())
            .collect();
        out.insert(g.name.clone(), ds);
    }
    out
}

/// Number of continuation states one transaction of a function leaves, for
/// the two shapes the pair family uses: unconditional straight-line writers
/// leave one, functions that never write leave none.
pub fn straight_line_survivors(unit: &ContractUnit, f: &FunctionDef) -> u64 {
    let u = ast_usage(unit, f);
    if u.writes.is_empty() {
        return 0;
    }
    let simple = f.modifiers.is_empty()
        && f.body
            .iter()
            .all(|s| matches!(s, Stmt::Assign { .. } | Stmt::VarDecl { .. }));
    assert!(
        simple,
        "oracle only handles straight-line writers, got {}",
        f.name
    );
    1
}

/// Sequences started per depth under dependency-guided continuation: every
/// function at depth 1, then walks along dependents from surviving states.
pub fn walk_counts(unit: &ContractUnit, depth: u32) -> Vec<u64> {
    let deps = dependents(unit);
    let fs: Vec<&FunctionDef> = unit.public_functions().collect();
    let survivors: BTreeMap<&str, u64> = fs
        .iter()
        .map(|f| (f.name.as_str(), straight_line_survivors(unit, f)))
        .collect();
    // Number of started sequences ending in each function at this depth.
    let mut ending: BTreeMap<&str, u64> = fs.iter().map(|f| (f.name.as_str(), 1)).collect();
    let mut counts = vec![fs.len() as u64];
    for _ in 1..depth {
        let mut next: BTreeMap<&str, u64> = BTreeMap::new();
        for (f, n) in &ending {
            let live = n * survivors[f];
            for g in &deps[*f] {
                *next.entry(g.as_str()).or_insert(0) += live;
            }
        }
        counts.push(next.values().sum());
        ending = next;
    }
    counts
}

/// Same walk without dependency guidance.
pub fn brute_counts(unit: &ContractUnit, depth: u32) -> Vec<u64> {
    let fs: Vec<&FunctionDef> = unit.public_functions().collect();
    let k = fs.len() as u64;
    let live: u64 = fs.iter().map(|f| straight_line_survivors(unit, f)).sum();
    let mut counts = vec![k];
    let mut surviving = live;
    for _ in 1..depth {
        counts.push(surviving * k);
        surviving *= live;
    }
    counts
}
