//! Random 8-bit constraint conjunctions over three symbols, with an
//! exhaustive evaluator that shares no code with the library.

use rand::Rng;

use depthscan::frontend::ir::BinOp;
use depthscan::symcore::expr::{SymExpr, SymOrigin, Symbol};
use depthscan::symcore::Constraint;

#[derive(Debug, Clone, Copy)]
pub enum WOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone)]
pub enum Term {
    Sym(u8),
    Const(u8),
    Bin(WOp, Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, Copy)]
pub enum Cmp {
    Lt,
    Gt,
    Eq,
    Ne,
}

#[derive(Debug, Clone)]
pub enum Formula {
    Atom(Cmp, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

pub const WIDTH: u32 = 8;

fn gen_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.4) {
        return if rng.gen_bool(0.6) {
            Term::Sym(rng.gen_range(0..3))
        } else {
            // Small constants make tight, often unsatisfiable, bounds likely.
            Term::Const(if rng.gen_bool(0.5) {
                rng.gen_range(0..8)
            } else {
                rng.gen()
            })
        };
    }
    let op = [WOp::Add, WOp::Sub, WOp::Mul, WOp::Div][rng.gen_range(0..4)];
    Term::Bin(
        op,
        Box::new(gen_term(rng, depth - 1)),
        Box::new(gen_term(rng, depth - 1)),
    )
}

fn gen_formula(rng: &mut impl Rng, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.7) {
        let cmp = [Cmp::Lt, Cmp::Gt, Cmp::Eq, Cmp::Ne][rng.gen_range(0..4)];
        return Formula::Atom(cmp, gen_term(rng, 2), gen_term(rng, 2));
    }
    match rng.gen_range(0..3) {
        0 => Formula::Not(Box::new(gen_formula(rng, depth - 1))),
        1 => Formula::And(
            Box::new(gen_formula(rng, depth - 1)),
            Box::new(gen_formula(rng, depth - 1)),
        ),
        _ => Formula::Or(
            Box::new(gen_formula(rng, depth - 1)),
            Box::new(gen_formula(rng, depth - 1)),
        ),
    }
}

/// One to four conjuncts.
pub fn gen_conjunction(rng: &mut impl Rng) -> Vec<Formula> {
    let n = rng.gen_range(1..=4);
    (0..n).map(|_| gen_formula(rng, 2)).collect()
}

pub fn symbol(i: u8) -> Symbol {
    Symbol::word(
        SymOrigin::Calldata {
            tx: 1,
            arg: i as u32,
        },
        WIDTH,
    )
}

pub fn term_expr(t: &Term) -> SymExpr {
    match t {
        Term::Sym(i) => SymExpr::sym(symbol(*i)),
        Term::Const(c) => SymExpr::word(*c as u64, WIDTH),
        Term::Bin(op, a, b) => {
            let op = match op {
                WOp::Add => BinOp::Add,
                WOp::Sub => BinOp::Sub,
                WOp::Mul => BinOp::Mul,
                WOp::Div => BinOp::Div,
            };
            SymExpr::bin(op, term_expr(a), term_expr(b))
        }
    }
}

pub fn formula_expr(f: &Formula) -> SymExpr {
    match f {
        Formula::Atom(c, a, b) => {
            let op = match c {
                Cmp::Lt => BinOp::Lt,
                Cmp::Gt => BinOp::Gt,
                Cmp::Eq => BinOp::Eq,
                Cmp::Ne => BinOp::Ne,
            };
            SymExpr::bin(op, term_expr(a), term_expr(b))
        }
        Formula::Not(x) => SymExpr::not(formula_expr(x)),
        Formula::And(a, b) => SymExpr::and(formula_expr(a), formula_expr(b)),
        Formula::Or(a, b) => SymExpr::or(formula_expr(a), formula_expr(b)),
    }
}

pub fn constraints(fs: &[Formula]) -> Vec<Constraint> {
    fs.iter()
        .map(|f| Constraint::new(formula_expr(f)))
        .collect()
}

const PLANE: usize = 1 << 16;

/// Values of `t` for every (s0, s1) with s2 fixed; index = s0 * 256 + s1.
fn term_plane(t: &Term, s2: u8) -> Vec<u8> {
    match t {
        Term::Sym(0) => (0..PLANE).map(|i| (i >> 8) as u8).collect(),
        Term::Sym(1) => (0..PLANE).map(|i| i as u8).collect(),
        Term::Sym(_) => vec![s2; PLANE],
        Term::Const(c) => vec![*c; PLANE],
        Term::Bin(op, a, b) => {
            let (x, y) = (term_plane(a, s2), term_plane(b, s2));
            x.iter()
                .zip(&y)
                .map(|(&x, &y)| match op {
                    WOp::Add => x.wrapping_add(y),
                    WOp::Sub => x.wrapping_sub(y),
                    WOp::Mul => x.wrapping_mul(y),
                    WOp::Div => x.checked_div(y).unwrap_or(0),
                })
                .collect()
        }
    }
}

fn formula_plane(f: &Formula, s2: u8) -> Vec<bool> {
    match f {
        Formula::Atom(c, a, b) => {
            let (x, y) = (term_plane(a, s2), term_plane(b, s2));
            x.iter()
                .zip(&y)
                .map(|(x, y)| match c {
                    Cmp::Lt => x < y,
                    Cmp::Gt => x > y,
                    Cmp::Eq => x == y,
                    Cmp::Ne => x != y,
                })
                .collect()
        }
        Formula::Not(x) => formula_plane(x, s2).into_iter().map(|v| !v).collect(),
        Formula::And(a, b) => formula_plane(a, s2)
            .into_iter()
            .zip(formula_plane(b, s2))
            .map(|(x, y)| x && y)
            .collect(),
        Formula::Or(a, b) => formula_plane(a, s2)
            .into_iter()
            .zip(formula_plane(b, s2))
            .map(|(x, y)| x || y)
            .collect(),
    }
}

fn mentions_s2(f: &Formula) -> bool {
    fn term(t: &Term) -> bool {
        match t {
            Term::Sym(i) => *i == 2,
            Term::Const(_) => false,
            Term::Bin(_, a, b) => term(a) || term(b),
        }
    }
    match f {
        Formula::Atom(_, a, b) => term(a) || term(b),
        Formula::Not(x) => mentions_s2(x),
        Formula::And(a, b) | Formula::Or(a, b) => mentions_s2(a) || mentions_s2(b),
    }
}

/// A satisfying (s0, s1, s2), searching all 2^24 assignments.
pub fn exhaustive(fs: &[Formula]) -> Option<[u8; 3]> {
    let last = if fs.iter().any(mentions_s2) { 255 } else { 0 };
    for s2 in 0..=last {
        let mut acc = vec![true; PLANE];
        for f in fs {
            for (a, v) in acc.iter_mut().zip(formula_plane(f, s2)) {
                *a &= v;
            }
        }
        if let Some(i) = acc.iter().position(|&v| v) {
            return Some([(i >> 8) as u8, i as u8, s2]);
        }
    }
    None
}

pub fn eval_term(t: &Term, s: [u8; 3]) -> u8 {
    match t {
        Term::Sym(i) => s[*i as usize],
        Term::Const(c) => *c,
        Term::Bin(op, a, b) => {
            let (x, y) = (eval_term(a, s), eval_term(b, s));
            match op {
                WOp::Add => x.wrapping_add(y),
                WOp::Sub => x.wrapping_sub(y),
                WOp::Mul => x.wrapping_mul(y),
                WOp::Div => x.checked_div(y).unwrap_or(0),
            }
        }
    }
}

pub fn eval_formula(f: &Formula, s: [u8; 3]) -> bool {
    match f {
        Formula::Atom(c, a, b) => {
            let (x, y) = (eval_term(a, s), eval_term(b, s));
            match c {
                Cmp::Lt => x < y,
                Cmp::Gt => x > y,
                Cmp::Eq => x == y,
                Cmp::Ne => x != y,
            }
        }
        Formula::Not(x) => !eval_formula(x, s),
        Formula::And(a, b) => eval_formula(a, s) && eval_formula(b, s),
        Formula::Or(a, b) => eval_formula(a, s) || eval_formula(b, s),
    }
}
