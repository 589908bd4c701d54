//! Tseitin translation of word-level constraints into CNF.
//!
//! Gates are structurally hashed, so shared or repeated subterms produce one
//! set of clauses. Bits are little-endian.

use std::collections::{BTreeMap, HashMap};

use super::sat::{Lit, SatSolver};
use super::SolverError;
use crate::symcore::expr::{BinOp, Node, Sort, SymExpr, Symbol};

#[derive(Debug, Clone)]
enum Bits {
    Bool(Lit),
    Word(Vec<Lit>),
}

pub(crate) struct Blaster {
    pub sat: SatSolver,
    t: Lit,
    and_cache: HashMap<(Lit, Lit), Lit>,
    xor_cache: HashMap<(Lit, Lit), Lit>,
    mux_cache: HashMap<(Lit, Lit, Lit), Lit>,
    memo: HashMap<SymExpr, Bits>,
    pub sym_bits: BTreeMap<Symbol, Vec<Lit>>,
}

impl Blaster {
    pub fn new() -> Blaster {
        let mut sat = SatSolver::new();
        let t = Lit::new(sat.new_var(), false);
        sat.add_clause(&[t]);
        Blaster {
            sat,
            t,
            and_cache: HashMap::new(),
            xor_cache: HashMap::new(),
            mux_cache: HashMap::new(),
            memo: HashMap::new(),
            sym_bits: BTreeMap::new(),
        }
    }

    fn f(&self) -> Lit {
        !self.t
    }

    fn fresh(&mut self) -> Lit {
        Lit::new(self.sat.new_var(), false)
    }

    fn konst(&self, b: bool) -> Lit {
        if b {
            self.t
        } else {
            self.f()
        }
    }

    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let f = self.f();
        if a == f || b == f || a == !b {
            return f;
        }
        if a == self.t || a == b {
            return b;
        }
        if b == self.t {
            return a;
        }
        let k = (a.min(b), a.max(b));
        if let Some(&g) = self.and_cache.get(&k) {
            return g;
        }
        let g = self.fresh();
        self.sat.add_clause(&[!g, a]);
        self.sat.add_clause(&[!g, b]);
        self.sat.add_clause(&[g, !a, !b]);
        self.and_cache.insert(k, g);
        g
    }

    fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.f() {
            return b;
        }
        if b == self.f() {
            return a;
        }
        if a == self.t {
            return !b;
        }
        if b == self.t {
            return !a;
        }
        if a == b {
            return self.f();
        }
        if a == !b {
            return self.t;
        }
        // Normalize polarity: xor(!a, b) = !xor(a, b).
        let flip = a.is_negated() ^ b.is_negated();
        let pa = Lit::new(a.var(), false);
        let pb = Lit::new(b.var(), false);
        let k = (pa.min(pb), pa.max(pb));
        let g = match self.xor_cache.get(&k) {
            Some(&g) => g,
            None => {
                let g = self.fresh();
                let (x, y) = k;
                self.sat.add_clause(&[!g, x, y]);
                self.sat.add_clause(&[!g, !x, !y]);
                self.sat.add_clause(&[g, !x, y]);
                self.sat.add_clause(&[g, x, !y]);
                self.xor_cache.insert(k, g);
                g
            }
        };
        if flip {
            !g
        } else {
            g
        }
    }

    fn mux(&mut self, c: Lit, t: Lit, e: Lit) -> Lit {
        if c == self.t || t == e {
            return t;
        }
        if c == self.f() {
            return e;
        }
        if t == self.t && e == self.f() {
            return c;
        }
        if t == self.f() && e == self.t {
            return !c;
        }
        if t == self.f() {
            return self.and(!c, e);
        }
        if e == self.f() {
            return self.and(c, t);
        }
        if t == self.t {
            return self.or(c, e);
        }
        if e == self.t {
            return self.or(!c, t);
        }
        let k = (c, t, e);
        if let Some(&g) = self.mux_cache.get(&k) {
            return g;
        }
        let g = self.fresh();
        self.sat.add_clause(&[!c, !t, g]);
        self.sat.add_clause(&[!c, t, !g]);
        self.sat.add_clause(&[c, !e, g]);
        self.sat.add_clause(&[c, e, !g]);
        self.sat.add_clause(&[!t, !e, g]);
        self.sat.add_clause(&[t, e, !g]);
        self.mux_cache.insert(k, g);
        g
    }

    /// Ripple-carry adder; returns the sum and the carry out.
    fn adder(&mut self, a: &[Lit], b: &[Lit], mut carry: Lit) -> (Vec<Lit>, Lit) {
        let mut sum = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let p = self.xor(x, y);
            sum.push(self.xor(p, carry));
            let g = self.and(x, y);
            let pc = self.and(p, carry);
            carry = self.or(g, pc);
        }
        (sum, carry)
    }

    fn add(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let f = self.f();
        self.adder(a, b, f).0
    }

    fn sub(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let nb: Vec<Lit> = b.iter().map(|&l| !l).collect();
        let t = self.t;
        self.adder(a, &nb, t).0
    }

    /// Unsigned a < b: the subtraction a - b borrows.
    fn ult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let nb: Vec<Lit> = b.iter().map(|&l| !l).collect();
        let t = self.t;
        !self.adder(a, &nb, t).1
    }

    fn eq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut acc = self.t;
        for (&x, &y) in a.iter().zip(b) {
            let d = self.xor(x, y);
            acc = self.and(acc, !d);
        }
        acc
    }

    fn mul(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc = vec![self.f(); w];
        for i in 0..w {
            if b[i] == self.f() {
                continue;
            }
            let partial: Vec<Lit> = (i..w).map(|j| self.and(b[i], a[j - i])).collect();
            let high = self.add(&acc[i..], &partial);
            acc[i..].copy_from_slice(&high);
        }
        acc
    }

    /// Restoring division; a zero divisor yields 0.
    fn udiv(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let f = self.f();
        let t = self.t;
        let mut b_ext = b.to_vec();
        b_ext.push(f);
        let nb: Vec<Lit> = b_ext.iter().map(|&l| !l).collect();
        let mut rem = vec![f; w];
        let mut q = vec![f; w];
        for i in (0..w).rev() {
            let mut shifted = Vec::with_capacity(w + 1);
            shifted.push(a[i]);
            shifted.extend_from_slice(&rem);
            let (diff, geq) = self.adder(&shifted, &nb, t);
            q[i] = geq;
            rem = (0..w).map(|j| self.mux(geq, diff[j], shifted[j])).collect();
        }
        let zeros = vec![f; w];
        let b_zero = self.eq(b, &zeros);
        q.into_iter().map(|l| self.and(!b_zero, l)).collect()
    }

    fn bool_of(&self, e: &SymExpr) -> Lit {
        match &self.memo[e] {
            Bits::Bool(l) => *l,
            Bits::Word(_) => unreachable!("checked by well-formedness"),
        }
    }

    fn word_of(&self, e: &SymExpr) -> Vec<Lit> {
        match &self.memo[e] {
            Bits::Word(v) => v.clone(),
            Bits::Bool(_) => unreachable!("checked by well-formedness"),
        }
    }

    /// Allocates input bits for a symbol. Allocating symbols in name order
    /// before blasting fixes the variable numbering.
    pub fn declare(&mut self, s: Symbol) {
        if self.sym_bits.contains_key(&s) {
            return;
        }
        let n = match s.sort {
            Sort::Bool => 1,
            Sort::Word(w) => w as usize,
            Sort::Array(_) => 0,
        };
        let bits = (0..n).map(|_| self.fresh()).collect();
        self.sym_bits.insert(s, bits);
    }

    fn blast(&mut self, root: &SymExpr) -> Result<(), SolverError> {
        for e in root.postorder() {
            if self.memo.contains_key(&e) {
                continue;
            }
            let bits = match e.node() {
                Node::Const { value, width } => Bits::Word(
                    (0..*width)
                        .map(|i| self.konst(value >> i & 1 == 1))
                        .collect(),
                ),
                Node::Bool(b) => Bits::Bool(self.konst(*b)),
                Node::Sym(s) => {
                    self.declare(*s);
                    let v = self.sym_bits[s].clone();
                    match s.sort {
                        Sort::Bool => Bits::Bool(v[0]),
                        Sort::Word(_) => Bits::Word(v),
                        Sort::Array(_) => return Err(array_term(&e)),
                    }
                }
                Node::Not(a) => Bits::Bool(!self.bool_of(a)),
                Node::Ite(c, t, f) => {
                    let c = self.bool_of(c);
                    match t.sort() {
                        Sort::Bool => {
                            let (t, f) = (self.bool_of(t), self.bool_of(f));
                            Bits::Bool(self.mux(c, t, f))
                        }
                        _ => {
                            let (t, f) = (self.word_of(t), self.word_of(f));
                            Bits::Word(t.iter().zip(&f).map(|(&x, &y)| self.mux(c, x, y)).collect())
                        }
                    }
                }
                Node::Bin(op, a, b) => {
                    if a.sort() == Sort::Bool {
                        let (x, y) = (self.bool_of(a), self.bool_of(b));
                        Bits::Bool(match op {
                            BinOp::And => self.and(x, y),
                            BinOp::Or => self.or(x, y),
                            BinOp::Eq => !self.xor(x, y),
                            BinOp::Ne => self.xor(x, y),
                            _ => unreachable!("checked by well-formedness"),
                        })
                    } else {
                        let (x, y) = (self.word_of(a), self.word_of(b));
                        match op {
                            BinOp::Add => Bits::Word(self.add(&x, &y)),
                            BinOp::Sub => Bits::Word(self.sub(&x, &y)),
                            BinOp::Mul => Bits::Word(self.mul(&x, &y)),
                            BinOp::Div => Bits::Word(self.udiv(&x, &y)),
                            BinOp::Lt => Bits::Bool(self.ult(&x, &y)),
                            BinOp::Gt => Bits::Bool(self.ult(&y, &x)),
                            BinOp::Eq => Bits::Bool(self.eq(&x, &y)),
                            BinOp::Ne => Bits::Bool(!self.eq(&x, &y)),
                            BinOp::And | BinOp::Or => unreachable!("checked by well-formedness"),
                        }
                    }
                }
                Node::Select(..) | Node::Store(..) | Node::ZeroArray(_) => {
                    return Err(array_term(&e))
                }
            };
            self.memo.insert(e, bits);
        }
        Ok(())
    }

    /// Asserts a boolean expression.
    pub fn assert(&mut self, e: &SymExpr) -> Result<(), SolverError> {
        self.blast(e)?;
        let l = self.bool_of(e);
        self.sat.add_clause(&[l]);
        Ok(())
    }
}

fn array_term(e: &SymExpr) -> SolverError {
    SolverError::MalformedConstraint(format!("unsupported array term `{e}`"))
}

/// Reads a symbol's value from a SAT assignment.
pub(crate) fn decode(bits: &[Lit], assignment: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0u64, |acc, (i, l)| {
        let v = assignment[l.var() as usize] ^ l.is_negated();
        acc | ((v as u64) << i)
    })
}
