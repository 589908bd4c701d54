//! Symbolic expressions over fixed-width words, booleans and word arrays.
//!
//! Every constructor simplifies on the way in, so an expression built through
//! this API is already in normal form and [`simplify`] is idempotent. Nodes are
//! reference counted and carry a cached structural hash; expressions are
//! usually DAGs, and every traversal here memoizes by node identity.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::Serialize;

pub use crate::frontend::ir::BinOp;

/// Bits in a word. Valid range is 1..=64.
pub type Width = u32;

pub const DEFAULT_WIDTH: Width = 64;

pub fn mask(width: Width) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sort {
    Bool,
    Word(Width),
    Array(Width),
}

/// Where a free symbol comes from. Transactions are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymOrigin {
    Calldata {
        tx: u32,
        arg: u32,
    },
    Caller {
        tx: u32,
    },
    CallValue {
        tx: u32,
    },
    /// Success flag of the external call with this trace ordinal.
    ExtcallRet {
        tx: u32,
        ordinal: u32,
    },
    Attacker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub origin: SymOrigin,
    pub sort: Sort,
}

impl Symbol {
    pub fn word(origin: SymOrigin, width: Width) -> Symbol {
        Symbol {
            origin,
            sort: Sort::Word(width),
        }
    }

    pub fn boolean(origin: SymOrigin) -> Symbol {
        Symbol {
            origin,
            sort: Sort::Bool,
        }
    }

    pub fn name(&self) -> String {
        match self.origin {
            SymOrigin::Calldata { tx, arg } => format!("calldata_{tx}_{arg}"),
            SymOrigin::Caller { tx } => format!("caller_{tx}"),
            SymOrigin::CallValue { tx } => format!("callvalue_{tx}"),
            SymOrigin::ExtcallRet { tx, ordinal } => format!("extret_{tx}_{ordinal}"),
            SymOrigin::Attacker => "attacker".to_string(),
        }
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name().cmp(&other.name())
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const { value: u64, width: Width },
    Bool(bool),
    Sym(Symbol),
    Bin(BinOp, SymExpr, SymExpr),
    Not(SymExpr),
    Ite(SymExpr, SymExpr, SymExpr),
    Select(SymExpr, SymExpr),
    Store(SymExpr, SymExpr, SymExpr),
    ZeroArray(Width),
}

#[derive(Debug)]
struct Inner {
    hash: u64,
    node: Node,
}

#[derive(Clone)]
pub struct SymExpr(Arc<Inner>);

/// Structural equality. Pairs already compared are not revisited, so two
/// equal DAGs built separately compare in time linear in their size.
impl PartialEq for SymExpr {
    fn eq(&self, other: &Self) -> bool {
        let mut visited: HashSet<(NodeKey, NodeKey)> = HashSet::new();
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if Arc::ptr_eq(&a.0, &b.0) {
                continue;
            }
            if a.0.hash != b.0.hash || !shallow_eq(a.node(), b.node()) {
                return false;
            }
            if visited.insert((key(a), key(b))) {
                stack.extend(a.children().into_iter().zip(b.children()));
            }
        }
        true
    }
}

/// Same variant and payload, ignoring children.
fn shallow_eq(a: &Node, b: &Node) -> bool {
    match (a, b) {
        (
            Node::Const {
                value: v1,
                width: w1,
            },
            Node::Const {
                value: v2,
                width: w2,
            },
        ) => v1 == v2 && w1 == w2,
        (Node::Bool(x), Node::Bool(y)) => x == y,
        (Node::Sym(x), Node::Sym(y)) => x == y,
        (Node::Bin(o1, ..), Node::Bin(o2, ..)) => o1 == o2,
        (Node::ZeroArray(w1), Node::ZeroArray(w2)) => w1 == w2,
        (Node::Not(_), Node::Not(_))
        | (Node::Ite(..), Node::Ite(..))
        | (Node::Select(..), Node::Select(..))
        | (Node::Store(..), Node::Store(..)) => true,
        _ => false,
    }
}

impl Eq for SymExpr {}

impl Hash for SymExpr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Identity of a node, for memo tables over DAGs.
type NodeKey = *const ();

fn key(e: &SymExpr) -> NodeKey {
    Arc::as_ptr(&e.0) as *const ()
}

/// A concrete value of any sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Word(u64),
    /// Explicit entries; every other key maps to 0.
    Array(BTreeMap<u64, u64>),
}

impl Value {
    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Word(w) => *w != 0,
            Value::Array(_) => panic!("array value used as a boolean"),
        }
    }

    pub fn as_word(&self) -> u64 {
        match self {
            Value::Word(w) => *w,
            Value::Bool(b) => *b as u64,
            Value::Array(_) => panic!("array value used as a word"),
        }
    }
}

/// Concrete semantics of a word or boolean binary operator. Arithmetic wraps
/// modulo 2^width and division by zero yields 0.
pub fn apply_binop(op: BinOp, a: &Value, b: &Value, width: Width) -> Value {
    let m = mask(width);
    match op {
        BinOp::Add => Value::Word(a.as_word().wrapping_add(b.as_word()) & m),
        BinOp::Sub => Value::Word(a.as_word().wrapping_sub(b.as_word()) & m),
        BinOp::Mul => Value::Word(a.as_word().wrapping_mul(b.as_word()) & m),
        BinOp::Div => Value::Word(a.as_word().checked_div(b.as_word()).unwrap_or(0)),
        BinOp::Lt => Value::Bool(a.as_word() < b.as_word()),
        BinOp::Gt => Value::Bool(a.as_word() > b.as_word()),
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::And => Value::Bool(a.as_bool() && b.as_bool()),
        BinOp::Or => Value::Bool(a.as_bool() || b.as_bool()),
    }
}

fn is_commutative(op: BinOp) -> bool {
    matches!(
        op,
        BinOp::Add | BinOp::Mul | BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or
    )
}

impl SymExpr {
    fn mk(node: Node) -> SymExpr {
        let mut h = DefaultHasher::new();
        node.hash(&mut h);
        SymExpr(Arc::new(Inner {
            hash: h.finish(),
            node,
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn word(value: u64, width: Width) -> SymExpr {
        SymExpr::mk(Node::Const {
            value: value & mask(width),
            width,
        })
    }

    pub fn boolean(b: bool) -> SymExpr {
        SymExpr::mk(Node::Bool(b))
    }

    pub fn sym(symbol: Symbol) -> SymExpr {
        SymExpr::mk(Node::Sym(symbol))
    }

    pub fn zero_array(width: Width) -> SymExpr {
        SymExpr::mk(Node::ZeroArray(width))
    }

    pub fn sort(&self) -> Sort {
        match self.node() {
            Node::Const { width, .. } => Sort::Word(*width),
            Node::Bool(_) | Node::Not(_) => Sort::Bool,
            Node::Sym(s) => s.sort,
            Node::Bin(op, a, _) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => a.sort(),
                _ => Sort::Bool,
            },
            Node::Ite(_, t, _) => t.sort(),
            Node::Select(a, _) => match a.sort() {
                Sort::Array(w) | Sort::Word(w) => Sort::Word(w),
                Sort::Bool => Sort::Bool,
            },
            Node::Store(a, _, _) => a.sort(),
            Node::ZeroArray(w) => Sort::Array(*w),
        }
    }

    pub fn as_const(&self) -> Option<u64> {
        match self.node() {
            Node::Const { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.node() {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn is_const_word(&self, v: u64) -> bool {
        self.as_const() == Some(v)
    }

    fn is_max_word(&self) -> bool {
        match self.node() {
            Node::Const { value, width } => *value == mask(*width),
            _ => false,
        }
    }

    fn is_negation_of(&self, other: &SymExpr) -> bool {
        matches!(self.node(), Node::Not(x) if x == other)
            || matches!(other.node(), Node::Not(x) if x == self)
    }

    pub fn bin(op: BinOp, a: SymExpr, b: SymExpr) -> SymExpr {
        let sa = a.sort();
        let sb = b.sort();
        let raw = |a, b| SymExpr::mk(Node::Bin(op, a, b));
        if sa != sb || matches!(sa, Sort::Array(_)) {
            return raw(a, b);
        }
        let word_op = matches!(
            op,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Lt | BinOp::Gt
        );
        let bool_op = matches!(op, BinOp::And | BinOp::Or);
        if (word_op && sa == Sort::Bool) || (bool_op && sa != Sort::Bool) {
            return raw(a, b);
        }
        if op == BinOp::Ne {
            return SymExpr::not(SymExpr::bin(BinOp::Eq, a, b));
        }
        if let Sort::Word(width) = sa {
            if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
                return match apply_binop(op, &Value::Word(x), &Value::Word(y), width) {
                    Value::Word(v) => SymExpr::word(v, width),
                    Value::Bool(v) => SymExpr::boolean(v),
                    Value::Array(_) => unreachable!(),
                };
            }
        }
        if let (Some(x), Some(y)) = (a.as_bool(), b.as_bool()) {
            let v = apply_binop(op, &Value::Bool(x), &Value::Bool(y), 1);
            return SymExpr::boolean(v.as_bool());
        }
        // Constants go on the right of commutative operators.
        if is_commutative(op)
            && (a.as_const().is_some() || a.as_bool().is_some())
            && b.as_const().is_none()
            && b.as_bool().is_none()
        {
            return SymExpr::bin(op, b, a);
        }
        let width = match sa {
            Sort::Word(w) => w,
            _ => 1,
        };
        match op {
            BinOp::Add if b.is_const_word(0) => a,
            BinOp::Sub if b.is_const_word(0) => a,
            BinOp::Sub if a == b => SymExpr::word(0, width),
            BinOp::Mul if b.is_const_word(0) => b,
            BinOp::Mul if b.is_const_word(1) => a,
            BinOp::Div if b.is_const_word(0) || a.is_const_word(0) => SymExpr::word(0, width),
            BinOp::Div if b.is_const_word(1) => a,
            BinOp::Lt if b.is_const_word(0) || a.is_max_word() || a == b => SymExpr::boolean(false),
            BinOp::Gt if a.is_const_word(0) || b.is_max_word() || a == b => SymExpr::boolean(false),
            BinOp::Eq => SymExpr::eq_rules(a, b),
            BinOp::And => match b.as_bool() {
                Some(false) => b,
                Some(true) => a,
                None if a == b => a,
                None if a.is_negation_of(&b) => SymExpr::boolean(false),
                None => raw(a, b),
            },
            BinOp::Or => match b.as_bool() {
                Some(true) => b,
                Some(false) => a,
                None if a == b => a,
                None if a.is_negation_of(&b) => SymExpr::boolean(true),
                None => raw(a, b),
            },
            _ => raw(a, b),
        }
    }

    fn eq_rules(a: SymExpr, b: SymExpr) -> SymExpr {
        if a == b {
            return SymExpr::boolean(true);
        }
        match b.as_bool() {
            Some(true) => return a,
            Some(false) => return SymExpr::not(a),
            None => {}
        }
        // ite(c, k1, k2) == k3 with all constants collapses to c, !c or a constant.
        if let (Node::Ite(c, t, e), Some(k)) = (a.node(), b.as_const()) {
            if let (Some(kt), Some(ke)) = (t.as_const(), e.as_const()) {
                return match (kt == k, ke == k) {
                    (true, true) => SymExpr::boolean(true),
                    (false, false) => SymExpr::boolean(false),
                    (true, false) => c.clone(),
                    (false, true) => SymExpr::not(c.clone()),
                };
            }
        }
        SymExpr::mk(Node::Bin(BinOp::Eq, a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: SymExpr) -> SymExpr {
        match a.node() {
            Node::Bool(b) => SymExpr::boolean(!b),
            Node::Not(x) => x.clone(),
            _ => SymExpr::mk(Node::Not(a)),
        }
    }

    pub fn ite(c: SymExpr, t: SymExpr, e: SymExpr) -> SymExpr {
        if c.sort() != Sort::Bool || t.sort() != e.sort() {
            return SymExpr::mk(Node::Ite(c, t, e));
        }
        if let Some(b) = c.as_bool() {
            return if b { t } else { e };
        }
        if t == e {
            return t;
        }
        if let Node::Not(inner) = c.node() {
            return SymExpr::ite(inner.clone(), e, t);
        }
        match (t.as_bool(), e.as_bool()) {
            (Some(true), Some(false)) => c,
            (Some(false), Some(true)) => SymExpr::not(c),
            _ => SymExpr::mk(Node::Ite(c, t, e)),
        }
    }

    /// Reads through stores: a matching key returns the stored value, any
    /// other store becomes an `ite` on key equality, and the zero array
    /// yields 0. Selects only survive over array-sorted symbols.
    pub fn select(array: SymExpr, k: SymExpr) -> SymExpr {
        match array.node() {
            Node::ZeroArray(w) if k.sort() == Sort::Word(*w) => SymExpr::word(0, *w),
            Node::Store(inner, k2, v) if k.sort() == k2.sort() => {
                if *k2 == k {
                    v.clone()
                } else {
                    let rest = SymExpr::select(inner.clone(), k.clone());
                    SymExpr::ite(SymExpr::bin(BinOp::Eq, k2.clone(), k), v.clone(), rest)
                }
            }
            Node::Ite(c, a1, a2) => SymExpr::ite(
                c.clone(),
                SymExpr::select(a1.clone(), k.clone()),
                SymExpr::select(a2.clone(), k),
            ),
            _ => SymExpr::mk(Node::Select(array, k)),
        }
    }

    pub fn store(array: SymExpr, k: SymExpr, v: SymExpr) -> SymExpr {
        if let Node::Store(inner, k2, _) = array.node() {
            if *k2 == k {
                return SymExpr::store(inner.clone(), k, v);
            }
        }
        SymExpr::mk(Node::Store(array, k, v))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Add, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Sub, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Mul, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Div, a, b)
    }

    pub fn ult(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Lt, a, b)
    }

    pub fn eq(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Eq, a, b)
    }

    pub fn ne(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Ne, a, b)
    }

    pub fn and(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::And, a, b)
    }

    pub fn or(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(BinOp::Or, a, b)
    }

    /// Conjunction of any number of booleans; `true` when empty.
    pub fn all(items: impl IntoIterator<Item = SymExpr>) -> SymExpr {
        items.into_iter().fold(SymExpr::boolean(true), SymExpr::and)
    }

    /// Direct children, in constructor argument order.
    pub fn children(&self) -> Vec<&SymExpr> {
        match self.node() {
            Node::Const { .. } | Node::Bool(_) | Node::Sym(_) | Node::ZeroArray(_) => Vec::new(),
            Node::Not(a) => vec![a],
            Node::Bin(_, a, b) | Node::Select(a, b) => vec![a, b],
            Node::Ite(a, b, c) | Node::Store(a, b, c) => vec![a, b, c],
        }
    }

    /// Rebuilds this node through the simplifying constructors with new
    /// children.
    fn rebuild(&self, kids: &[SymExpr]) -> SymExpr {
        match self.node() {
            Node::Const { .. } | Node::Bool(_) | Node::Sym(_) | Node::ZeroArray(_) => self.clone(),
            Node::Not(_) => SymExpr::not(kids[0].clone()),
            Node::Bin(op, _, _) => SymExpr::bin(*op, kids[0].clone(), kids[1].clone()),
            Node::Select(_, _) => SymExpr::select(kids[0].clone(), kids[1].clone()),
            Node::Ite(_, _, _) => SymExpr::ite(kids[0].clone(), kids[1].clone(), kids[2].clone()),
            Node::Store(_, _, _) => {
                SymExpr::store(kids[0].clone(), kids[1].clone(), kids[2].clone())
            }
        }
    }

    /// Bottom-up rewrite; `leaf` may replace any node before its children are
    /// visited. Shared subterms are rewritten once.
    pub fn transform(&self, leaf: &mut dyn FnMut(&SymExpr) -> Option<SymExpr>) -> SymExpr {
        fn go(
            e: &SymExpr,
            leaf: &mut dyn FnMut(&SymExpr) -> Option<SymExpr>,
            memo: &mut HashMap<NodeKey, SymExpr>,
        ) -> SymExpr {
            if let Some(r) = memo.get(&key(e)) {
                return r.clone();
            }
            let out = match leaf(e) {
                Some(r) => r,
                None => {
                    let kids: Vec<SymExpr> = e
                        .children()
                        .into_iter()
                        .map(|c| go(c, leaf, memo))
                        .collect();
                    e.rebuild(&kids)
                }
            };
            memo.insert(key(e), out.clone());
            out
        }
        go(self, leaf, &mut HashMap::new())
    }

    /// Replaces symbols by expressions of the same sort.
    pub fn substitute(&self, map: &HashMap<Symbol, SymExpr>) -> SymExpr {
        if map.is_empty() {
            return self.clone();
        }
        self.transform(&mut |e| match e.node() {
            Node::Sym(s) => Some(map.get(s).cloned().unwrap_or_else(|| e.clone())),
            _ => None,
        })
    }

    /// Every node once, children before parents.
    pub fn postorder(&self) -> Vec<SymExpr> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![(self.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if expanded {
                out.push(e);
                continue;
            }
            if !seen.insert(key(&e)) {
                continue;
            }
            stack.push((e.clone(), true));
            for c in e.children().into_iter().rev() {
                if !seen.contains(&key(c)) {
                    stack.push((c.clone(), false));
                }
            }
        }
        out
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.postorder()
            .into_iter()
            .filter_map(|e| match e.node() {
                Node::Sym(s) => Some(*s),
                _ => None,
            })
            .collect()
    }

    /// Node count of the DAG.
    pub fn dag_size(&self) -> usize {
        self.postorder().len()
    }

    /// Evaluates under `env`, which supplies a value for every symbol
    /// (booleans as 0 or 1).
    pub fn eval(&self, env: &dyn Fn(&Symbol) -> u64) -> Value {
        let mut memo: HashMap<NodeKey, Value> = HashMap::new();
        for e in self.postorder() {
            let get = |c: &SymExpr, memo: &HashMap<NodeKey, Value>| memo[&key(c)].clone();
            let v = match e.node() {
                Node::Const { value, .. } => Value::Word(*value),
                Node::Bool(b) => Value::Bool(*b),
                Node::Sym(s) => match s.sort {
                    Sort::Bool => Value::Bool(env(s) != 0),
                    Sort::Word(w) => Value::Word(env(s) & mask(w)),
                    Sort::Array(_) => Value::Array(BTreeMap::new()),
                },
                Node::Bin(op, a, b) => {
                    let width = match a.sort() {
                        Sort::Word(w) => w,
                        _ => 1,
                    };
                    apply_binop(*op, &get(a, &memo), &get(b, &memo), width)
                }
                Node::Not(a) => Value::Bool(!get(a, &memo).as_bool()),
                Node::Ite(c, t, f) => {
                    if get(c, &memo).as_bool() {
                        get(t, &memo)
                    } else {
                        get(f, &memo)
                    }
                }
                Node::Select(a, k) => match get(a, &memo) {
                    Value::Array(m) => Value::Word(*m.get(&get(k, &memo).as_word()).unwrap_or(&0)),
                    other => panic!("select from non-array {other:?}"),
                },
                Node::Store(a, k, v) => match get(a, &memo) {
                    Value::Array(mut m) => {
                        m.insert(get(k, &memo).as_word(), get(v, &memo).as_word());
                        Value::Array(m)
                    }
                    other => panic!("store into non-array {other:?}"),
                },
                Node::ZeroArray(_) => Value::Array(BTreeMap::new()),
            };
            memo.insert(key(&e), v);
        }
        memo.remove(&key(self)).expect("root evaluated")
    }
}

/// Rebuilds `e` through the simplifying constructors. Expressions built with
/// this module's API are already simplified, so this is the identity on them.
pub fn simplify(e: &SymExpr) -> SymExpr {
    e.transform(&mut |_| None)
}

/// Fully parenthesized infix form. Shared subterms are printed at each use.
impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const { value, .. } => write!(f, "{value}"),
            Node::Bool(b) => write!(f, "{b}"),
            Node::Sym(s) => write!(f, "{s}"),
            Node::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Not(a) => write!(f, "!{a}"),
            Node::Ite(c, t, e) => write!(f, "ite({c}, {t}, {e})"),
            Node::Select(a, k) => write!(f, "{a}[{k}]"),
            Node::Store(a, k, v) => write!(f, "store({a}, {k}, {v})"),
            Node::ZeroArray(_) => write!(f, "zeros"),
        }
    }
}

impl Serialize for SymExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const W: Width = 8;

    fn x() -> SymExpr {
        SymExpr::sym(Symbol::word(SymOrigin::Calldata { tx: 1, arg: 0 }, W))
    }

    fn y() -> SymExpr {
        SymExpr::sym(Symbol::word(SymOrigin::Calldata { tx: 1, arg: 1 }, W))
    }

    fn c(v: u64) -> SymExpr {
        SymExpr::word(v, W)
    }

    #[test]
    fn constant_folding_wraps() {
        assert_eq!(SymExpr::add(c(3), c(5)), c(8));
        assert_eq!(SymExpr::add(c(250), c(10)), c(4));
        assert_eq!(SymExpr::sub(c(1), c(2)), c(255));
        assert_eq!(SymExpr::mul(c(16), c(17)), c(16));
        assert_eq!(SymExpr::div(c(7), c(0)), c(0));
        assert_eq!(SymExpr::word(300, W), c(44));
    }

    #[test]
    fn identities() {
        assert_eq!(SymExpr::add(x(), c(0)), x());
        assert_eq!(SymExpr::add(c(0), x()), x());
        assert_eq!(SymExpr::sub(x(), x()), c(0));
        assert_eq!(SymExpr::mul(x(), c(1)), x());
        assert_eq!(SymExpr::div(x(), c(0)), c(0));
        assert_eq!(SymExpr::ult(x(), c(0)), SymExpr::boolean(false));
        assert_eq!(SymExpr::eq(x(), x()), SymExpr::boolean(true));
        let b = SymExpr::ult(x(), y());
        assert_eq!(SymExpr::ite(SymExpr::boolean(true), x(), y()), x());
        assert_eq!(
            SymExpr::ite(b.clone(), SymExpr::boolean(true), SymExpr::boolean(false)),
            b
        );
        assert_eq!(SymExpr::not(SymExpr::not(b.clone())), b);
        assert_eq!(
            SymExpr::and(b.clone(), SymExpr::not(b.clone())),
            SymExpr::boolean(false)
        );
        assert_eq!(
            SymExpr::eq(b.clone(), SymExpr::boolean(false)),
            SymExpr::not(b)
        );
    }

    #[test]
    fn constants_move_right() {
        let e = SymExpr::add(c(3), x());
        assert_eq!(e.to_string(), "(calldata_1_0 + 3)");
        assert_eq!(SymExpr::ne(c(3), x()).to_string(), "!(calldata_1_0 == 3)");
    }

    #[test]
    fn select_over_store() {
        let zero = SymExpr::zero_array(W);
        let arr = SymExpr::store(zero.clone(), x(), y());
        assert_eq!(SymExpr::select(arr.clone(), x()), y());
        assert_eq!(SymExpr::select(zero, x()), c(0));
        let other = SymExpr::select(arr.clone(), c(4));
        assert_eq!(
            other.to_string(),
            "ite((calldata_1_0 == 4), calldata_1_1, 0)"
        );
        // constant keys that differ skip the store entirely
        let konst = SymExpr::store(SymExpr::zero_array(W), c(1), c(9));
        assert_eq!(SymExpr::select(konst.clone(), c(2)), c(0));
        assert_eq!(SymExpr::select(konst, c(1)), c(9));
    }

    #[test]
    fn store_overwrites_same_key() {
        let a = SymExpr::store(SymExpr::zero_array(W), x(), c(1));
        let b = SymExpr::store(a, x(), c(2));
        assert_eq!(b.to_string(), "store(zeros, calldata_1_0, 2)");
    }

    #[test]
    fn eval_and_symbols() {
        let e = SymExpr::add(SymExpr::mul(x(), y()), c(1));
        let env = |s: &Symbol| match s.origin {
            SymOrigin::Calldata { arg: 0, .. } => 20,
            _ => 13,
        };
        assert_eq!(e.eval(&env), Value::Word((20 * 13 + 1) % 256));
        assert_eq!(e.symbols().len(), 2);
    }

    #[test]
    fn symbol_names_order_lexicographically() {
        let a = Symbol::word(SymOrigin::Caller { tx: 2 }, W);
        let b = Symbol::word(SymOrigin::Calldata { tx: 1, arg: 0 }, W);
        assert_eq!(a.name(), "caller_2");
        assert!(b < a);
    }

    #[test]
    fn dag_traversals_are_linear() {
        // 200 levels of sharing would be 2^200 tree nodes.
        let mut e = x();
        for _ in 0..200 {
            e = SymExpr::add(e.clone(), SymExpr::mul(e, y()));
        }
        assert!(e.dag_size() < 1000);
        assert_eq!(simplify(&e), e);
        let _ = e.eval(&|_| 3);
    }

    fn leaf() -> impl Strategy<Value = SymExpr> {
        prop_oneof![
            (0u64..256).prop_map(c),
            Just(x()),
            Just(y()),
            Just(c(0)),
            Just(c(1)),
            Just(c(255)),
        ]
    }

    pub(crate) fn word_expr() -> impl Strategy<Value = SymExpr> {
        leaf().prop_recursive(5, 48, 3, |inner| {
            let boolean = (inner.clone(), inner.clone(), 0..3u8).prop_map(|(a, b, k)| match k {
                0 => SymExpr::ult(a, b),
                1 => SymExpr::eq(a, b),
                _ => SymExpr::ne(a, b),
            });
            prop_oneof![
                (inner.clone(), inner.clone(), 0..4u8).prop_map(|(a, b, k)| match k {
                    0 => SymExpr::add(a, b),
                    1 => SymExpr::sub(a, b),
                    2 => SymExpr::mul(a, b),
                    _ => SymExpr::div(a, b),
                }),
                (boolean, inner.clone(), inner.clone()).prop_map(|(c, t, e)| SymExpr::ite(c, t, e)),
                (inner.clone(), inner.clone(), inner.clone(), inner).prop_map(
                    |(k1, v1, k2, k3)| {
                        let arr = SymExpr::store(SymExpr::zero_array(W), k1, v1);
                        let arr = SymExpr::store(arr, k2, c(7));
                        SymExpr::select(arr, k3)
                    }
                ),
            ]
        })
    }

    /// Builds the same shapes without simplification, as a reference.
    fn raw_bin(op: BinOp, a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::mk(Node::Bin(op, a, b))
    }

    fn raw_expr() -> impl Strategy<Value = SymExpr> {
        leaf().prop_recursive(5, 48, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0..4u8).prop_map(|(a, b, k)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][k as usize];
                    raw_bin(op, a, b)
                }),
                (
                    inner.clone(),
                    inner.clone(),
                    inner.clone(),
                    inner.clone(),
                    0..3u8
                )
                    .prop_map(|(a, b, t, e, k)| {
                        let op = [BinOp::Lt, BinOp::Eq, BinOp::Ne][k as usize];
                        SymExpr::mk(Node::Ite(raw_bin(op, a, b), t, e))
                    }),
                (inner.clone(), inner.clone(), inner).prop_map(|(k, v, k2)| {
                    let arr = SymExpr::mk(Node::Store(SymExpr::zero_array(W), k, v));
                    SymExpr::mk(Node::Select(arr, k2))
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn simplify_is_idempotent(e in word_expr()) {
            let once = simplify(&e);
            prop_assert_eq!(&once, &e);
            prop_assert_eq!(simplify(&once), once);
        }

        #[test]
        fn simplify_preserves_evaluation(e in raw_expr(), samples in prop::collection::vec((0u64..256, 0u64..256), 1000)) {
            let s = simplify(&e);
            for (vx, vy) in samples {
                let env = move |sym: &Symbol| match sym.origin {
                    SymOrigin::Calldata { arg: 0, .. } => vx,
                    _ => vy,
                };
                prop_assert_eq!(e.eval(&env), s.eval(&env));
            }
        }
    }
}
