//! Resolved syntax tree of a MiniSol contract and its canonical printer.
//!
//! Printing a [`ContractUnit`] and parsing the result yields an equal tree;
//! the printer fully parenthesizes nested binary expressions so precedence
//! never has to be reconstructed.

use std::fmt;

/// Value types usable for parameters and locals. `address` is a word like
/// `uint`; it is kept distinct only so source round-trips faithfully.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Uint,
    Bool,
    Address,
}

impl ValueType {
    pub fn is_word(self) -> bool {
        !matches!(self, ValueType::Bool)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateType {
    Value(ValueType),
    /// `mapping(key => uint)`; `key` is `uint` or `address`.
    Mapping(ValueType),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub slot: u32,
    pub ty: StateType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: ValueType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub visibility: Visibility,
    pub modifiers: Vec<String>,
    pub body: Vec<Stmt>,
}

/// A modifier body split at its `_;` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifierDef {
    pub name: String,
    pub before: Vec<Stmt>,
    pub after: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractUnit {
    pub name: String,
    pub state_vars: Vec<StateVar>,
    pub functions: Vec<FunctionDef>,
    pub modifiers: Vec<ModifierDef>,
}

impl ContractUnit {
    pub fn state_var(&self, name: &str) -> Option<&StateVar> {
        self.state_vars.iter().find(|v| v.name == name)
    }

    pub fn modifier(&self, name: &str) -> Option<&ModifierDef> {
        self.modifiers.iter().find(|m| m.name == name)
    }

    pub fn public_functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.functions
            .iter()
            .filter(|f| f.visibility == Visibility::Public)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LValue {
    Var(String),
    Index { base: String, key: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    VarDecl {
        ty: ValueType,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: LValue,
        op: AssignOp,
        value: Expr,
    },
    Require(Expr),
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Revert,
    Selfdestruct(Expr),
    Return,
    Expr(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(u64),
    Bool(bool),
    Var(String),
    Index {
        base: String,
        key: Box<Expr>,
    },
    MsgSender,
    MsgValue,
    Not(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `target.call.value(value)()`, evaluating to the call's success flag.
    Call {
        target: Box<Expr>,
        value: Box<Expr>,
    },
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Uint => "uint",
            ValueType::Bool => "bool",
            ValueType::Address => "address",
        })
    }
}

impl fmt::Display for StateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateType::Value(v) => write!(f, "{v}"),
            StateType::Mapping(k) => write!(f, "mapping({k} => uint)"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Index { base, key } => write!(f, "{base}[{key}]"),
            Expr::MsgSender => f.write_str("msg.sender"),
            Expr::MsgValue => f.write_str("msg.value"),
            Expr::Not(e) => match **e {
                Expr::Binary(..) => write!(f, "!({e})"),
                _ => write!(f, "!{e}"),
            },
            Expr::Binary(op, l, r) => {
                write_operand(f, l)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r)
            }
            Expr::Call { target, value } => {
                match **target {
                    Expr::Binary(..) | Expr::Not(_) => write!(f, "({target})")?,
                    _ => write!(f, "{target}")?,
                }
                write!(f, ".call.value({value})()")
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Binary(..) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, body: &[Stmt], indent: usize) -> fmt::Result {
    for s in body {
        write_stmt(f, s, indent)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, indent: usize) -> fmt::Result {
    let pad = "    ".repeat(indent);
    match s {
        Stmt::VarDecl { ty, name, init } => match init {
            Some(e) => writeln!(f, "{pad}{ty} {name} = {e};"),
            None => writeln!(f, "{pad}{ty} {name};"),
        },
        Stmt::Assign { target, op, value } => {
            let op = match op {
                AssignOp::Set => "=",
                AssignOp::Add => "+=",
                AssignOp::Sub => "-=",
            };
            match target {
                LValue::Var(v) => writeln!(f, "{pad}{v} {op} {value};"),
                LValue::Index { base, key } => writeln!(f, "{pad}{base}[{key}] {op} {value};"),
            }
        }
        Stmt::Require(e) => writeln!(f, "{pad}require({e});"),
        Stmt::If {
            cond,
            then_body,
            else_body,
        } => {
            writeln!(f, "{pad}if ({cond}) {{")?;
            write_block(f, then_body, indent + 1)?;
            if else_body.is_empty() {
                writeln!(f, "{pad}}}")
            } else {
                writeln!(f, "{pad}}} else {{")?;
                write_block(f, else_body, indent + 1)?;
                writeln!(f, "{pad}}}")
            }
        }
        Stmt::While { cond, body } => {
            writeln!(f, "{pad}while ({cond}) {{")?;
            write_block(f, body, indent + 1)?;
            writeln!(f, "{pad}}}")
        }
        Stmt::Revert => writeln!(f, "{pad}revert();"),
        Stmt::Selfdestruct(e) => writeln!(f, "{pad}selfdestruct({e});"),
        Stmt::Return => writeln!(f, "{pad}return;"),
        Stmt::Expr(e) => writeln!(f, "{pad}{e};"),
    }
}

impl fmt::Display for ContractUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "contract {} {{", self.name)?;
        for v in &self.state_vars {
            writeln!(f, "    {} {};", v.ty, v.name)?;
        }
        for m in &self.modifiers {
            writeln!(f, "    modifier {} {{", m.name)?;
            write_block(f, &m.before, 2)?;
            writeln!(f, "        _;")?;
            write_block(f, &m.after, 2)?;
            writeln!(f, "    }}")?;
        }
        for func in &self.functions {
            let params: Vec<String> = func
                .params
                .iter()
                .map(|p| format!("{} {}", p.ty, p.name))
                .collect();
            let vis = match func.visibility {
                Visibility::Public => "public",
                Visibility::Internal => "internal",
            };
            write!(f, "    function {}({}) {vis}", func.name, params.join(", "))?;
            for m in &func.modifiers {
                write!(f, " {m}")?;
            }
            writeln!(f, " {{")?;
            write_block(f, &func.body, 2)?;
            writeln!(f, "    }}")?;
        }
        writeln!(f, "}}")
    }
}
