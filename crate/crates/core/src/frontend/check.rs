//! Name resolution and type checking over a parsed contract.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Word,
    Bool,
}

impl From<ValueType> for Kind {
    fn from(t: ValueType) -> Self {
        if t.is_word() {
            Kind::Word
        } else {
            Kind::Bool
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Word => "uint",
            Kind::Bool => "bool",
        })
    }
}

pub fn check_unit(unit: &ContractUnit) -> Result<(), FrontendError> {
    let ctx = |what: &str| format!("contract {}: {what}", unit.name);

    let mut seen = HashSet::new();
    for v in &unit.state_vars {
        if !seen.insert(v.name.as_str()) {
            return Err(FrontendError::Resolution {
                context: ctx("state variables"),
                message: format!("duplicate state variable `{}`", v.name),
            });
        }
    }
    let mut seen = HashSet::new();
    for f in &unit.functions {
        if !seen.insert(f.name.as_str()) {
            return Err(FrontendError::Resolution {
                context: ctx("functions"),
                message: format!("duplicate function `{}`", f.name),
            });
        }
    }
    let mut seen = HashSet::new();
    for m in &unit.modifiers {
        if !seen.insert(m.name.as_str()) {
            return Err(FrontendError::Resolution {
                context: ctx("modifiers"),
                message: format!("duplicate modifier `{}`", m.name),
            });
        }
    }

    for m in &unit.modifiers {
        let mut scope = Scope::new(unit, format!("modifier {}", m.name));
        scope.stmts(&m.before)?;
        scope.stmts(&m.after)?;
    }
    for f in &unit.functions {
        let mut scope = Scope::new(unit, format!("function {}", f.name));
        for p in &f.params {
            scope.declare(&p.name, p.ty)?;
        }
        for m in &f.modifiers {
            if unit.modifier(m).is_none() {
                return Err(scope.resolution(format!("unknown modifier `{m}`")));
            }
        }
        scope.stmts(&f.body)?;
    }
    Ok(())
}

struct Scope<'a> {
    unit: &'a ContractUnit,
    context: String,
    locals: HashMap<String, ValueType>,
}

impl<'a> Scope<'a> {
    fn new(unit: &'a ContractUnit, context: String) -> Self {
        Scope {
            unit,
            context,
            locals: HashMap::new(),
        }
    }

    fn resolution(&self, message: String) -> FrontendError {
        FrontendError::Resolution {
            context: self.context.clone(),
            message,
        }
    }

    fn type_error(&self, message: String) -> FrontendError {
        FrontendError::Type {
            context: self.context.clone(),
            message,
        }
    }

    fn declare(&mut self, name: &str, ty: ValueType) -> Result<(), FrontendError> {
        if self.unit.state_var(name).is_some() || self.locals.contains_key(name) {
            return Err(self.resolution(format!("duplicate name `{name}`")));
        }
        self.locals.insert(name.to_string(), ty);
        Ok(())
    }

    fn stmts(&mut self, body: &[Stmt]) -> Result<(), FrontendError> {
        body.iter().try_for_each(|s| self.stmt(s))
    }

    fn expect_kind(&self, e: &Expr, want: Kind, what: &str) -> Result<(), FrontendError> {
        let got = self.expr(e)?;
        if got != want {
            return Err(self.type_error(format!("{what} `{e}` has type {got}, expected {want}")));
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), FrontendError> {
        match s {
            Stmt::VarDecl { ty, name, init } => {
                if let Some(e) = init {
                    self.expect_kind(e, (*ty).into(), "initializer")?;
                }
                self.declare(name, *ty)
            }
            Stmt::Assign { target, op, value } => {
                let target_kind = match target {
                    LValue::Var(name) => match self.locals.get(name) {
                        Some(t) => Kind::from(*t),
                        None => match self.unit.state_var(name).map(|v| v.ty) {
                            Some(StateType::Value(t)) => t.into(),
                            Some(StateType::Mapping(_)) => {
                                return Err(self.type_error(format!(
                                    "cannot assign to mapping `{name}` as a whole"
                                )))
                            }
                            None => {
                                return Err(self.resolution(format!("unknown identifier `{name}`")))
                            }
                        },
                    },
                    LValue::Index { base, key } => {
                        self.index(base, key)?;
                        Kind::Word
                    }
                };
                if *op != AssignOp::Set && target_kind != Kind::Word {
                    return Err(self.type_error("compound assignment on a bool".into()));
                }
                self.expect_kind(value, target_kind, "assigned value")
            }
            Stmt::Require(e) => self.expect_kind(e, Kind::Bool, "require condition"),
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                self.expect_kind(cond, Kind::Bool, "if condition")?;
                self.stmts(then_body)?;
                self.stmts(else_body)
            }
            Stmt::While { cond, body } => {
                self.expect_kind(cond, Kind::Bool, "loop condition")?;
                self.stmts(body)
            }
            Stmt::Revert | Stmt::Return => Ok(()),
            Stmt::Selfdestruct(e) => self.expect_kind(e, Kind::Word, "selfdestruct beneficiary"),
            Stmt::Expr(e) => self.expr(e).map(|_| ()),
        }
    }

    fn index(&self, base: &str, key: &Expr) -> Result<(), FrontendError> {
        match self.unit.state_var(base).map(|v| v.ty) {
            Some(StateType::Mapping(_)) => self.expect_kind(key, Kind::Word, "mapping key"),
            Some(_) => Err(self.type_error(format!("`{base}` is not a mapping"))),
            None if self.locals.contains_key(base) => {
                Err(self.type_error(format!("`{base}` is not a mapping")))
            }
            None => Err(self.resolution(format!("unknown identifier `{base}`"))),
        }
    }

    fn expr(&self, e: &Expr) -> Result<Kind, FrontendError> {
        Ok(match e {
            Expr::Num(_) | Expr::MsgSender | Expr::MsgValue => Kind::Word,
            Expr::Bool(_) => Kind::Bool,
            Expr::Var(name) => match self.locals.get(name) {
                Some(t) => (*t).into(),
                None => match self.unit.state_var(name).map(|v| v.ty) {
                    Some(StateType::Value(t)) => t.into(),
                    Some(StateType::Mapping(_)) => {
                        return Err(self.type_error(format!("mapping `{name}` used as a value")))
                    }
                    None => return Err(self.resolution(format!("unknown identifier `{name}`"))),
                },
            },
            Expr::Index { base, key } => {
                self.index(base, key)?;
                Kind::Word
            }
            Expr::Not(inner) => {
                self.expect_kind(inner, Kind::Bool, "operand of `!`")?;
                Kind::Bool
            }
            Expr::Binary(op, l, r) => {
                use BinaryOp::*;
                let (operand, result) = match op {
                    Add | Sub | Mul | Div => (Some(Kind::Word), Kind::Word),
                    Lt | Gt | Le | Ge => (Some(Kind::Word), Kind::Bool),
                    And | Or => (Some(Kind::Bool), Kind::Bool),
                    Eq | Ne => (None, Kind::Bool),
                };
                match operand {
                    Some(k) => {
                        self.expect_kind(l, k, "operand")?;
                        self.expect_kind(r, k, "operand")?;
                    }
                    None => {
                        let lk = self.expr(l)?;
                        let rk = self.expr(r)?;
                        if lk != rk {
                            return Err(
                                self.type_error(format!("cannot compare {lk} with {rk} in `{e}`"))
                            );
                        }
                    }
                }
                result
            }
            Expr::Call { target, value } => {
                self.expect_kind(target, Kind::Word, "call target")?;
                self.expect_kind(value, Kind::Word, "call value")?;
                Kind::Bool
            }
        })
    }
}
