use std::collections::{BTreeSet, HashMap};

use super::ast::{
    self, AssignOp, BinaryOp, ContractUnit, Expr, LValue, StateType, Stmt, ValueType,
};
use super::ir::*;
use super::FrontendError;

/// Lowers every public function, inlining its modifiers in declaration
/// order around the body.
pub fn lower_contract(unit: &ContractUnit) -> Result<Vec<Cfg>, FrontendError> {
    unit.public_functions()
        .map(|f| lower_function(unit, f))
        .collect()
}

fn lower_function(unit: &ContractUnit, func: &ast::FunctionDef) -> Result<Cfg, FrontendError> {
    let mut lw = Lowerer {
        unit,
        function: &func.name,
        blocks: Vec::new(),
        current: None,
        locals: Vec::new(),
        next_site: 0,
        loop_headers: BTreeSet::new(),
    };
    let entry = lw.new_block();
    lw.current = Some(entry);

    let mut names = Names::default();
    for (i, p) in func.params.iter().enumerate() {
        let id = lw.declare(&mut names, &p.name, p.ty);
        lw.emit(Instr::Env {
            dest: id,
            which: EnvValue::Arg(i as u32),
        });
    }
    lw.with_modifiers(&func.modifiers, &mut names, &func.body)?;
    if let Some(cur) = lw.current {
        lw.terminate(cur, Terminator::Stop);
    }

    let blocks = lw
        .blocks
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let (term, term_site) = b.term.expect("every created block is terminated");
            BasicBlock {
                id: BlockId(i as u32),
                instrs: b.instrs,
                term,
                term_site,
            }
        })
        .collect();
    Ok(Cfg {
        function: func.name.clone(),
        params: func.params.iter().map(|p| p.ty).collect(),
        locals: lw.locals,
        blocks,
        entry,
        loop_headers: lw.loop_headers,
    })
}

#[derive(Default)]
struct Names {
    map: HashMap<String, LocalId>,
}

struct PendingBlock {
    instrs: Vec<(SiteId, Instr)>,
    term: Option<(Terminator, SiteId)>,
}

struct Lowerer<'a> {
    unit: &'a ContractUnit,
    function: &'a str,
    blocks: Vec<PendingBlock>,
    /// `None` while lowering statements that follow a terminator.
    current: Option<BlockId>,
    locals: Vec<LocalDecl>,
    next_site: u32,
    loop_headers: BTreeSet<BlockId>,
}

impl<'a> Lowerer<'a> {
    fn site(&mut self) -> SiteId {
        let s = SiteId(self.next_site);
        self.next_site += 1;
        s
    }

    fn new_block(&mut self) -> BlockId {
        self.blocks.push(PendingBlock {
            instrs: Vec::new(),
            term: None,
        });
        BlockId(self.blocks.len() as u32 - 1)
    }

    fn emit(&mut self, instr: Instr) {
        let cur = self.current.expect("emit only in live code");
        let site = self.site();
        self.blocks[cur.0 as usize].instrs.push((site, instr));
    }

    fn terminate(&mut self, block: BlockId, term: Terminator) {
        let site = self.site();
        let slot = &mut self.blocks[block.0 as usize].term;
        debug_assert!(slot.is_none(), "block terminated twice");
        *slot = Some((term, site));
        if self.current == Some(block) {
            self.current = None;
        }
    }

    fn declare(&mut self, names: &mut Names, name: &str, ty: ValueType) -> LocalId {
        let id = LocalId(self.locals.len() as u32);
        self.locals.push(LocalDecl {
            name: name.to_string(),
            ty,
        });
        names.map.insert(name.to_string(), id);
        id
    }

    fn temp(&mut self, ty: ValueType) -> LocalId {
        let id = LocalId(self.locals.len() as u32);
        self.locals.push(LocalDecl {
            name: format!("$t{}", id.0),
            ty,
        });
        id
    }

    fn error(&self, message: impl Into<String>) -> FrontendError {
        FrontendError::Lowering {
            function: self.function.to_string(),
            message: message.into(),
        }
    }

    fn state(&self, name: &str) -> Result<(Slot, StateType), FrontendError> {
        self.unit
            .state_var(name)
            .map(|v| (v.slot, v.ty))
            .ok_or_else(|| self.error(format!("unresolved state variable `{name}`")))
    }

    fn with_modifiers(
        &mut self,
        modifiers: &[String],
        fn_names: &mut Names,
        body: &[Stmt],
    ) -> Result<(), FrontendError> {
        let Some((first, rest)) = modifiers.split_first() else {
            return self.stmts(body, fn_names);
        };
        let def = self
            .unit
            .modifier(first)
            .ok_or_else(|| self.error(format!("unknown modifier `{first}`")))?;
        let mut mod_names = Names::default();
        self.stmts(&def.before, &mut mod_names)?;
        self.with_modifiers(rest, fn_names, body)?;
        self.stmts(&def.after, &mut mod_names)
    }

    fn stmts(&mut self, body: &[Stmt], names: &mut Names) -> Result<(), FrontendError> {
        body.iter().try_for_each(|s| self.stmt(s, names))
    }

    fn stmt(&mut self, s: &Stmt, names: &mut Names) -> Result<(), FrontendError> {
        if self.current.is_none() {
            // Unreachable code: only keep declarations so later names resolve.
            if let Stmt::VarDecl { ty, name, .. } = s {
                self.declare(names, name, *ty);
            }
            return Ok(());
        }
        match s {
            Stmt::VarDecl { ty, name, init } => {
                let value = match init {
                    Some(e) => self.expr(e, names)?,
                    None if ty.is_word() => Operand::Word(0),
                    None => Operand::Bool(false),
                };
                let id = self.declare(names, name, *ty);
                self.emit(Instr::Assign {
                    dest: id,
                    rvalue: Rvalue::Use(value),
                });
            }
            Stmt::Assign { target, op, value } => self.assign(target, *op, value, names)?,
            Stmt::Require(e) => {
                let cond = self.expr(e, names)?;
                let cont = self.new_block();
                let fail = self.new_block();
                let cur = self.current.unwrap();
                self.terminate(
                    cur,
                    Terminator::Branch {
                        cond,
                        then_block: cont,
                        else_block: fail,
                    },
                );
                self.terminate(fail, Terminator::Revert);
                self.current = Some(cont);
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                let cond = self.expr(cond, names)?;
                let then_block = self.new_block();
                let else_block = self.new_block();
                let cur = self.current.unwrap();
                self.terminate(
                    cur,
                    Terminator::Branch {
                        cond,
                        then_block,
                        else_block,
                    },
                );
                self.current = Some(then_block);
                self.stmts(then_body, names)?;
                let then_end = self.current;
                self.current = Some(else_block);
                self.stmts(else_body, names)?;
                let else_end = self.current;
                if then_end.is_some() || else_end.is_some() {
                    let join = self.new_block();
                    for end in [then_end, else_end].into_iter().flatten() {
                        self.terminate(end, Terminator::Jump(join));
                    }
                    self.current = Some(join);
                }
            }
            Stmt::While { cond, body } => {
                let header = self.new_block();
                let cur = self.current.unwrap();
                self.terminate(cur, Terminator::Jump(header));
                self.current = Some(header);
                self.loop_headers.insert(header);
                let cond = self.expr(cond, names)?;
                let body_block = self.new_block();
                let exit = self.new_block();
                self.terminate(
                    header,
                    Terminator::Branch {
                        cond,
                        then_block: body_block,
                        else_block: exit,
                    },
                );
                self.current = Some(body_block);
                self.stmts(body, names)?;
                if let Some(end) = self.current {
                    self.terminate(end, Terminator::Jump(header));
                }
                self.current = Some(exit);
            }
            Stmt::Revert => {
                let cur = self.current.unwrap();
                self.terminate(cur, Terminator::Revert);
            }
            Stmt::Return => {
                let cur = self.current.unwrap();
                self.terminate(cur, Terminator::Return);
            }
            Stmt::Selfdestruct(e) => {
                let beneficiary = self.expr(e, names)?;
                let cur = self.current.unwrap();
                self.terminate(cur, Terminator::Selfdestruct(beneficiary));
            }
            Stmt::Expr(e) => {
                self.expr(e, names)?;
            }
        }
        Ok(())
    }

    fn assign(
        &mut self,
        target: &LValue,
        op: AssignOp,
        value: &Expr,
        names: &mut Names,
    ) -> Result<(), FrontendError> {
        let arith = match op {
            AssignOp::Set => None,
            AssignOp::Add => Some(BinOp::Add),
            AssignOp::Sub => Some(BinOp::Sub),
        };
        match target {
            LValue::Var(name) => {
                if let Some(&id) = names.map.get(name) {
                    let v = self.expr(value, names)?;
                    let rvalue = match arith {
                        Some(op) => Rvalue::Binary(op, Operand::Local(id), v),
                        None => Rvalue::Use(v),
                    };
                    self.emit(Instr::Assign { dest: id, rvalue });
                    return Ok(());
                }
                let (slot, ty) = self.state(name)?;
                let StateType::Value(vt) = ty else {
                    return Err(self.error(format!("cannot assign to mapping `{name}`")));
                };
                let src = match arith {
                    Some(op) => {
                        let cur = self.temp(vt);
                        self.emit(Instr::SLoad { dest: cur, slot });
                        let v = self.expr(value, names)?;
                        self.binary(op, Operand::Local(cur), v, vt)
                    }
                    None => self.expr(value, names)?,
                };
                self.emit(Instr::SStore { slot, src });
            }
            LValue::Index { base, key } => {
                let (slot, _) = self.state(base)?;
                let key = self.expr(key, names)?;
                let src = match arith {
                    Some(op) => {
                        let cur = self.temp(ValueType::Uint);
                        self.emit(Instr::SLoadMap {
                            dest: cur,
                            slot,
                            key,
                        });
                        let v = self.expr(value, names)?;
                        self.binary(op, Operand::Local(cur), v, ValueType::Uint)
                    }
                    None => self.expr(value, names)?,
                };
                self.emit(Instr::SStoreMap { slot, key, src });
            }
        }
        Ok(())
    }

    fn binary(&mut self, op: BinOp, a: Operand, b: Operand, ty: ValueType) -> Operand {
        let dest = self.temp(ty);
        self.emit(Instr::Assign {
            dest,
            rvalue: Rvalue::Binary(op, a, b),
        });
        Operand::Local(dest)
    }

    fn expr(&mut self, e: &Expr, names: &Names) -> Result<Operand, FrontendError> {
        Ok(match e {
            Expr::Num(n) => Operand::Word(*n),
            Expr::Bool(b) => Operand::Bool(*b),
            Expr::Var(name) => {
                if let Some(&id) = names.map.get(name) {
                    return Ok(Operand::Local(id));
                }
                let (slot, ty) = self.state(name)?;
                let StateType::Value(vt) = ty else {
                    return Err(self.error(format!("mapping `{name}` used as a value")));
                };
                let dest = self.temp(vt);
                self.emit(Instr::SLoad { dest, slot });
                Operand::Local(dest)
            }
            Expr::Index { base, key } => {
                let (slot, _) = self.state(base)?;
                let key = self.expr(key, names)?;
                let dest = self.temp(ValueType::Uint);
                self.emit(Instr::SLoadMap { dest, slot, key });
                Operand::Local(dest)
            }
            Expr::MsgSender => {
                let dest = self.temp(ValueType::Address);
                self.emit(Instr::Env {
                    dest,
                    which: EnvValue::Caller,
                });
                Operand::Local(dest)
            }
            Expr::MsgValue => {
                let dest = self.temp(ValueType::Uint);
                self.emit(Instr::Env {
                    dest,
                    which: EnvValue::CallValue,
                });
                Operand::Local(dest)
            }
            Expr::Not(inner) => {
                let o = self.expr(inner, names)?;
                let dest = self.temp(ValueType::Bool);
                self.emit(Instr::Assign {
                    dest,
                    rvalue: Rvalue::Not(o),
                });
                Operand::Local(dest)
            }
            Expr::Binary(op, l, r) => {
                if matches!(op, BinaryOp::And | BinaryOp::Or) && (has_call(l) || has_call(r)) {
                    return Err(self.error(format!(
                        "external call inside `{}` operand is not supported",
                        op.symbol()
                    )));
                }
                let a = self.expr(l, names)?;
                let b = self.expr(r, names)?;
                let (ir_op, negate) = match op {
                    BinaryOp::Add => (BinOp::Add, false),
                    BinaryOp::Sub => (BinOp::Sub, false),
                    BinaryOp::Mul => (BinOp::Mul, false),
                    BinaryOp::Div => (BinOp::Div, false),
                    BinaryOp::Lt => (BinOp::Lt, false),
                    BinaryOp::Gt => (BinOp::Gt, false),
                    BinaryOp::Le => (BinOp::Gt, true),
                    BinaryOp::Ge => (BinOp::Lt, true),
                    BinaryOp::Eq => (BinOp::Eq, false),
                    BinaryOp::Ne => (BinOp::Ne, false),
                    BinaryOp::And => (BinOp::And, false),
                    BinaryOp::Or => (BinOp::Or, false),
                };
                let result_ty = if ir_op.is_wrapping() || ir_op == BinOp::Div {
                    ValueType::Uint
                } else {
                    ValueType::Bool
                };
                let out = self.binary(ir_op, a, b, result_ty);
                if negate {
                    let dest = self.temp(ValueType::Bool);
                    self.emit(Instr::Assign {
                        dest,
                        rvalue: Rvalue::Not(out),
                    });
                    Operand::Local(dest)
                } else {
                    out
                }
            }
            Expr::Call { target, value } => {
                let target = self.expr(target, names)?;
                let value = self.expr(value, names)?;
                let dest = self.temp(ValueType::Bool);
                self.emit(Instr::ExtCall {
                    dest,
                    target,
                    value,
                });
                Operand::Local(dest)
            }
        })
    }
}

fn has_call(e: &Expr) -> bool {
    match e {
        Expr::Call { .. } => true,
        Expr::Index { key, .. } => has_call(key),
        Expr::Not(inner) => has_call(inner),
        Expr::Binary(_, l, r) => has_call(l) || has_call(r),
        _ => false,
    }
}
