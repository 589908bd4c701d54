use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::{FrontendError, Pos};

/// Recursive-descent parser producing an unchecked [`ContractUnit`].
pub fn parse_unchecked(src: &str) -> Result<ContractUnit, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0 };
    let unit = p.contract()?;
    p.expect(Tok::Eof)?;
    Ok(unit)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, FrontendError> {
        Err(FrontendError::Syntax {
            pos: self.pos(),
            found: self.peek().to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), FrontendError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn contract(&mut self) -> Result<ContractUnit, FrontendError> {
        self.expect(Tok::Contract)?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut unit = ContractUnit {
            name,
            state_vars: Vec::new(),
            functions: Vec::new(),
            modifiers: Vec::new(),
        };
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.advance();
                    return Ok(unit);
                }
                Tok::Modifier => unit.modifiers.push(self.modifier()?),
                Tok::Function => unit.functions.push(self.function()?),
                Tok::Uint | Tok::Bool | Tok::Address | Tok::Mapping => {
                    let ty = self.state_type()?;
                    // Solidity's `public` getter marker carries no meaning here.
                    self.eat(&Tok::Public);
                    let name = self.ident()?;
                    self.expect(Tok::Semi)?;
                    let slot = unit.state_vars.len() as u32;
                    unit.state_vars.push(StateVar { name, slot, ty });
                }
                _ => {
                    return self.error(&["state variable", "modifier", "function", "`}`"]);
                }
            }
        }
    }

    fn value_type(&mut self) -> Result<ValueType, FrontendError> {
        let ty = match self.peek() {
            Tok::Uint => ValueType::Uint,
            Tok::Bool => ValueType::Bool,
            Tok::Address => ValueType::Address,
            _ => return self.error(&["`uint`", "`bool`", "`address`"]),
        };
        self.advance();
        Ok(ty)
    }

    fn state_type(&mut self) -> Result<StateType, FrontendError> {
        if self.eat(&Tok::Mapping) {
            self.expect(Tok::LParen)?;
            let key = match self.peek() {
                Tok::Uint => ValueType::Uint,
                Tok::Address => ValueType::Address,
                _ => return self.error(&["`uint`", "`address`"]),
            };
            self.advance();
            self.expect(Tok::Arrow)?;
            self.expect(Tok::Uint)?;
            self.expect(Tok::RParen)?;
            Ok(StateType::Mapping(key))
        } else {
            Ok(StateType::Value(self.value_type()?))
        }
    }

    fn modifier(&mut self) -> Result<ModifierDef, FrontendError> {
        self.expect(Tok::Modifier)?;
        let name = self.ident()?;
        if self.eat(&Tok::LParen) {
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::LBrace)?;
        let mut before = Vec::new();
        while !matches!(self.peek(), Tok::Underscore) {
            if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                return self.error(&["`_`"]);
            }
            before.push(self.stmt()?);
        }
        self.advance();
        self.expect(Tok::Semi)?;
        let mut after = Vec::new();
        while !self.eat(&Tok::RBrace) {
            after.push(self.stmt()?);
        }
        Ok(ModifierDef {
            name,
            before,
            after,
        })
    }

    fn function(&mut self) -> Result<FunctionDef, FrontendError> {
        self.expect(Tok::Function)?;
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let ty = self.value_type()?;
                let pname = self.ident()?;
                params.push(Param { name: pname, ty });
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let visibility = match self.peek() {
            Tok::Public => Visibility::Public,
            Tok::Internal => Visibility::Internal,
            _ => return self.error(&["`public`", "`internal`"]),
        };
        self.advance();
        let mut modifiers = Vec::new();
        while let Tok::Ident(m) = self.peek().clone() {
            self.advance();
            modifiers.push(m);
        }
        let body = self.block()?;
        Ok(FunctionDef {
            name,
            params,
            visibility,
            modifiers,
            body,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while !self.eat(&Tok::RBrace) {
            body.push(self.stmt()?);
        }
        Ok(body)
    }

    /// Braced block, or a single statement as in `if (c) revert();`.
    fn body(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        if matches!(self.peek(), Tok::LBrace) {
            self.block()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        match self.peek().clone() {
            Tok::Uint | Tok::Bool | Tok::Address => {
                let ty = self.value_type()?;
                let name = self.ident()?;
                let init = if self.eat(&Tok::Assign) {
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                Ok(Stmt::VarDecl { ty, name, init })
            }
            Tok::Require => {
                self.advance();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Require(e))
            }
            Tok::If => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let then_body = self.body()?;
                let else_body = if self.eat(&Tok::Else) {
                    self.body()?
                } else {
                    Vec::new()
                };
                Ok(Stmt::If {
                    cond,
                    then_body,
                    else_body,
                })
            }
            Tok::While => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.body()?;
                Ok(Stmt::While { cond, body })
            }
            Tok::Revert => {
                self.advance();
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Revert)
            }
            Tok::Selfdestruct => {
                self.advance();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Selfdestruct(e))
            }
            Tok::Return => {
                self.advance();
                self.expect(Tok::Semi)?;
                Ok(Stmt::Return)
            }
            Tok::Ident(name) => {
                let is_assignment = match self.peek_at(1) {
                    Tok::Assign | Tok::PlusAssign | Tok::MinusAssign => true,
                    Tok::LBracket => self.index_is_assignment(),
                    _ => false,
                };
                if !is_assignment {
                    return self.expr_stmt();
                }
                self.advance();
                let target = if self.eat(&Tok::LBracket) {
                    let key = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    LValue::Index { base: name, key }
                } else {
                    LValue::Var(name)
                };
                let op = match self.advance() {
                    Tok::Assign => AssignOp::Set,
                    Tok::PlusAssign => AssignOp::Add,
                    Tok::MinusAssign => AssignOp::Sub,
                    _ => unreachable!("checked by lookahead"),
                };
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Assign { target, op, value })
            }
            _ => self.expr_stmt(),
        }
    }

    /// Looks past a balanced `[...]` following an identifier for an
    /// assignment operator.
    fn index_is_assignment(&self) -> bool {
        let mut depth = 0usize;
        let mut i = self.at + 1;
        while i < self.toks.len() {
            match self.toks[i].0 {
                Tok::LBracket => depth += 1,
                Tok::RBracket => {
                    depth -= 1;
                    if depth == 0 {
                        return matches!(
                            self.toks.get(i + 1).map(|t| &t.0),
                            Some(Tok::Assign | Tok::PlusAssign | Tok::MinusAssign)
                        );
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn expr_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.pos();
        let e = self.expr()?;
        if !matches!(e, Expr::Call { .. }) {
            return Err(FrontendError::Syntax {
                pos: start,
                found: "expression statement".into(),
                expected: vec!["statement".into()],
            });
        }
        self.expect(Tok::Semi)?;
        Ok(Stmt::Expr(e))
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, FrontendError> {
        const LEVELS: &[&[(Tok, BinaryOp)]] = &[
            &[(Tok::OrOr, BinaryOp::Or)],
            &[(Tok::AndAnd, BinaryOp::And)],
            &[(Tok::EqEq, BinaryOp::Eq), (Tok::NotEq, BinaryOp::Ne)],
            &[
                (Tok::Lt, BinaryOp::Lt),
                (Tok::Gt, BinaryOp::Gt),
                (Tok::Le, BinaryOp::Le),
                (Tok::Ge, BinaryOp::Ge),
            ],
            &[(Tok::Plus, BinaryOp::Add), (Tok::Minus, BinaryOp::Sub)],
            &[(Tok::Star, BinaryOp::Mul), (Tok::Slash, BinaryOp::Div)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        'outer: loop {
            for (tok, op) in LEVELS[level] {
                if self.peek() == tok {
                    self.advance();
                    let rhs = self.binary(level + 1)?;
                    lhs = Expr::binary(*op, lhs, rhs);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        if self.eat(&Tok::Bang) {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        while matches!(self.peek(), Tok::Dot) && matches!(self.peek_at(1), Tok::Call) {
            self.advance();
            self.advance();
            self.expect(Tok::Dot)?;
            self.expect(Tok::Value)?;
            self.expect(Tok::LParen)?;
            let value = self.expr()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::LParen)?;
            self.expect(Tok::RParen)?;
            e = Expr::Call {
                target: Box::new(e),
                value: Box::new(value),
            };
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(Expr::Num(n))
            }
            Tok::True => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            Tok::False => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Msg => {
                self.advance();
                self.expect(Tok::Dot)?;
                match self.peek() {
                    Tok::Ident(s) if s == "sender" => {
                        self.advance();
                        Ok(Expr::MsgSender)
                    }
                    Tok::Value => {
                        self.advance();
                        Ok(Expr::MsgValue)
                    }
                    _ => self.error(&["`sender`", "`value`"]),
                }
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(&Tok::LBracket) {
                    let key = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    Ok(Expr::Index {
                        base: name,
                        key: Box::new(key),
                    })
                } else {
                    Ok(Expr::Var(name))
                }
            }
            _ => self.error(&["expression"]),
        }
    }
}
