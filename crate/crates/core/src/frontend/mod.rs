//! MiniSol frontend: lexing, parsing, resolution and lowering to [`ir::Cfg`].
//!
//! MiniSol is the Solidity subset the scanner understands: one contract with
//! scalar and mapping state variables, public functions, `require`/`_`
//! modifiers, `if`/`while`, `revert()`, `selfdestruct(e)`, `return;` and
//! external calls written `addr.call.value(v)()`.

pub mod ast;
mod check;
pub mod ir;
mod lexer;
mod lower;
mod parser;

use std::fmt;

use thiserror::Error;

pub use ast::ContractUnit;
pub use ir::Cfg;
pub use lower::lower_contract;

/// The address that deployed the contract. There are no constructors, so
/// contracts refer to it by the literal `1`.
pub const CREATOR_ADDRESS: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("syntax error at {pos}: found {found}, expected {}", expected.join(" or "))]
    Syntax {
        pos: Pos,
        found: String,
        expected: Vec<String>,
    },
    #[error("resolution error in {context}: {message}")]
    Resolution { context: String, message: String },
    #[error("type error in {context}: {message}")]
    Type { context: String, message: String },
    #[error("lowering error in function {function}: {message}")]
    Lowering { function: String, message: String },
}

/// Parses, resolves and type-checks one MiniSol contract.
pub fn parse_source(text: &str) -> Result<ContractUnit, FrontendError> {
    let unit = parser::parse_unchecked(text)?;
    check::check_unit(&unit)?;
    Ok(unit)
}
