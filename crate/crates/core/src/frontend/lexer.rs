use std::fmt;

use super::{FrontendError, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    // keywords
    Contract,
    Uint,
    Bool,
    Address,
    Mapping,
    Modifier,
    Function,
    Public,
    Internal,
    Require,
    If,
    Else,
    While,
    Revert,
    Selfdestruct,
    Return,
    True,
    False,
    Msg,
    Call,
    Value,
    Underscore,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Arrow,
    Assign,
    PlusAssign,
    MinusAssign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    NotEq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Num(n) => return write!(f, "number `{n}`"),
            Tok::Contract => "contract",
            Tok::Uint => "uint",
            Tok::Bool => "bool",
            Tok::Address => "address",
            Tok::Mapping => "mapping",
            Tok::Modifier => "modifier",
            Tok::Function => "function",
            Tok::Public => "public",
            Tok::Internal => "internal",
            Tok::Require => "require",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Revert => "revert",
            Tok::Selfdestruct => "selfdestruct",
            Tok::Return => "return",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Msg => "msg",
            Tok::Call => "call",
            Tok::Value => "value",
            Tok::Underscore => "_",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Arrow => "=>",
            Tok::Assign => "=",
            Tok::PlusAssign => "+=",
            Tok::MinusAssign => "-=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "contract" => Tok::Contract,
        "uint" | "uint256" => Tok::Uint,
        "bool" => Tok::Bool,
        "address" => Tok::Address,
        "mapping" => Tok::Mapping,
        "modifier" => Tok::Modifier,
        "function" => Tok::Function,
        "public" => Tok::Public,
        "internal" => Tok::Internal,
        "require" => Tok::Require,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "revert" => Tok::Revert,
        "selfdestruct" => Tok::Selfdestruct,
        "return" => Tok::Return,
        "true" => Tok::True,
        "false" => Tok::False,
        "msg" => Tok::Msg,
        "call" => Tok::Call,
        "value" => Tok::Value,
        "_" => Tok::Underscore,
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, FrontendError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            let parsed = match text.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => text.parse::<u64>(),
            };
            let value = parsed.map_err(|_| FrontendError::Syntax {
                pos,
                found: format!("`{text}`"),
                expected: vec!["a number that fits in 64 bits".into()],
            })?;
            out.push((Tok::Num(value), pos));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok2 = match two.as_str() {
            "=>" => Some(Tok::Arrow),
            "+=" => Some(Tok::PlusAssign),
            "-=" => Some(Tok::MinusAssign),
            "<=" => Some(Tok::Le),
            ">=" => Some(Tok::Ge),
            "==" => Some(Tok::EqEq),
            "!=" => Some(Tok::NotEq),
            "&&" => Some(Tok::AndAnd),
            "||" => Some(Tok::OrOr),
            _ => None,
        };
        if let Some(tok) = tok2 {
            bump!();
            bump!();
            out.push((tok, pos));
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => Tok::Assign,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '!' => Tok::Bang,
            other => {
                return Err(FrontendError::Syntax {
                    pos,
                    found: format!("character `{other}`"),
                    expected: vec!["a token".into()],
                })
            }
        };
        bump!();
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
