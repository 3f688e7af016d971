//! Text formats for systems of equations, automata and lasso words.
//!
//! All three formats are ASCII, line oriented and allow `#` comments. The
//! printers emit a canonical form that the parsers read back to the same
//! value.
//!
//! System file:
//!
//! ```text
//! atoms p1 p2
//! registers 1
//! omega Vtt
//! main V3
//! Vtt = tt
//! V1 = up 1
//! V2 = V1 | X V2 & (!up 1 & p1)
//! V3 = down {1} X V2
//! ```
//!
//! Automaton file (state names that are not plain identifiers are quoted):
//!
//! ```text
//! atoms p1
//! registers 1
//! states q0 "q 1"
//! initial q0
//! accepting "q 1"
//! q0 --(p1 & !up 1, {1})--> "q 1"
//! "q 1" --(eps, {})--> q0
//! ```
//!
//! Lasso file: `prefix ({},5) ({p1,p2},4) ; period ({p1},5)`, with `_` for
//! the undefined datum.

mod bra;
mod lasso;
mod lexer;
mod system;

use std::fmt;

use thiserror::Error;

pub use bra::{parse_bra, serialize_bra, to_dot};
pub use lasso::{parse_lasso, parse_lasso_over, serialize_lasso};
pub use system::{parse_system, serialize_system};

use crate::data::RegSet;
use crate::formula::BasicFormula;
use lexer::{Cursor, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}

/// `{r, …}` with every index in `[1, k]`.
fn parse_regset(c: &mut Cursor, k: usize) -> Result<RegSet, ParseError> {
    c.expect(&Tok::LBrace)?;
    let mut regs = RegSet::empty();
    if c.eat(&Tok::RBrace) {
        return Ok(regs);
    }
    loop {
        let (r, span) = c.int()?;
        regs.insert(check_register(r, span, k)?);
        if c.eat(&Tok::RBrace) {
            return Ok(regs);
        }
        c.expect(&Tok::Comma)?;
    }
}

fn check_register(r: u64, span: SourceSpan, k: usize) -> Result<usize, ParseError> {
    match usize::try_from(r) {
        Ok(r) if (1..=k).contains(&r) => Ok(r),
        _ => Err(ParseError::new(span, format!("register {r} out of range [1, {k}]"))),
    }
}

fn check_atom(name: &str, span: SourceSpan, atoms: &[String]) -> Result<(), ParseError> {
    if atoms.iter().any(|a| a == name) {
        Ok(())
    } else {
        Err(ParseError::new(span, format!("unknown atom `{name}`")))
    }
}

/// Guard grammar: `unit ('&' unit)*` with
/// `unit = tt | ff | p | !p | up r | !up r | ( guard )`.
fn parse_basic(c: &mut Cursor, atoms: &[String], k: usize) -> Result<BasicFormula, ParseError> {
    let mut acc = parse_basic_unit(c, atoms, k)?;
    while c.eat(&Tok::Amp) {
        let rhs = parse_basic_unit(c, atoms, k)?;
        acc = BasicFormula::and(acc, rhs);
    }
    Ok(acc)
}

fn parse_basic_unit(c: &mut Cursor, atoms: &[String], k: usize) -> Result<BasicFormula, ParseError> {
    let negated = c.eat(&Tok::Bang);
    let t = c.peek().clone();
    let f = match t.tok {
        Tok::LParen if !negated => {
            c.next();
            let f = parse_basic(c, atoms, k)?;
            c.expect(&Tok::RParen)?;
            return Ok(f);
        }
        Tok::Ident(ref s) if s == "tt" && !negated => {
            c.next();
            BasicFormula::True
        }
        Tok::Ident(ref s) if s == "ff" && !negated => {
            c.next();
            BasicFormula::False
        }
        Tok::Ident(ref s) if s == "up" => {
            c.next();
            let (r, span) = c.int()?;
            let r = check_register(r, span, k)?;
            if negated {
                BasicFormula::NegUp(r)
            } else {
                BasicFormula::Up(r)
            }
        }
        Tok::Ident(ref s) if !crate::system::KEYWORDS.contains(&s.as_str()) => {
            c.next();
            check_atom(s, t.span, atoms)?;
            if negated {
                BasicFormula::NegAtom(s.clone())
            } else {
                BasicFormula::Atom(s.clone())
            }
        }
        _ if negated => {
            return Err(ParseError::new(t.span, "negation applies only to atoms and look-ups"))
        }
        _ => return Err(c.unexpected("basic formula")),
    };
    Ok(f)
}

/// Whether `s` can be written without quotes.
pub(crate) fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if lexer::is_ident_start(c)) && chars.all(lexer::is_ident_char)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}
