use std::collections::BTreeSet;

use super::lexer::{lex, Cursor, Tok, Token};
use super::{check_atom, ParseError};
use crate::data::{Datum, LassoWord, Letter};

/// Parses `prefix (set,datum)… ; period (set,datum)…`. Line breaks are
/// ignored.
pub fn parse_lasso(text: &str) -> Result<LassoWord, ParseError> {
    parse(text, None)
}

/// Like [`parse_lasso`] but rejects atoms outside `atoms`.
pub fn parse_lasso_over(text: &str, atoms: &[String]) -> Result<LassoWord, ParseError> {
    parse(text, Some(atoms))
}

fn parse(text: &str, atoms: Option<&[String]>) -> Result<LassoWord, ParseError> {
    let toks: Vec<Token> = lex(text)?.into_iter().filter(|t| t.tok != Tok::Newline).collect();
    let mut c = Cursor::new(toks);
    keyword(&mut c, "prefix")?;
    let mut prefix = Vec::new();
    while c.peek().tok == Tok::LParen {
        prefix.push(letter(&mut c, atoms)?);
    }
    c.expect(&Tok::Semi)?;
    let period_span = c.peek().span;
    keyword(&mut c, "period")?;
    let mut period = Vec::new();
    while c.peek().tok == Tok::LParen {
        period.push(letter(&mut c, atoms)?);
    }
    if c.peek().tok != Tok::Eof {
        return Err(c.unexpected("`(` or end of input"));
    }
    LassoWord::new(prefix, period).map_err(|e| ParseError::new(period_span, e.to_string()))
}

fn keyword(c: &mut Cursor, w: &str) -> Result<(), ParseError> {
    match &c.peek().tok {
        Tok::Ident(s) if s == w => {
            c.next();
            Ok(())
        }
        _ => Err(c.unexpected(&format!("`{w}`"))),
    }
}

fn letter(c: &mut Cursor, atoms: Option<&[String]>) -> Result<Letter, ParseError> {
    c.expect(&Tok::LParen)?;
    c.expect(&Tok::LBrace)?;
    let mut set = BTreeSet::new();
    if !c.eat(&Tok::RBrace) {
        loop {
            let (a, span) = c.ident()?;
            if let Some(atoms) = atoms {
                check_atom(&a, span, atoms)?;
            }
            set.insert(a);
            if c.eat(&Tok::RBrace) {
                break;
            }
            c.expect(&Tok::Comma)?;
        }
    }
    c.expect(&Tok::Comma)?;
    let t = c.next();
    let datum = match t.tok {
        Tok::Int(n) => Datum::Val(n),
        Tok::Ident(ref s) if s == "_" => Datum::Bot,
        other => {
            return Err(ParseError::new(
                t.span,
                format!("malformed datum: expected a number or `_`, found {other}"),
            ))
        }
    };
    c.expect(&Tok::RParen)?;
    Ok(Letter { atoms: set, datum })
}

fn write_letter(out: &mut String, l: &Letter) {
    out.push_str(" ({");
    let atoms: Vec<&str> = l.atoms.iter().map(String::as_str).collect();
    out.push_str(&atoms.join(","));
    out.push_str(&format!("}},{})", l.datum));
}

pub fn serialize_lasso(w: &LassoWord) -> String {
    let mut out = String::from("prefix");
    for l in w.prefix() {
        write_letter(&mut out, l);
    }
    out.push_str(" ; period");
    for l in w.period() {
        write_letter(&mut out, l);
    }
    out.push('\n');
    out
}
