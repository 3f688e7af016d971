use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Cursor, Tok};
use super::{check_atom, check_register, parse_regset, ParseError, SourceSpan};
use crate::formula::{BasicFormula, Formula};
use crate::normalize::desugar_formula;
use crate::system::{Equation, EquationSystem, KEYWORDS};

struct Scope<'a> {
    atoms: &'a [String],
    vars: &'a BTreeMap<String, SourceSpan>,
    k: usize,
}

/// Parses a system of equations.
///
/// Right-hand sides are desugared on the fly, so the result contains only
/// variables, disjunctions, freeze-next formulas and `tt`. A conjunction
/// must have a basic side and a next-formula (or another basic formula) on
/// the other side.
pub fn parse_system(text: &str) -> Result<EquationSystem, ParseError> {
    let mut c = Cursor::new(lex(text)?);
    let mut atoms: Option<Vec<String>> = None;
    let mut k: Option<usize> = None;
    let mut omega: Option<Vec<(String, SourceSpan)>> = None;
    let mut main: Option<(String, SourceSpan)> = None;
    let mut lhs: Vec<(String, SourceSpan, usize)> = Vec::new();

    loop {
        c.skip_newlines();
        if c.peek().tok == Tok::Eof {
            break;
        }
        let (word, span) = c.ident()?;
        if c.peek().tok == Tok::Eq {
            c.next();
            lhs.push((word, span, c.mark()));
            while !c.at_line_end() {
                c.next();
            }
            continue;
        }
        let dup = || ParseError::new(span, format!("duplicate `{word}` line"));
        match word.as_str() {
            "atoms" => {
                if atoms.is_some() {
                    return Err(dup());
                }
                let mut list: Vec<String> = Vec::new();
                while !c.at_line_end() {
                    let (a, span) = c.ident()?;
                    check_name(&a, span)?;
                    if list.contains(&a) {
                        return Err(ParseError::new(span, format!("atom `{a}` declared twice")));
                    }
                    list.push(a);
                }
                atoms = Some(list);
            }
            "registers" => {
                if k.is_some() {
                    return Err(dup());
                }
                let (n, span) = c.int()?;
                k = Some(usize::try_from(n).map_err(|_| ParseError::new(span, "too many registers"))?);
            }
            "omega" => {
                if omega.is_some() {
                    return Err(dup());
                }
                let mut list = Vec::new();
                while !c.at_line_end() {
                    list.push(c.ident()?);
                }
                omega = Some(list);
            }
            "main" => {
                if main.is_some() {
                    return Err(dup());
                }
                main = Some(c.ident()?);
            }
            _ => {
                return Err(ParseError::new(
                    span,
                    format!("expected a header line or an equation, found `{word}`"),
                ))
            }
        }
        c.end_line()?;
    }

    let atoms = atoms.unwrap_or_default();
    let k = k.unwrap_or(0);
    let mut vars: BTreeMap<String, SourceSpan> = BTreeMap::new();
    for (v, span, _) in &lhs {
        check_name(v, *span)?;
        if atoms.contains(v) {
            return Err(ParseError::new(*span, format!("`{v}` is declared as an atom")));
        }
        if vars.insert(v.clone(), *span).is_some() {
            return Err(ParseError::new(*span, format!("duplicate equation for `{v}`")));
        }
    }
    let known = |(v, span): &(String, SourceSpan)| {
        if vars.contains_key(v) {
            Ok(v.clone())
        } else {
            Err(ParseError::new(*span, format!("unknown variable `{v}`")))
        }
    };
    let main = match &main {
        Some(m) => known(m)?,
        None => return Err(ParseError::new(c.peek().span, "missing `main` line")),
    };
    let omega: BTreeSet<String> = omega.unwrap_or_default().iter().map(known).collect::<Result<_, _>>()?;

    let scope = Scope { atoms: &atoms, vars: &vars, k };
    let mut equations = Vec::new();
    for (var, _, mark) in lhs {
        c.reset(mark);
        let rhs = parse_or(&mut c, &scope)?;
        if !c.at_line_end() {
            return Err(c.unexpected("`|`, `&` or end of line"));
        }
        let rhs = desugar_formula(&rhs).expect("conjunctions are checked while parsing");
        equations.push(Equation { var, rhs });
    }
    Ok(EquationSystem {
        atoms,
        k,
        equations,
        omega,
        main,
    })
}

fn check_name(name: &str, span: SourceSpan) -> Result<(), ParseError> {
    if KEYWORDS.contains(&name) {
        Err(ParseError::new(span, format!("`{name}` is a keyword")))
    } else {
        Ok(())
    }
}

fn parse_or(c: &mut Cursor, s: &Scope) -> Result<Formula, ParseError> {
    let mut acc = parse_and(c, s)?;
    while c.eat(&Tok::Bar) {
        let rhs = parse_and(c, s)?;
        acc = Formula::or(acc, rhs);
    }
    Ok(acc)
}

fn parse_and(c: &mut Cursor, s: &Scope) -> Result<Formula, ParseError> {
    let mut acc = parse_prefix(c, s)?;
    while c.peek().tok == Tok::Amp {
        let amp = c.next().span;
        let rhs = parse_prefix(c, s)?;
        acc = Formula::and(acc, rhs);
        if let Err(e) = desugar_formula(&acc) {
            return Err(ParseError::new(amp, e.to_string()));
        }
    }
    Ok(acc)
}

fn parse_prefix(c: &mut Cursor, s: &Scope) -> Result<Formula, ParseError> {
    let t = c.peek().clone();
    match &t.tok {
        Tok::Bang => {
            c.next();
            let u = c.peek().clone();
            match u.tok {
                Tok::Ident(ref w) if w == "up" => {
                    c.next();
                    let (r, span) = c.int()?;
                    Ok(Formula::Basic(BasicFormula::NegUp(check_register(r, span, s.k)?)))
                }
                Tok::Ident(ref w) if !KEYWORDS.contains(&w.as_str()) && !s.vars.contains_key(w) => {
                    c.next();
                    check_atom(w, u.span, s.atoms)?;
                    Ok(Formula::Basic(BasicFormula::NegAtom(w.clone())))
                }
                _ => Err(ParseError::new(t.span, "negation applies only to atoms and look-ups")),
            }
        }
        Tok::Ident(w) if w == "X" => {
            c.next();
            Ok(Formula::next(parse_prefix(c, s)?))
        }
        Tok::Ident(w) if w == "down" => {
            c.next();
            let regs = parse_regset(c, s.k)?;
            match c.peek().tok {
                Tok::Ident(ref x) if x == "X" => {
                    c.next();
                }
                _ => return Err(c.unexpected("`X`")),
            }
            let next = parse_prefix(c, s)?;
            Ok(Formula::freeze_next(regs, next, BasicFormula::True))
        }
        _ => parse_primary(c, s),
    }
}

fn parse_primary(c: &mut Cursor, s: &Scope) -> Result<Formula, ParseError> {
    let t = c.next();
    match t.tok {
        Tok::LParen => {
            let f = parse_or(c, s)?;
            c.expect(&Tok::RParen)?;
            Ok(f)
        }
        Tok::Ident(w) => match w.as_str() {
            "tt" => Ok(Formula::True),
            "ff" => Ok(Formula::Basic(BasicFormula::False)),
            "up" => {
                let (r, span) = c.int()?;
                Ok(Formula::Basic(BasicFormula::Up(check_register(r, span, s.k)?)))
            }
            _ if KEYWORDS.contains(&w.as_str()) => {
                Err(ParseError::new(t.span, format!("unexpected keyword `{w}`")))
            }
            _ if s.vars.contains_key(&w) => Ok(Formula::Var(w)),
            _ if s.atoms.contains(&w) => Ok(Formula::Basic(BasicFormula::Atom(w))),
            _ => Err(ParseError::new(t.span, format!("unknown variable or atom `{w}`"))),
        },
        other => Err(ParseError::new(t.span, format!("expected a formula, found {other}"))),
    }
}

/// Prints a system in the canonical text form. ω-variables are listed in
/// equation order.
pub fn serialize_system(s: &EquationSystem) -> String {
    let mut out = String::new();
    let line = |out: &mut String, head: &str, items: Vec<&str>| {
        out.push_str(head);
        for i in items {
            out.push(' ');
            out.push_str(i);
        }
        out.push('\n');
    };
    line(&mut out, "atoms", s.atoms.iter().map(String::as_str).collect());
    out.push_str(&format!("registers {}\n", s.k));
    line(&mut out, "omega", s.omega_vars());
    out.push_str(&format!("main {}\n", s.main));
    for e in &s.equations {
        out.push_str(&format!("{} = {}\n", e.var, e.rhs));
    }
    out
}
