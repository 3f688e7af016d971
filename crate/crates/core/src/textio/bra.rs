use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::lexer::{lex, Cursor, Tok};
use super::{is_plain_ident, parse_basic, parse_regset, quote, ParseError, SourceSpan};
use crate::automaton::{BuchiRA, Guard, Rule, StateId};

const HEADERS: &[&str] = &["atoms", "registers", "states", "initial", "accepting"];

fn state_name(c: &mut Cursor) -> Result<(String, SourceSpan), ParseError> {
    let t = c.peek().clone();
    match t.tok {
        Tok::Ident(s) | Tok::Str(s) => {
            c.next();
            Ok((s, t.span))
        }
        _ => Err(c.unexpected("state name")),
    }
}

/// Parses a Büchi register automaton.
pub fn parse_bra(text: &str) -> Result<BuchiRA, ParseError> {
    let mut c = Cursor::new(lex(text)?);
    let mut atoms: Option<Vec<String>> = None;
    let mut k: Option<usize> = None;
    let mut states: Option<Vec<String>> = None;
    let mut initial: Option<(String, SourceSpan)> = None;
    let mut accepting: Option<Vec<(String, SourceSpan)>> = None;
    let mut rule_marks = Vec::new();

    loop {
        c.skip_newlines();
        if c.peek().tok == Tok::Eof {
            break;
        }
        let header = match &c.peek().tok {
            Tok::Ident(w) if HEADERS.contains(&w.as_str()) && c.peek_at(1).tok != Tok::Dash2 => {
                Some(w.clone())
            }
            _ => None,
        };
        let Some(header) = header else {
            rule_marks.push(c.mark());
            while !c.at_line_end() {
                c.next();
            }
            continue;
        };
        let span = c.next().span;
        let dup = || ParseError::new(span, format!("duplicate `{header}` line"));
        match header.as_str() {
            "atoms" => {
                if atoms.is_some() {
                    return Err(dup());
                }
                let mut list: Vec<String> = Vec::new();
                while !c.at_line_end() {
                    let (a, span) = c.ident()?;
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
            "states" => {
                if states.is_some() {
                    return Err(dup());
                }
                let mut list: Vec<String> = Vec::new();
                while !c.at_line_end() {
                    let (q, span) = state_name(&mut c)?;
                    if list.contains(&q) {
                        return Err(ParseError::new(span, format!("duplicate state `{q}`")));
                    }
                    list.push(q);
                }
                states = Some(list);
            }
            "initial" => {
                if initial.is_some() {
                    return Err(dup());
                }
                initial = Some(state_name(&mut c)?);
            }
            "accepting" => {
                if accepting.is_some() {
                    return Err(dup());
                }
                let mut list = Vec::new();
                while !c.at_line_end() {
                    list.push(state_name(&mut c)?);
                }
                accepting = Some(list);
            }
            _ => unreachable!(),
        }
        c.end_line()?;
    }

    let atoms = atoms.unwrap_or_default();
    let k = k.unwrap_or(0);
    let states = states.unwrap_or_default();
    let lookup = |(q, span): &(String, SourceSpan)| {
        states
            .iter()
            .position(|s| s == q)
            .map(StateId)
            .ok_or_else(|| ParseError::new(*span, format!("unknown state `{q}`")))
    };
    let initial = match &initial {
        Some(q) => lookup(q)?,
        None => return Err(ParseError::new(c.peek().span, "missing `initial` line")),
    };
    let accepting: BTreeSet<StateId> = accepting.unwrap_or_default().iter().map(lookup).collect::<Result<_, _>>()?;

    let mut rules = Vec::new();
    for mark in rule_marks {
        c.reset(mark);
        let source = lookup(&state_name(&mut c)?)?;
        c.expect(&Tok::Dash2)?;
        c.expect(&Tok::LParen)?;
        let guard_span = c.peek().span;
        let guard = match &c.peek().tok {
            Tok::Ident(w) if w == "eps" => {
                c.next();
                Guard::Eps
            }
            _ => Guard::Basic(parse_basic(&mut c, &atoms, k)?),
        };
        c.expect(&Tok::Comma)?;
        let update = parse_regset(&mut c, k)?;
        if guard.is_eps() && !update.is_empty() {
            return Err(ParseError::new(guard_span, "ε-rule must not update registers"));
        }
        c.expect(&Tok::RParen)?;
        c.expect(&Tok::Arrow)?;
        let target = lookup(&state_name(&mut c)?)?;
        if !c.at_line_end() {
            return Err(c.unexpected("end of line"));
        }
        rules.push(Rule {
            source,
            guard,
            update,
            target,
        });
    }
    BuchiRA::new(atoms, k, states, initial, rules, accepting)
        .map_err(|e| ParseError::new(SourceSpan { line: 1, column: 1, offset: 0 }, e.to_string()))
}

fn state_token(s: &str) -> String {
    if is_plain_ident(s) && !HEADERS.contains(&s) {
        s.to_string()
    } else {
        quote(s)
    }
}

/// Prints an automaton in the canonical text form.
pub fn serialize_bra(a: &BuchiRA) -> String {
    let mut out = String::new();
    let list = |out: &mut String, head: &str, items: Vec<String>| {
        out.push_str(head);
        for i in items {
            out.push(' ');
            out.push_str(&i);
        }
        out.push('\n');
    };
    list(&mut out, "atoms", a.atoms.clone());
    let _ = writeln!(out, "registers {}", a.k);
    list(&mut out, "states", a.states.iter().map(|s| state_token(s)).collect());
    let _ = writeln!(out, "initial {}", state_token(a.name(a.initial)));
    list(
        &mut out,
        "accepting",
        a.accepting.iter().map(|&q| state_token(a.name(q))).collect(),
    );
    for r in &a.rules {
        let _ = writeln!(
            out,
            "{} --({}, {})--> {}",
            state_token(a.name(r.source)),
            r.guard,
            r.update,
            state_token(a.name(r.target))
        );
    }
    out
}

/// Graphviz rendering of an automaton.
pub fn to_dot(a: &BuchiRA) -> String {
    let mut out = String::from("digraph bra {\n  rankdir=LR;\n  __start [shape=point];\n");
    for (i, name) in a.states.iter().enumerate() {
        let shape = if a.is_accepting(StateId(i)) { "doublecircle" } else { "ellipse" };
        let _ = writeln!(out, "  q{i} [label={}, shape={shape}];", quote(name));
    }
    let _ = writeln!(out, "  __start -> q{};", a.initial.0);
    for r in &a.rules {
        let label = format!("{}, {}", r.guard, r.update);
        let _ = writeln!(out, "  q{} -> q{} [label={}];", r.source.0, r.target.0, quote(&label));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::BasicFormula;

    #[test]
    fn universal() {
        let a = parse_bra("states q0\ninitial q0\naccepting q0\nq0 --(tt, {})--> q0\n").unwrap();
        assert_eq!(a.states, ["q0"]);
        assert_eq!(a.rules.len(), 1);
        assert_eq!(a.rules[0].guard, Guard::Basic(BasicFormula::True));
        assert!(a.is_accepting(StateId(0)));
    }

    #[test]
    fn epsilon_with_update() {
        let e = parse_bra("registers 1\nstates q r\ninitial q\nq --(eps, {1})--> r\n").unwrap_err();
        assert!(e.message.contains("must not update"));
        assert_eq!(e.span.line, 4);
    }

    #[test]
    fn unknown_state() {
        let e = parse_bra("states q\ninitial q\nq --(tt, {})--> r\n").unwrap_err();
        assert!(e.message.contains("unknown state `r`"));
        assert_eq!(e.span.column, 17);
    }

    #[test]
    fn quoted_names_round_trip() {
        let text = "atoms p\nregisters 1\nstates \"a b\" \"q\\\"\" states tt\ninitial \"a b\"\naccepting tt\n\
                    \"a b\" --(p & !up 1, {1})--> \"q\\\"\"\n\"q\\\"\" --(eps, {})--> tt\n\
                    tt --(tt, {})--> tt\n\"states\" --(ff, {})--> tt\n";
        let a = parse_bra(text).unwrap();
        assert_eq!(a.states, ["a b", "q\"", "states", "tt"]);
        let printed = serialize_bra(&a);
        assert_eq!(parse_bra(&printed).unwrap(), a);
        assert!(printed.contains("states \"a b\" \"q\\\"\" \"states\" tt\n"));
    }

    #[test]
    fn dot_output() {
        let a = parse_bra("states q0\ninitial q0\naccepting q0\nq0 --(tt, {})--> q0\n").unwrap();
        let dot = to_dot(&a);
        assert!(dot.contains("q0 [label=\"q0\", shape=doublecircle];"));
        assert!(dot.contains("q0 -> q0 [label=\"tt, {}\"];"));
    }
}
