//! From Büchi register automata to systems of equations, with the
//! preprocessing that the translation needs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::automaton::{BuchiRA, Guard, Rule, StateId};
use crate::data::RegSet;
use crate::formula::{BasicFormula, Formula};
use crate::system::{fresh_name, Equation, EquationSystem};
use crate::textio::is_plain_ident;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FromBraError {
    #[error("automaton has ε-rules; eliminate them first")]
    HasEpsilon,
    #[error("state `{0}` has no outgoing rule; totalize first")]
    NotTotal(String),
}

/// Removes ε-rules without changing the accepted language.
///
/// A consuming rule `(q', φ, R) → q''` reachable from `q` through ε-rules
/// becomes `(q, φ, R) → q''`. When the ε-path (including `q` and `q'`)
/// passes an accepting state and `q''` is not accepting, the new rule leads
/// to an accepting copy `q''+` of `q''` instead, which has the same rules as
/// `q''`. This way an accepting visit between two input positions is
/// remembered one position later, and ε-cycles alone never accept.
pub fn eliminate_epsilon(a: &BuchiRA) -> BuchiRA {
    if !a.has_epsilon() {
        return a.clone();
    }
    let n = a.states.len();
    // Consuming moves available from each state: (rule index, ε-path met F).
    let closure: Vec<Vec<(usize, bool)>> = (0..n).map(|q| closure_moves(a, StateId(q))).collect();

    let mut out = BuchiRA {
        atoms: a.atoms.clone(),
        k: a.k,
        states: a.states.clone(),
        initial: a.initial,
        rules: Vec::new(),
        accepting: a.accepting.clone(),
    };
    let mut copy_of: BTreeMap<StateId, StateId> = BTreeMap::new();
    let mut pending: VecDeque<(StateId, StateId)> = (0..n).map(|q| (StateId(q), StateId(q))).collect();
    while let Some((state, behaves_as)) = pending.pop_front() {
        for &(rule, met_accepting) in &closure[behaves_as.0] {
            let r = &a.rules[rule];
            let target = if met_accepting && !a.is_accepting(r.target) {
                *copy_of.entry(r.target).or_insert_with(|| {
                    let taken: BTreeSet<String> = out.states.iter().cloned().collect();
                    let mut name = format!("{}+", a.name(r.target));
                    while taken.contains(&name) {
                        name.push('+');
                    }
                    let id = out.add_state(name);
                    out.accepting.insert(id);
                    pending.push_back((id, r.target));
                    id
                })
            } else {
                r.target
            };
            out.push_rule(Rule {
                source: state,
                guard: r.guard.clone(),
                update: r.update.clone(),
                target,
            });
        }
    }
    out
}

/// Consuming rules reachable from `q` by ε-rules, each with whether some
/// ε-path to it visits an accepting state. Both flags are reported when
/// both kinds of path exist.
fn closure_moves(a: &BuchiRA, q: StateId) -> Vec<(usize, bool)> {
    let start = (q, a.is_accepting(q));
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut moves = BTreeSet::new();
    while let Some((x, met)) = queue.pop_front() {
        for (idx, r) in a.rules.iter().enumerate().filter(|(_, r)| r.source == x) {
            match r.guard {
                Guard::Eps => {
                    let next = (r.target, met || a.is_accepting(r.target));
                    if seen.insert(next) {
                        queue.push_back(next);
                    }
                }
                Guard::Basic(_) => {
                    moves.insert((idx, met));
                }
            }
        }
    }
    moves.into_iter().collect()
}

/// Adds `(q, ff, ∅) → q` to every state without outgoing rules.
pub fn totalize(a: &BuchiRA) -> BuchiRA {
    let mut out = a.clone();
    for q in 0..a.states.len() {
        if a.rules_from(StateId(q)).next().is_none() {
            out.push_rule(Rule {
                source: StateId(q),
                guard: Guard::Basic(BasicFormula::False),
                update: RegSet::empty(),
                target: StateId(q),
            });
        }
    }
    out
}

/// Variable names chosen by [`from_bra`].
#[derive(Debug, Clone)]
pub struct BraVariables {
    pub state: Vec<String>,
    pub rule: Vec<String>,
    pub tt: String,
}

/// The system with one variable per state and per rule:
/// `V_q = V_r1 ∨ … ∨ V_rm` over the rules leaving `q` in declaration order
/// (just `V_r1` for a single rule), `V_r = ↓_R X V_q' ∧ φ` for
/// `r = (q, φ, R) → q'`, and `V_tt = tt`. The ω-variables are the accepting
/// states' variables and `V_tt`; the main variable is that of the initial
/// state.
///
/// State variables are named `V_<state>` when the state name is a plain
/// identifier and `V_s<index>` otherwise; rule variables are `V_r<n>`,
/// counting from 1.
pub fn from_bra(a: &BuchiRA) -> Result<EquationSystem, FromBraError> {
    from_bra_named(a).map(|(s, _)| s)
}

pub fn from_bra_named(a: &BuchiRA) -> Result<(EquationSystem, BraVariables), FromBraError> {
    if a.has_epsilon() {
        return Err(FromBraError::HasEpsilon);
    }
    if let Some(q) = (0..a.states.len()).find(|&q| a.rules_from(StateId(q)).next().is_none()) {
        return Err(FromBraError::NotTotal(a.states[q].clone()));
    }
    let mut taken: BTreeSet<String> = a.atoms.iter().cloned().collect();
    let mut claim = |want: String| {
        let name = if taken.contains(&want) { fresh_name(&want, &taken) } else { want };
        taken.insert(name.clone());
        name
    };
    let state: Vec<String> = a
        .states
        .iter()
        .enumerate()
        .map(|(i, q)| claim(if is_plain_ident(q) { format!("V_{q}") } else { format!("V_s{i}") }))
        .collect();
    let rule: Vec<String> = (1..=a.rules.len()).map(|n| claim(format!("V_r{n}"))).collect();
    let tt = claim("V_tt".to_string());

    let mut equations = Vec::new();
    for (q, var) in state.iter().enumerate() {
        let leaving: Vec<Formula> = a
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.source.0 == q)
            .map(|(n, _)| Formula::var(rule[n].clone()))
            .collect();
        equations.push(Equation {
            var: var.clone(),
            rhs: Formula::any_of(leaving),
        });
    }
    for (r, var) in a.rules.iter().zip(&rule) {
        let Guard::Basic(guard) = &r.guard else {
            unreachable!("ε-free");
        };
        equations.push(Equation {
            var: var.clone(),
            rhs: Formula::freeze_next(r.update.clone(), Formula::var(state[r.target.0].clone()), guard.clone()),
        });
    }
    equations.push(Equation {
        var: tt.clone(),
        rhs: Formula::True,
    });
    let mut omega: BTreeSet<String> = a.accepting.iter().map(|q| state[q.0].clone()).collect();
    omega.insert(tt.clone());
    let system = EquationSystem {
        atoms: a.atoms.clone(),
        k: a.k,
        equations,
        omega,
        main: state[a.initial.0].clone(),
    };
    Ok((system, BraVariables { state, rule, tt }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::accepts;
    use crate::textio::{parse_bra, parse_lasso, serialize_system};

    fn universal() -> BuchiRA {
        parse_bra("registers 1\nstates q0\ninitial q0\naccepting q0\nq0 --(tt, {})--> q0\n").unwrap()
    }

    #[test]
    fn universal_system() {
        let s = from_bra(&universal()).unwrap();
        assert_eq!(
            serialize_system(&s),
            "atoms\nregisters 1\nomega V_q0 V_tt\nmain V_q0\nV_q0 = V_r1\nV_r1 = X V_q0\nV_tt = tt\n"
        );
        assert_eq!(s.check_wellformed(), Ok(()));
    }

    #[test]
    fn two_rules_give_binary_disjunction() {
        let a = parse_bra(
            "atoms p\nstates q \"r s\"\ninitial q\naccepting q\nq --(p, {})--> q\nq --(!p, {})--> \"r s\"\n\
             \"r s\" --(tt, {})--> q\n",
        )
        .unwrap();
        let s = from_bra(&a).unwrap();
        assert_eq!(s.rhs("V_q").unwrap().to_string(), "V_r1 | V_r2");
        assert_eq!(s.rhs("V_r2").unwrap().to_string(), "X V_s1 & !p");
        assert_eq!(s.check_wellformed(), Ok(()));
    }

    #[test]
    fn preconditions() {
        let a = parse_bra("states q\ninitial q\nq --(eps, {})--> q\n").unwrap();
        assert_eq!(from_bra(&a).unwrap_err(), FromBraError::HasEpsilon);
        let a = parse_bra("states q\ninitial q\n").unwrap();
        assert_eq!(from_bra(&a).unwrap_err(), FromBraError::NotTotal("q".into()));
    }

    #[test]
    fn name_clash_with_atom() {
        let a = parse_bra("atoms V_r1\nstates q\ninitial q\nq --(V_r1, {})--> q\n").unwrap();
        let s = from_bra(&a).unwrap();
        assert_eq!(s.rhs("V_q"), Some(&Formula::var("V_r1'")));
    }

    #[test]
    fn totalize_dead_state() {
        let a = parse_bra("states q r\ninitial q\nq --(tt, {})--> r\n").unwrap();
        let t = totalize(&a);
        assert_eq!(t.rules.len(), 2);
        assert_eq!(t.rules[1].guard, Guard::Basic(BasicFormula::False));
        assert_eq!(t.rules[1].source, StateId(1));
        assert_eq!(totalize(&t), t);
        assert_eq!(totalize(&universal()), universal());
    }

    #[test]
    fn epsilon_free_unchanged() {
        assert_eq!(eliminate_epsilon(&universal()), universal());
    }

    #[test]
    fn pure_epsilon_cycle() {
        let a = parse_bra("states q r\ninitial q\naccepting q\nq --(eps, {})--> r\nr --(eps, {})--> q\n").unwrap();
        let e = eliminate_epsilon(&a);
        assert!(e.rules.is_empty());
        let w = parse_lasso("prefix ; period ({},1)").unwrap();
        assert!(!accepts(&e, &w).unwrap());
    }

    #[test]
    fn accepting_state_left_by_epsilon() {
        // f is accepting but only reachable and left through ε-rules.
        let a = parse_bra("states q f\ninitial q\naccepting f\nq --(eps, {})--> f\nf --(eps, {})--> q\nq --(tt, {})--> q\n")
            .unwrap();
        let e = eliminate_epsilon(&a);
        assert!(!e.has_epsilon());
        assert_eq!(e.states, ["q", "f", "q+"]);
        let w = parse_lasso("prefix ; period ({},1)").unwrap();
        assert!(accepts(&a, &w).unwrap());
        assert!(accepts(&e, &w).unwrap());
    }
}
