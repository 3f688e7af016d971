//! From a normal-form system of equations to an equivalent Büchi register
//! automaton.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::automaton::{BuchiRA, Guard, Rule, StateId};
use crate::data::RegSet;
use crate::formula::{BasicFormula, Formula};
use crate::normalize::{is_normal, Shape};
use crate::system::{EquationSystem, SystemError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("equation for `{0}` is not in normal form")]
    NotNormal(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// The automaton together with the state of every variable.
#[derive(Debug, Clone)]
pub struct Translation {
    pub automaton: BuchiRA,
    pub state_of: BTreeMap<String, StateId>,
}

/// Builds the automaton whose states are the right-hand sides of `s`.
///
/// Variables with equal right-hand sides share a state, named by the
/// canonical text of that right-hand side. The rules are
/// `(tt, tt, ∅) → tt`, one ε-rule from each disjunction to each of its
/// operands, and `(↓_R X V ∧ φ, φ, R) → σ(V)` for every next-formula. The
/// accepting states are the right-hand sides of ω-variables.
///
/// The input must be well-formed and in normal form; disjunctions may have
/// any number of operands and `V = V'` counts as a one-operand disjunction.
pub fn to_bra(s: &EquationSystem) -> Result<BuchiRA, TranslateError> {
    translate(s).map(|t| t.automaton)
}

pub fn translate(s: &EquationSystem) -> Result<Translation, TranslateError> {
    s.check_wellformed()?;
    if !is_normal(s, Shape::Extended) {
        let bad = s
            .equations
            .iter()
            .find(|e| crate::normalize::shape_of(&e.rhs, Shape::Extended).is_none())
            .expect("some equation is not normal");
        return Err(TranslateError::NotNormal(bad.var.clone()));
    }

    let mut states: Vec<String> = Vec::new();
    let mut by_label: BTreeMap<String, StateId> = BTreeMap::new();
    let mut state_of: BTreeMap<String, StateId> = BTreeMap::new();
    let mut defining: Vec<&Formula> = Vec::new();
    for e in &s.equations {
        let label = e.rhs.to_string();
        let id = *by_label.entry(label.clone()).or_insert_with(|| {
            states.push(label);
            defining.push(&e.rhs);
            StateId(states.len() - 1)
        });
        state_of.insert(e.var.clone(), id);
    }
    let tt = by_label["tt"];
    let target = |op: &Formula| match op {
        Formula::Var(v) => state_of[v],
        Formula::True => tt,
        other => unreachable!("operand {other}"),
    };

    let mut rules = vec![Rule {
        source: tt,
        guard: Guard::Basic(BasicFormula::True),
        update: RegSet::empty(),
        target: tt,
    }];
    for (i, rhs) in defining.iter().enumerate() {
        let source = StateId(i);
        match rhs {
            Formula::True => {}
            Formula::FreezeNext { regs, next, guard } => rules.push(Rule {
                source,
                guard: Guard::Basic(guard.clone()),
                update: regs.clone(),
                target: target(next),
            }),
            disjunction => {
                for d in disjunction.disjuncts() {
                    rules.push(Rule {
                        source,
                        guard: Guard::Eps,
                        update: RegSet::empty(),
                        target: target(d),
                    });
                }
            }
        }
    }
    let accepting: BTreeSet<StateId> = s.omega.iter().map(|v| state_of[v]).collect();
    let automaton = BuchiRA::new(
        s.atoms.clone(),
        s.k,
        states,
        state_of[&s.main],
        rules,
        accepting,
    )
    .expect("construction respects automaton invariants");
    Ok(Translation { automaton, state_of })
}
