//! Büchi register automata.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::data::{Assignment, RegSet};
use crate::formula::BasicFormula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    Eps,
    Basic(BasicFormula),
}

impl Guard {
    pub fn is_eps(&self) -> bool {
        matches!(self, Guard::Eps)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Eps => f.write_str("eps"),
            Guard::Basic(b) => write!(f, "{b}"),
        }
    }
}

/// `(source, guard, update) → target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub source: StateId,
    pub guard: Guard,
    pub update: RegSet,
    pub target: StateId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("ε-rule from `{0}` updates registers")]
    EpsilonUpdate(String),
    #[error("register {index} out of range [1, {k}]")]
    RegisterOutOfRange { index: usize, k: usize },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
}

/// A Büchi register automaton over `2^atoms × D` with `k` registers.
///
/// States are identified by index; `states[i]` is the display name of
/// `StateId(i)`. Rules are kept in declaration order without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiRA {
    pub atoms: Vec<String>,
    pub k: usize,
    pub states: Vec<String>,
    pub initial: StateId,
    pub rules: Vec<Rule>,
    pub accepting: BTreeSet<StateId>,
}

impl BuchiRA {
    /// Builds an automaton and checks its structural invariants.
    pub fn new(
        atoms: Vec<String>,
        k: usize,
        states: Vec<String>,
        initial: StateId,
        rules: Vec<Rule>,
        accepting: BTreeSet<StateId>,
    ) -> Result<Self, AutomatonError> {
        let mut a = BuchiRA {
            atoms,
            k,
            states,
            initial,
            rules: Vec::new(),
            accepting,
        };
        for r in rules {
            a.push_rule(r);
        }
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), AutomatonError> {
        let n = self.states.len();
        let mut names = BTreeSet::new();
        for s in &self.states {
            if !names.insert(s) {
                return Err(AutomatonError::DuplicateState(s.clone()));
            }
        }
        let check = |s: StateId| {
            if s.0 < n {
                Ok(())
            } else {
                Err(AutomatonError::UnknownState(s.0))
            }
        };
        check(self.initial)?;
        for &s in &self.accepting {
            check(s)?;
        }
        for r in &self.rules {
            check(r.source)?;
            check(r.target)?;
            if let Some(index) = r.update.iter().find(|&i| i == 0 || i > self.k) {
                return Err(AutomatonError::RegisterOutOfRange { index, k: self.k });
            }
            match &r.guard {
                Guard::Eps if !r.update.is_empty() => {
                    return Err(AutomatonError::EpsilonUpdate(self.states[r.source.0].clone()));
                }
                Guard::Eps => {}
                Guard::Basic(b) => {
                    if let Some(p) = b.atoms().into_iter().find(|p| !self.atoms.iter().any(|a| a == p)) {
                        return Err(AutomatonError::UnknownAtom(p.to_string()));
                    }
                    if let Some(index) = b.registers().into_iter().find(|&i| i == 0 || i > self.k) {
                        return Err(AutomatonError::RegisterOutOfRange { index, k: self.k });
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds a rule unless an identical one exists. Returns whether it was new.
    pub fn push_rule(&mut self, rule: Rule) -> bool {
        if self.rules.contains(&rule) {
            false
        } else {
            self.rules.push(rule);
            true
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.states.push(name.into());
        StateId(self.states.len() - 1)
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting.contains(&s)
    }

    /// `δ|_q`: rules leaving `q`, in declaration order.
    pub fn rules_from(&self, q: StateId) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.source == q)
    }

    pub fn has_epsilon(&self) -> bool {
        self.rules.iter().any(|r| r.guard.is_eps())
    }

    /// Whether every state has an outgoing rule.
    pub fn is_total(&self) -> bool {
        (0..self.states.len()).all(|q| self.rules.iter().any(|r| r.source.0 == q))
    }
}

/// `(q, θ, w[i..])`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstantaneousDescription {
    pub state: StateId,
    pub assignment: Assignment,
    pub position: usize,
}

impl InstantaneousDescription {
    pub fn new(state: StateId, assignment: Assignment, position: usize) -> Self {
        assert!(position >= 1, "positions are 1-based");
        InstantaneousDescription {
            state,
            assignment,
            position,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_rule_with_update_rejected() {
        let err = BuchiRA::new(
            vec![],
            1,
            vec!["q".into(), "r".into()],
            StateId(0),
            vec![Rule {
                source: StateId(0),
                guard: Guard::Eps,
                update: RegSet::from([1]),
                target: StateId(1),
            }],
            BTreeSet::new(),
        )
        .unwrap_err();
        assert_eq!(err, AutomatonError::EpsilonUpdate("q".into()));
    }

    #[test]
    fn duplicate_rules_collapse() {
        let rule = Rule {
            source: StateId(0),
            guard: Guard::Basic(BasicFormula::True),
            update: RegSet::empty(),
            target: StateId(0),
        };
        let a = BuchiRA::new(
            vec![],
            0,
            vec!["q".into()],
            StateId(0),
            vec![rule.clone(), rule],
            [StateId(0)].into(),
        )
        .unwrap();
        assert_eq!(a.rules.len(), 1);
        assert!(a.is_total());
        assert!(!a.has_epsilon());
    }

    #[test]
    fn endpoints_checked() {
        let err = BuchiRA::new(
            vec![],
            0,
            vec!["q".into()],
            StateId(3),
            vec![],
            BTreeSet::new(),
        )
        .unwrap_err();
        assert_eq!(err, AutomatonError::UnknownState(3));
    }
}
