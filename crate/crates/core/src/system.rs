//! Systems of equations.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub var: String,
    pub rhs: Formula,
}

/// A system of equations `V_1 = σ(V_1), …, V_t = σ(V_t)` together with its
/// declared atoms, register count, ω-variables and main variable.
///
/// Equations keep their declaration order, which fixes the order of every
/// derived artefact (serialization, automaton states, fresh names).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    pub atoms: Vec<String>,
    pub k: usize,
    pub equations: Vec<Equation>,
    pub omega: BTreeSet<String>,
    pub main: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("register {index} out of range [1, {k}]")]
    RegisterOutOfRange { index: usize, k: usize },
    #[error("duplicate equation for `{0}`")]
    DuplicateEquation(String),
    #[error("no ω-variable with right-hand side `tt`")]
    MissingTt,
    #[error("ω-variable `{omega}` and `{other}` have the same right-hand side")]
    NotInjective { omega: String, other: String },
}

impl EquationSystem {
    pub fn rhs(&self, var: &str) -> Option<&Formula> {
        self.equations.iter().find(|e| e.var == var).map(|e| &e.rhs)
    }

    pub fn rhs_mut(&mut self, var: &str) -> Option<&mut Formula> {
        self.equations.iter_mut().find(|e| e.var == var).map(|e| &mut e.rhs)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.equations.iter().map(|e| e.var.as_str())
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.equations.iter().any(|e| e.var == var)
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.equations.iter().position(|e| e.var == var)
    }

    pub fn is_omega(&self, var: &str) -> bool {
        self.omega.contains(var)
    }

    /// ω-variables in declaration order.
    pub fn omega_vars(&self) -> Vec<&str> {
        self.vars().filter(|v| self.omega.contains(*v)).collect()
    }

    /// The designated `V_tt`: the first ω-variable whose right-hand side is
    /// `tt`.
    pub fn vtt(&self) -> Option<&str> {
        self.equations
            .iter()
            .find(|e| self.omega.contains(&e.var) && e.rhs == Formula::True)
            .map(|e| e.var.as_str())
    }

    pub fn is_desugared(&self) -> bool {
        self.equations.iter().all(|e| e.rhs.is_desugared())
    }

    /// Checks scoping: every referenced variable, atom and register is
    /// declared, the main variable and ω-variables exist and no variable has
    /// two equations.
    pub fn check_scope(&self) -> Result<(), SystemError> {
        let mut seen = BTreeSet::new();
        for e in &self.equations {
            if !seen.insert(e.var.as_str()) {
                return Err(SystemError::DuplicateEquation(e.var.clone()));
            }
        }
        if !seen.contains(self.main.as_str()) {
            return Err(SystemError::UnknownVariable(self.main.clone()));
        }
        if let Some(v) = self.omega.iter().find(|v| !seen.contains(v.as_str())) {
            return Err(SystemError::UnknownVariable(v.clone()));
        }
        for e in &self.equations {
            if let Some(v) = e.rhs.variables().into_iter().find(|v| !seen.contains(v)) {
                return Err(SystemError::UnknownVariable(v.to_string()));
            }
            for b in e.rhs.basics() {
                if let Some(p) = b.atoms().into_iter().find(|p| !self.atoms.iter().any(|a| a == p)) {
                    return Err(SystemError::UnknownAtom(p.to_string()));
                }
                if let Some(r) = b.registers().into_iter().find(|&r| r == 0 || r > self.k) {
                    return Err(SystemError::RegisterOutOfRange { index: r, k: self.k });
                }
            }
            for regs in e.rhs.updates() {
                if let Some(r) = regs.iter().find(|&r| r == 0 || r > self.k) {
                    return Err(SystemError::RegisterOutOfRange { index: r, k: self.k });
                }
            }
        }
        Ok(())
    }

    /// Checks the well-formedness conditions on ω-variables: some ω-variable
    /// has right-hand side `tt`, and no ω-variable shares its right-hand side
    /// with any other variable.
    pub fn check_wellformed(&self) -> Result<(), SystemError> {
        self.check_scope()?;
        if self.vtt().is_none() {
            return Err(SystemError::MissingTt);
        }
        if let Some((omega, other)) = self.injectivity_violation() {
            return Err(SystemError::NotInjective { omega, other });
        }
        Ok(())
    }

    /// First pair `(V, V')` with `V` an ω-variable, `V ≠ V'` and
    /// `σ(V) = σ(V')`.
    pub fn injectivity_violation(&self) -> Option<(String, String)> {
        let mut by_rhs: BTreeMap<&Formula, Vec<&str>> = BTreeMap::new();
        for e in &self.equations {
            by_rhs.entry(&e.rhs).or_default().push(&e.var);
        }
        for e in &self.equations {
            if !self.omega.contains(&e.var) {
                continue;
            }
            if let Some(other) = by_rhs[&e.rhs].iter().find(|v| **v != e.var) {
                return Some((e.var.clone(), other.to_string()));
            }
        }
        None
    }

    /// Every name in use: variables and atoms.
    pub fn used_names(&self) -> BTreeSet<String> {
        self.equations
            .iter()
            .map(|e| e.var.clone())
            .chain(self.atoms.iter().cloned())
            .collect()
    }
}

/// Words that cannot be used as atom, variable or state names.
pub const KEYWORDS: &[&str] = &[
    "tt", "ff", "up", "X", "down", "eps", "atoms", "registers", "omega", "main", "states",
    "initial", "accepting", "prefix", "period",
];

/// Picks a name derived from `base` that is not in `taken`: `base'`,
/// `base''`, then `base'3`, `base'4`, ….
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    let ok = |n: &String| !taken.contains(n) && !KEYWORDS.contains(&n.as_str());
    for primes in 1..=2 {
        let candidate = format!("{base}{}", "'".repeat(primes));
        if ok(&candidate) {
            return candidate;
        }
    }
    (3..)
        .map(|n| format!("{base}'{n}"))
        .find(ok)
        .expect("unbounded name supply")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RegSet;
    use crate::formula::BasicFormula;

    fn small() -> EquationSystem {
        EquationSystem {
            atoms: vec!["p".into()],
            k: 1,
            equations: vec![
                Equation { var: "Vtt".into(), rhs: Formula::True },
                Equation {
                    var: "A".into(),
                    rhs: Formula::freeze_next(RegSet::from([1]), Formula::var("Vtt"), BasicFormula::atom("p")),
                },
            ],
            omega: ["Vtt".to_string()].into(),
            main: "A".into(),
        }
    }

    #[test]
    fn wellformed_small_system() {
        let s = small();
        assert_eq!(s.vtt(), Some("Vtt"));
        assert_eq!(s.check_wellformed(), Ok(()));
    }

    #[test]
    fn scope_errors() {
        let mut s = small();
        s.main = "V9".into();
        assert_eq!(s.check_scope(), Err(SystemError::UnknownVariable("V9".into())));

        let mut s = small();
        s.equations[1].rhs = Formula::freeze_next(RegSet::from([2]), Formula::True, BasicFormula::True);
        assert_eq!(s.check_scope(), Err(SystemError::RegisterOutOfRange { index: 2, k: 1 }));

        let mut s = small();
        s.equations[1].rhs = Formula::freeze_next(RegSet::empty(), Formula::True, BasicFormula::atom("q"));
        assert_eq!(s.check_scope(), Err(SystemError::UnknownAtom("q".into())));
    }

    #[test]
    fn injectivity_detected() {
        let mut s = small();
        s.equations.push(Equation { var: "B".into(), rhs: Formula::True });
        assert_eq!(
            s.check_wellformed(),
            Err(SystemError::NotInjective { omega: "Vtt".into(), other: "B".into() })
        );
    }

    #[test]
    fn fresh_names_follow_prime_scheme() {
        let mut taken: BTreeSet<String> = ["V2".to_string()].into();
        assert_eq!(fresh_name("V2", &taken), "V2'");
        taken.insert("V2'".into());
        assert_eq!(fresh_name("V2", &taken), "V2''");
        taken.insert("V2''".into());
        assert_eq!(fresh_name("V2", &taken), "V2'3");
    }
}
