//! Random systems, automata and lasso words for differential testing.
//!
//! All generators are deterministic functions of the random source.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::automaton::{BuchiRA, Guard, Rule, StateId};
use crate::data::{Datum, LassoWord, Letter, RegSet};
use crate::formula::{BasicFormula, Formula};
use crate::system::{Equation, EquationSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    /// Bound on automaton states and on non-`tt` variables.
    pub max_states: usize,
    pub max_regs: usize,
    pub max_atoms: usize,
    pub max_prefix: usize,
    pub max_period: usize,
    /// Data values are drawn from `0..data_pool`.
    pub data_pool: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_states: 4,
            max_regs: 2,
            max_atoms: 2,
            max_prefix: 3,
            max_period: 2,
            data_pool: 3,
        }
    }
}

fn atom_names(n: usize) -> Vec<String> {
    let names = ["p", "q", "r", "s", "t", "u"];
    (0..n)
        .map(|i| names.get(i).map_or_else(|| format!("a{i}"), |s| s.to_string()))
        .collect()
}

pub fn random_letter(rng: &mut impl Rng, atoms: &[String], cfg: &GenConfig) -> Letter {
    let set: Vec<&String> = atoms.iter().filter(|_| rng.gen_bool(0.5)).collect();
    Letter::new(set, Datum::Val(rng.gen_range(0..cfg.data_pool.max(1))))
}

pub fn random_word(rng: &mut impl Rng, atoms: &[String], cfg: &GenConfig) -> LassoWord {
    let l = rng.gen_range(0..=cfg.max_prefix);
    let p = rng.gen_range(1..=cfg.max_period.max(1));
    let prefix = (0..l).map(|_| random_letter(rng, atoms, cfg)).collect();
    let period = (0..p).map(|_| random_letter(rng, atoms, cfg)).collect();
    LassoWord::new(prefix, period).expect("non-empty period")
}

fn random_literal(rng: &mut impl Rng, atoms: &[String], k: usize) -> BasicFormula {
    let mut kinds = vec![0];
    if !atoms.is_empty() {
        kinds.extend([1, 2]);
    }
    if k > 0 {
        kinds.extend([3, 4]);
    }
    match *kinds.choose(rng).unwrap() {
        0 if rng.gen_bool(0.15) => BasicFormula::False,
        0 => BasicFormula::True,
        1 => BasicFormula::atom(atoms.choose(rng).unwrap().clone()),
        2 => BasicFormula::neg_atom(atoms.choose(rng).unwrap().clone()),
        3 => BasicFormula::Up(rng.gen_range(1..=k)),
        _ => BasicFormula::NegUp(rng.gen_range(1..=k)),
    }
}

/// A conjunction of up to two literals.
pub fn random_basic(rng: &mut impl Rng, atoms: &[String], k: usize) -> BasicFormula {
    let first = random_literal(rng, atoms, k);
    if rng.gen_bool(0.4) {
        BasicFormula::and(first, random_literal(rng, atoms, k))
    } else {
        first
    }
}

pub fn random_regset(rng: &mut impl Rng, k: usize) -> RegSet {
    let mut r = RegSet::empty();
    for i in 1..=k {
        if rng.gen_bool(0.35) {
            r.insert(i);
        }
    }
    r
}

fn random_shape_header(rng: &mut impl Rng, cfg: &GenConfig) -> (Vec<String>, usize) {
    let atoms = atom_names(rng.gen_range(0..=cfg.max_atoms));
    let k = rng.gen_range(0..=cfg.max_regs);
    (atoms, k)
}

fn random_operand(rng: &mut impl Rng, vars: &[String]) -> Formula {
    if rng.gen_bool(0.1) {
        Formula::True
    } else {
        Formula::var(vars.choose(rng).unwrap().clone())
    }
}

/// A well-formed system in strict normal form: `Vtt = tt` plus up to
/// `max_states` variables defined by binary disjunctions of operands or
/// next-formulas.
pub fn random_normal_system(rng: &mut impl Rng, cfg: &GenConfig) -> EquationSystem {
    loop {
        let (atoms, k) = random_shape_header(rng, cfg);
        let n = rng.gen_range(1..=cfg.max_states.max(1));
        let mut vars: Vec<String> = (1..=n).map(|i| format!("V{i}")).collect();
        vars.push("Vtt".into());
        let mut equations = Vec::new();
        for v in &vars[..n] {
            let rhs = if rng.gen_bool(0.3) {
                Formula::or(random_operand(rng, &vars), random_operand(rng, &vars))
            } else {
                Formula::freeze_next(random_regset(rng, k), random_operand(rng, &vars), random_basic(rng, &atoms, k))
            };
            equations.push(Equation { var: v.clone(), rhs });
        }
        equations.push(Equation { var: "Vtt".into(), rhs: Formula::True });
        let mut omega: BTreeSet<String> = vars[..n].iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        omega.insert("Vtt".into());
        let s = EquationSystem {
            atoms,
            k,
            equations,
            omega,
            main: vars[rng.gen_range(0..n)].clone(),
        };
        if s.check_wellformed().is_ok() {
            return s;
        }
    }
}

fn random_formula(rng: &mut impl Rng, vars: &[String], atoms: &[String], k: usize, depth: usize) -> Formula {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return random_operand(rng, vars);
    }
    if rng.gen_bool(0.4) {
        Formula::or(
            random_formula(rng, vars, atoms, k, depth - 1),
            random_formula(rng, vars, atoms, k, depth - 1),
        )
    } else {
        Formula::freeze_next(
            random_regset(rng, k),
            random_formula(rng, vars, atoms, k, depth - 1),
            random_basic(rng, atoms, k),
        )
    }
}

/// A well-formed desugared system with nested right-hand sides, usually
/// not in normal form.
pub fn random_system(rng: &mut impl Rng, cfg: &GenConfig) -> EquationSystem {
    loop {
        let (atoms, k) = random_shape_header(rng, cfg);
        let n = rng.gen_range(1..=cfg.max_states.max(1));
        let mut vars: Vec<String> = (1..=n).map(|i| format!("V{i}")).collect();
        vars.push("Vtt".into());
        let mut equations: Vec<Equation> = vars[..n]
            .iter()
            .map(|v| Equation {
                var: v.clone(),
                rhs: random_formula(rng, &vars, &atoms, k, 3),
            })
            .collect();
        equations.push(Equation { var: "Vtt".into(), rhs: Formula::True });
        let mut omega: BTreeSet<String> = vars[..n].iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        omega.insert("Vtt".into());
        let s = EquationSystem {
            atoms,
            k,
            equations,
            omega,
            main: vars[rng.gen_range(0..n)].clone(),
        };
        if s.check_wellformed().is_ok() {
            return s;
        }
    }
}

fn random_states(rng: &mut impl Rng, cfg: &GenConfig) -> (Vec<String>, BTreeSet<StateId>) {
    let n = rng.gen_range(1..=cfg.max_states.max(1));
    let states = (0..n).map(|i| format!("q{i}")).collect();
    let accepting = (0..n).filter(|_| rng.gen_bool(0.4)).map(StateId).collect();
    (states, accepting)
}

fn consuming_rule(rng: &mut impl Rng, atoms: &[String], k: usize, source: usize, n: usize) -> Rule {
    Rule {
        source: StateId(source),
        guard: Guard::Basic(random_basic(rng, atoms, k)),
        update: random_regset(rng, k),
        target: StateId(rng.gen_range(0..n)),
    }
}

/// An ε-free automaton in which every state has one to three rules.
pub fn random_bra(rng: &mut impl Rng, cfg: &GenConfig) -> BuchiRA {
    let (atoms, k) = random_shape_header(rng, cfg);
    let (states, accepting) = random_states(rng, cfg);
    let n = states.len();
    let mut rules = Vec::new();
    for q in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            rules.push(consuming_rule(rng, &atoms, k, q, n));
        }
    }
    BuchiRA::new(atoms, k, states, StateId(0), rules, accepting).expect("valid by construction")
}

/// An automaton with ε-rules, always including an ε-cycle through an
/// accepting state, and possibly states without rules.
pub fn random_eps_bra(rng: &mut impl Rng, cfg: &GenConfig) -> BuchiRA {
    let (atoms, k) = random_shape_header(rng, cfg);
    let (states, mut accepting) = random_states(rng, cfg);
    let n = states.len();
    let mut rules = Vec::new();
    for q in 0..n {
        for _ in 0..rng.gen_range(0..=2) {
            rules.push(consuming_rule(rng, &atoms, k, q, n));
        }
        if rng.gen_bool(0.4) {
            rules.push(Rule {
                source: StateId(q),
                guard: Guard::Eps,
                update: RegSet::empty(),
                target: StateId(rng.gen_range(0..n)),
            });
        }
    }
    let f = rng.gen_range(0..n);
    let g = rng.gen_range(0..n);
    accepting.insert(StateId(f));
    for (x, y) in [(f, g), (g, f)] {
        rules.push(Rule {
            source: StateId(x),
            guard: Guard::Eps,
            update: RegSet::empty(),
            target: StateId(y),
        });
    }
    BuchiRA::new(atoms, k, states, StateId(0), rules, accepting).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{is_normal, Shape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_meet_their_contracts() {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = random_normal_system(&mut rng, &cfg);
            assert!(s.check_wellformed().is_ok());
            assert!(is_normal(&s, Shape::Strict));
            assert!(s.equations.len() <= cfg.max_states + 1);
            let s = random_system(&mut rng, &cfg);
            assert!(s.check_wellformed().is_ok());
            let a = random_bra(&mut rng, &cfg);
            assert!(!a.has_epsilon() && a.is_total());
            assert!(a.states.len() <= cfg.max_states);
            let e = random_eps_bra(&mut rng, &cfg);
            assert!(e.has_epsilon());
            let w = random_word(&mut rng, &a.atoms, &cfg);
            assert!(w.prefix_len() <= 3 && (1..=2).contains(&w.period_len()));
        }
    }

    #[test]
    fn deterministic_in_the_seed() {
        let cfg = GenConfig::default();
        let a = random_normal_system(&mut ChaCha8Rng::seed_from_u64(9), &cfg);
        let b = random_normal_system(&mut ChaCha8Rng::seed_from_u64(9), &cfg);
        assert_eq!(a, b);
    }
}
