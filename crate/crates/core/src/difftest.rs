//! Differential property campaigns over random inputs, with greedy
//! shrinking of failures.
//!
//! Every case is a pure function of the campaign seed, the input family
//! and the case index, so campaigns are reproducible and can run in
//! parallel.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::automaton::{BuchiRA, Guard, InstantaneousDescription, StateId};
use crate::bra2mu::{eliminate_epsilon, from_bra, from_bra_named, totalize};
use crate::data::{Assignment, Datum, LassoWord, Letter, RegSet};
use crate::engine::{accepts, reach};
use crate::formula::{BasicFormula, Formula};
use crate::gen::{self, GenConfig};
use crate::mu2bra::{to_bra, translate};
use crate::normalize::{is_normal, normal_form, shape_of, Shape};
use crate::oracle::{satisfies, Oracle, Tuple, Verdict, WindowChoice};
use crate::system::EquationSystem;
use crate::textio::{serialize_bra, serialize_lasso, serialize_system};

/// One generated input. Which parts are present depends on the family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub system: Option<EquationSystem>,
    pub automaton: Option<BuchiRA>,
    pub words: Vec<LassoWord>,
    /// Extra randomness for properties that sample environments or
    /// mutations; kept fixed while shrinking.
    pub salt: u64,
}

impl Case {
    /// The case's files, named as they would be written to disk.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if let Some(s) = &self.system {
            out.push(("system.mu".to_string(), serialize_system(s)));
        }
        if let Some(a) = &self.automaton {
            out.push(("automaton.bra".to_string(), serialize_bra(a)));
        }
        for (n, w) in self.words.iter().enumerate() {
            out.push((format!("word{}.lasso", n + 1), serialize_lasso(w)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    /// Holds; `tuples` counts the individual comparisons made.
    Pass { tuples: u64 },
    /// The oracle could not decide some instance; nothing was violated.
    Inconclusive,
    Fail(String),
    /// The case does not meet the property's preconditions.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Family {
    NormalSystem,
    GeneralSystem,
    Automaton,
    EpsAutomaton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    /// Oracle tuples against engine reachability.
    TuplesVsRuns,
    /// Oracle satisfaction against acceptance by the translated automaton.
    SatVsAccept,
    /// Acceptance is preserved by the round trip through systems.
    BraRoundTrip,
    EpsElim,
    Totalize,
    /// ε-elimination, totalization and the round trip together.
    Preprocess,
    NormalForm,
    Monotonicity,
    Locality,
    Periodicity,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::TuplesVsRuns,
        Property::SatVsAccept,
        Property::BraRoundTrip,
        Property::EpsElim,
        Property::Totalize,
        Property::Preprocess,
        Property::NormalForm,
        Property::Monotonicity,
        Property::Locality,
        Property::Periodicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::TuplesVsRuns => "tuples-vs-runs",
            Property::SatVsAccept => "sat-vs-accept",
            Property::BraRoundTrip => "bra-round-trip",
            Property::EpsElim => "eps-elim",
            Property::Totalize => "totalize",
            Property::Preprocess => "preprocess-round-trip",
            Property::NormalForm => "normal-form",
            Property::Monotonicity => "monotonicity",
            Property::Locality => "locality",
            Property::Periodicity => "periodicity",
        }
    }

    fn family(self) -> Family {
        match self {
            Property::TuplesVsRuns | Property::SatVsAccept => Family::NormalSystem,
            Property::BraRoundTrip => Family::Automaton,
            Property::EpsElim | Property::Totalize | Property::Preprocess => Family::EpsAutomaton,
            Property::NormalForm | Property::Monotonicity | Property::Locality | Property::Periodicity => {
                Family::GeneralSystem
            }
        }
    }

    pub fn check(self, case: &Case) -> Check {
        match self {
            Property::TuplesVsRuns => check_tuples_vs_runs(case),
            Property::SatVsAccept => check_sat_vs_accept(case),
            Property::BraRoundTrip => check_bra_round_trip(case),
            Property::EpsElim => check_preserves(case, eliminate_epsilon),
            Property::Totalize => check_preserves(case, totalize),
            Property::Preprocess => check_preprocess(case),
            Property::NormalForm => check_normal_form(case),
            Property::Monotonicity => check_monotonicity(case),
            Property::Locality => check_locality(case),
            Property::Periodicity => check_periodicity(case),
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == name)
    }
}

fn family_stream(f: Family) -> u64 {
    match f {
        Family::NormalSystem => 1,
        Family::GeneralSystem => 2,
        Family::Automaton => 3,
        Family::EpsAutomaton => 4,
    }
}

fn generate(family: Family, seed: u64, index: u64, cfg: &GenConfig) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family_stream(family) << 40 | index);
    let (system, automaton, words) = match family {
        Family::NormalSystem => {
            let s = gen::random_normal_system(&mut rng, cfg);
            let w = gen::random_word(&mut rng, &s.atoms, cfg);
            (Some(s), None, vec![w])
        }
        Family::GeneralSystem => {
            let s = gen::random_system(&mut rng, cfg);
            let ws = (0..2).map(|_| gen::random_word(&mut rng, &s.atoms, cfg)).collect();
            (Some(s), None, ws)
        }
        Family::Automaton => {
            let a = gen::random_bra(&mut rng, cfg);
            let ws = (0..5).map(|_| gen::random_word(&mut rng, &a.atoms, cfg)).collect();
            (None, Some(a), ws)
        }
        Family::EpsAutomaton => {
            let a = gen::random_eps_bra(&mut rng, cfg);
            let ws = (0..3).map(|_| gen::random_word(&mut rng, &a.atoms, cfg)).collect();
            (None, Some(a), ws)
        }
    };
    Case {
        system,
        automaton,
        words,
        salt: rng.gen(),
    }
}

/// The case a campaign with `seed` checks `property` on at `index`.
pub fn case_for(property: Property, seed: u64, index: u64, cfg: &GenConfig) -> Case {
    generate(property.family(), seed, index, cfg)
}

fn tuples_window(w: &LassoWord) -> usize {
    w.prefix_len() + 2 * w.period_len() + 1
}

fn check_tuples_vs_runs(case: &Case) -> Check {
    let (Some(s), Some(w)) = (&case.system, case.words.first()) else {
        return Check::Skip;
    };
    if s.check_wellformed().is_err() || !is_normal(s, Shape::Extended) {
        return Check::Skip;
    }
    let n = tuples_window(w);
    let Ok(o) = Oracle::new(s, w, n) else {
        return Check::Skip;
    };
    let t = translate(s).expect("well-formed normal system");
    let lfp = o.lfp().env;
    let omega: Vec<&str> = s.omega_vars();
    let thetas: Vec<_> = o.all_assignments().collect();
    let mut tuples = 0;
    for v in s.vars() {
        for i in 1..=n {
            for theta in &thetas {
                let from = InstantaneousDescription::new(t.state_of[v], theta.clone(), i);
                let reached = reach(&t.automaton, w, &from, n);
                for j in i..=n {
                    for theta2 in &thetas {
                        for &x in &omega {
                            let tuple = Tuple {
                                i,
                                theta: theta.clone(),
                                j,
                                theta2: theta2.clone(),
                                x: x.to_string(),
                            };
                            let by_oracle = o.contains(&lfp, v, &tuple);
                            let target = InstantaneousDescription::new(t.state_of[x], theta2.clone(), j);
                            let by_engine = reached.contains(&target);
                            tuples += 1;
                            if by_oracle != by_engine {
                                return Check::Fail(format!(
                                    "{tuple} in lfp({v}): oracle {by_oracle}, engine {by_engine} (window {n})"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Check::Pass { tuples }
}

fn check_sat_vs_accept(case: &Case) -> Check {
    let (Some(s), Some(w)) = (&case.system, case.words.first()) else {
        return Check::Skip;
    };
    if s.check_wellformed().is_err() || !is_normal(s, Shape::Extended) {
        return Check::Skip;
    }
    let a = to_bra(s).expect("well-formed normal system");
    let by_engine = match accepts(&a, w) {
        Ok(b) => b,
        Err(e) => return Check::Fail(format!("engine: {e}")),
    };
    match satisfies(s, w, WindowChoice::Auto) {
        Ok(out) => match out.verdict {
            Verdict::Inconclusive { .. } => Check::Inconclusive,
            v if (v == Verdict::Sat) == by_engine => Check::Pass { tuples: 1 },
            v => Check::Fail(format!("oracle {v:?} at window {}, engine accepts = {by_engine}", out.window)),
        },
        Err(e) => Check::Fail(format!("oracle: {e}")),
    }
}

fn same_acceptance(a: &BuchiRA, b: &BuchiRA, words: &[LassoWord], what: &str) -> Check {
    for (n, w) in words.iter().enumerate() {
        match (accepts(a, w), accepts(b, w)) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(x), Ok(y)) => {
                return Check::Fail(format!("word{}: original accepts = {x}, {what} accepts = {y}", n + 1));
            }
            (Err(e), _) | (_, Err(e)) => return Check::Fail(format!("engine: {e}")),
        }
    }
    Check::Pass { tuples: words.len() as u64 }
}

fn check_bra_round_trip(case: &Case) -> Check {
    let Some(a) = &case.automaton else {
        return Check::Skip;
    };
    let Ok((s, names)) = from_bra_named(a) else {
        return Check::Skip;
    };
    if let Err(e) = s.check_wellformed() {
        return Check::Fail(format!("from_bra output is ill-formed: {e}"));
    }
    let t = match translate(&s) {
        Ok(t) => t,
        Err(e) => return Check::Fail(format!("to_bra(from_bra(a)): {e}")),
    };
    let Check::Pass { tuples: words } = same_acceptance(a, &t.automaton, &case.words, "round trip") else {
        return same_acceptance(a, &t.automaton, &case.words, "round trip");
    };
    // Reachability between states is preserved on a window of the first word.
    let Some(w) = case.words.first() else {
        return Check::Pass { tuples: words };
    };
    let n = tuples_window(w);
    let thetas = assignments_over(w, a.k);
    let image = |q: usize| t.state_of[&names.state[q]];
    let mut tuples = words;
    for q in 0..a.states.len() {
        for i in 1..=n {
            for theta in &thetas {
                let r1 = reach(a, w, &InstantaneousDescription::new(StateId(q), theta.clone(), i), n);
                let r2 = reach(&t.automaton, w, &InstantaneousDescription::new(image(q), theta.clone(), i), n);
                for q2 in 0..a.states.len() {
                    for j in i..=n {
                        for theta2 in &thetas {
                            let x = r1.contains(&InstantaneousDescription::new(StateId(q2), theta2.clone(), j));
                            let y = r2.contains(&InstantaneousDescription::new(image(q2), theta2.clone(), j));
                            tuples += 1;
                            if x != y {
                                return Check::Fail(format!(
                                    "({}, {theta}, {i}) reaches ({}, {theta2}, {j}): automaton {x}, round trip {y}",
                                    a.name(StateId(q)),
                                    a.name(StateId(q2))
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Check::Pass { tuples }
}

/// All assignments over the data of `w`, `⊥` and one value absent from `w`.
fn assignments_over(w: &LassoWord, k: usize) -> Vec<Assignment> {
    let mut domain = w.data_domain();
    let fresh = domain
        .iter()
        .filter_map(|d| match d {
            Datum::Val(v) => Some(v + 1),
            Datum::Bot => None,
        })
        .max()
        .unwrap_or(0);
    domain.push(Datum::Val(fresh));
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Datum>| {
                domain.iter().map(move |&d| {
                    let mut next = prefix.clone();
                    next.push(d);
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(Assignment::from_values).collect()
}

fn check_preserves(case: &Case, f: fn(&BuchiRA) -> BuchiRA) -> Check {
    let Some(a) = &case.automaton else {
        return Check::Skip;
    };
    let b = f(a);
    if let Err(e) = b.validate() {
        return Check::Fail(format!("invalid output: {e}"));
    }
    same_acceptance(a, &b, &case.words, "transformed")
}

fn check_preprocess(case: &Case) -> Check {
    let Some(a) = &case.automaton else {
        return Check::Skip;
    };
    let b = totalize(&eliminate_epsilon(a));
    if b.has_epsilon() || !b.is_total() {
        return Check::Fail("preprocessing left ε-rules or dead states".into());
    }
    let s = match from_bra(&b) {
        Ok(s) => s,
        Err(e) => return Check::Fail(format!("from_bra: {e}")),
    };
    match to_bra(&s) {
        Ok(c) => same_acceptance(a, &c, &case.words, "round trip"),
        Err(e) => Check::Fail(format!("to_bra: {e}")),
    }
}

fn check_normal_form(case: &Case) -> Check {
    let Some(s) = &case.system else {
        return Check::Skip;
    };
    if s.check_wellformed().is_err() || !s.is_desugared() {
        return Check::Skip;
    }
    let nf = match normal_form(s) {
        Ok(nf) => nf,
        Err(e) => return Check::Fail(format!("normal_form: {e}")),
    };
    if let Some(e) = nf.equations.iter().find(|e| shape_of(&e.rhs, Shape::Strict).is_none()) {
        return Check::Fail(format!("`{} = {}` is not a normal-form equation", e.var, e.rhs));
    }
    if let Err(e) = nf.check_wellformed() {
        return Check::Fail(format!("normal form is ill-formed: {e}"));
    }
    for v in nf.vars() {
        if !s.contains_var(v) && nf.is_omega(v) {
            return Check::Fail(format!("fresh variable `{v}` is an ω-variable"));
        }
    }
    if s.vars().any(|v| !nf.contains_var(v) || s.is_omega(v) != nf.is_omega(v)) || s.main != nf.main {
        return Check::Fail("original variables, ω-set or main variable changed".into());
    }
    let a = to_bra(&nf).expect("checked normal and well-formed");
    let mut inconclusive = false;
    for (n, w) in case.words.iter().enumerate() {
        let before = satisfies(s, w, WindowChoice::Auto);
        let after = satisfies(&nf, w, WindowChoice::Auto);
        let (Ok(before), Ok(after)) = (before, after) else {
            return Check::Fail("oracle error".into());
        };
        let by_engine = match accepts(&a, w) {
            Ok(b) => b,
            Err(e) => return Check::Fail(format!("engine: {e}")),
        };
        for (what, out) in [("original", before), ("normal form", after)] {
            match out.verdict {
                Verdict::Inconclusive { .. } => inconclusive = true,
                v if (v == Verdict::Sat) != by_engine => {
                    return Check::Fail(format!(
                        "word{}: oracle on {what} says {v:?}, automaton of normal form accepts = {by_engine}",
                        n + 1
                    ))
                }
                _ => {}
            }
        }
    }
    if inconclusive {
        Check::Inconclusive
    } else {
        Check::Pass { tuples: case.words.len() as u64 }
    }
}

fn small_oracle(case: &Case, extra_periods: usize) -> Option<Oracle> {
    let (s, w) = (case.system.as_ref()?, case.words.first()?);
    if s.check_wellformed().is_err() || !s.is_desugared() {
        return None;
    }
    Oracle::new(s, w, w.prefix_len() + extra_periods * w.period_len() + 1).ok()
}

fn check_monotonicity(case: &Case) -> Check {
    let Some(o) = small_oracle(case, 2) else {
        return Check::Skip;
    };
    let mut rng = ChaCha8Rng::seed_from_u64(case.salt);
    let (d1, d2) = (rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3));
    let u1 = o.random_environment(&mut rng, d1);
    let mut u2 = u1.clone();
    u2.union_with(&o.random_environment(&mut rng, d2));
    let (f1, f2) = (o.apply_f(&u1), o.apply_f(&u2));
    if !f1.is_subset(&f2) {
        return Check::Fail(format!("F(u1) ⊄ F(u2) for u1 ⊆ u2 (window {})", o.window()));
    }
    let omega = o.system().omega_vars().into_iter().map(str::to_string).collect::<Vec<_>>();
    for x in &omega {
        for i in 1..=o.window() {
            for theta in o.all_assignments() {
                let seed = Tuple { i, theta: theta.clone(), j: i, theta2: theta, x: x.clone() };
                if !o.contains(&f1, x, &seed) {
                    return Check::Fail(format!("seed {seed} missing from F(u1)({x})"));
                }
            }
        }
    }
    Check::Pass { tuples: f2.len() as u64 }
}

fn check_locality(case: &Case) -> Check {
    let Some(o) = small_oracle(case, 2) else {
        return Check::Skip;
    };
    let (s, w) = (o.system(), o.word());
    let n = o.window();
    let mut rng = ChaCha8Rng::seed_from_u64(case.salt);
    let j_cut = rng.gen_range(1..=n);
    let cfg = GenConfig::default();
    let mut prefix: Vec<Letter> = (1..j_cut).map(|i| w.letter_at(i).clone()).collect();
    let tail = gen::random_word(&mut rng, &s.atoms, &cfg);
    prefix.extend(tail.prefix().iter().cloned());
    let w2 = LassoWord::new(prefix, tail.period().to_vec()).expect("non-empty period");
    let Ok(o2) = Oracle::new(s, &w2, n) else {
        return Check::Skip;
    };
    let (l1, l2) = (o.lfp().env, o2.lfp().env);
    let thetas: Vec<_> = o.all_assignments().filter(|t| o2.encode(t).is_some()).collect();
    let omega = s.omega_vars();
    let mut tuples = 0;
    for v in s.vars() {
        for i in 1..=j_cut {
            for theta in &thetas {
                for j in i..=j_cut {
                    for theta2 in &thetas {
                        for &x in &omega {
                            let t = Tuple { i, theta: theta.clone(), j, theta2: theta2.clone(), x: x.to_string() };
                            tuples += 1;
                            if o.contains(&l1, v, &t) != o2.contains(&l2, v, &t) {
                                return Check::Fail(format!(
                                    "{t} in lfp({v}) changed when positions from {j_cut} on were replaced by {}",
                                    serialize_lasso(&w2).trim_end()
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Check::Pass { tuples }
}

fn check_periodicity(case: &Case) -> Check {
    let Some(o) = small_oracle(case, 3) else {
        return Check::Skip;
    };
    let (s, w) = (o.system(), o.word());
    let (l, p, n) = (w.prefix_len(), w.period_len(), o.window());
    let lfp = o.lfp().env;
    let thetas: Vec<_> = o.all_assignments().collect();
    let omega = s.omega_vars();
    let mut tuples = 0;
    for v in s.vars() {
        for i in l + 1..=n.saturating_sub(p) {
            for theta in &thetas {
                for j in i..=n - p {
                    for theta2 in &thetas {
                        for &x in &omega {
                            let t = Tuple { i, theta: theta.clone(), j, theta2: theta2.clone(), x: x.to_string() };
                            let shifted = Tuple { i: i + p, j: j + p, ..t.clone() };
                            tuples += 1;
                            if o.contains(&lfp, v, &t) != o.contains(&lfp, v, &shifted) {
                                return Check::Fail(format!("{t} and {shifted} differ in lfp({v})"));
                            }
                        }
                    }
                }
            }
        }
    }
    Check::Pass { tuples }
}

fn word_candidates(w: &LassoWord) -> Vec<LassoWord> {
    let mut out = Vec::new();
    let (pre, per) = (w.prefix().to_vec(), w.period().to_vec());
    for i in 0..pre.len() {
        let mut x = pre.clone();
        x.remove(i);
        out.push((x, per.clone()));
    }
    if per.len() > 1 {
        for i in 0..per.len() {
            let mut x = per.clone();
            x.remove(i);
            out.push((pre.clone(), x));
        }
    }
    for i in 0..pre.len() + per.len() {
        let (mut a, mut b) = (pre.clone(), per.clone());
        let letter = if i < a.len() { &mut a[i] } else { &mut b[i - pre.len()] };
        if !letter.atoms.is_empty() {
            letter.atoms.clear();
            out.push((a.clone(), b.clone()));
        }
        let letter = if i < a.len() { &mut a[i] } else { &mut b[i - pre.len()] };
        if letter.datum != Datum::Val(0) {
            letter.datum = Datum::Val(0);
            out.push((a, b));
        }
    }
    out.into_iter().filter_map(|(a, b)| LassoWord::new(a, b).ok()).collect()
}

fn formula_candidates(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::Or(a, b) => {
            let mut out = vec![(**a).clone(), (**b).clone()];
            out.extend(formula_candidates(a).into_iter().map(|x| Formula::or(x, (**b).clone())));
            out.extend(formula_candidates(b).into_iter().map(|x| Formula::or((**a).clone(), x)));
            out
        }
        Formula::FreezeNext { regs, next, guard } => {
            let mut out = vec![(**next).clone()];
            if !regs.is_empty() {
                out.push(Formula::freeze_next(RegSet::empty(), (**next).clone(), guard.clone()));
            }
            if *guard != BasicFormula::True {
                out.push(Formula::freeze_next(regs.clone(), (**next).clone(), BasicFormula::True));
            }
            out.extend(
                formula_candidates(next)
                    .into_iter()
                    .map(|x| Formula::freeze_next(regs.clone(), x, guard.clone())),
            );
            out
        }
        _ => Vec::new(),
    }
}

fn system_candidates(s: &EquationSystem) -> Vec<EquationSystem> {
    let mut out = Vec::new();
    let vtt = s.vtt().map(str::to_string);
    for (idx, e) in s.equations.iter().enumerate() {
        let referenced = s
            .equations
            .iter()
            .any(|other| other.var != e.var && other.rhs.variables().contains(&e.var.as_str()));
        if !referenced && e.var != s.main && Some(&e.var) != vtt.as_ref() {
            let mut x = s.clone();
            x.equations.remove(idx);
            x.omega.remove(&e.var);
            out.push(x);
        }
        if s.is_omega(&e.var) && Some(&e.var) != vtt.as_ref() {
            let mut x = s.clone();
            x.omega.remove(&e.var);
            out.push(x);
        }
        for rhs in formula_candidates(&e.rhs) {
            let mut x = s.clone();
            x.equations[idx].rhs = rhs;
            out.push(x);
        }
    }
    out
}

fn automaton_candidates(a: &BuchiRA) -> Vec<BuchiRA> {
    let mut out = Vec::new();
    for i in 0..a.rules.len() {
        let mut x = a.clone();
        x.rules.remove(i);
        out.push(x);
        let r = &a.rules[i];
        if !r.guard.is_eps() && r.guard != Guard::Basic(BasicFormula::True) {
            let mut x = a.clone();
            x.rules[i].guard = Guard::Basic(BasicFormula::True);
            out.push(x);
        }
        if !r.update.is_empty() {
            let mut x = a.clone();
            x.rules[i].update = RegSet::empty();
            out.push(x);
        }
    }
    for &q in &a.accepting {
        let mut x = a.clone();
        x.accepting.remove(&q);
        out.push(x);
    }
    let last = StateId(a.states.len() - 1);
    if a.states.len() > 1 && a.initial != last && a.rules.iter().all(|r| r.source != last && r.target != last) {
        let mut x = a.clone();
        x.states.pop();
        x.accepting.remove(&last);
        out.push(x);
    }
    // Merging rules that became equal keeps the rule list duplicate-free.
    out.into_iter()
        .map(|x| {
            let mut seen = BTreeSet::new();
            let mut y = x.clone();
            y.rules.retain(|r| seen.insert(r.clone()));
            y
        })
        .filter(|x| x.validate().is_ok())
        .collect()
}

fn case_candidates(c: &Case) -> Vec<Case> {
    let mut out = Vec::new();
    if c.words.len() > 1 {
        for i in 0..c.words.len() {
            let mut x = c.clone();
            x.words.remove(i);
            out.push(x);
        }
    }
    for (i, w) in c.words.iter().enumerate() {
        for w2 in word_candidates(w) {
            let mut x = c.clone();
            x.words[i] = w2;
            out.push(x);
        }
    }
    if let Some(s) = &c.system {
        for s2 in system_candidates(s) {
            out.push(Case { system: Some(s2), ..c.clone() });
        }
    }
    if let Some(a) = &c.automaton {
        for a2 in automaton_candidates(a) {
            out.push(Case { automaton: Some(a2), ..c.clone() });
        }
    }
    out
}

/// Greedily replaces `case` by smaller cases on which `property` still
/// fails. Returns the final case and its failure message.
pub fn shrink(property: Property, case: &Case) -> (Case, String) {
    shrink_with(|c| property.check(c), case)
}

pub fn shrink_with(check: impl Fn(&Case) -> Check, case: &Case) -> (Case, String) {
    let Check::Fail(mut message) = check(case) else {
        panic!("shrink called on a passing case");
    };
    let mut current = case.clone();
    for _ in 0..1000 {
        let next = case_candidates(&current)
            .into_iter()
            .find_map(|c| match check(&c) {
                Check::Fail(m) => Some((c, m)),
                _ => None,
            });
        match next {
            Some((c, m)) => {
                current = c;
                message = m;
            }
            None => break,
        }
    }
    (current, message)
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub property: Property,
    pub index: u64,
    pub message: String,
    pub case: Case,
}

#[derive(Debug, Clone)]
pub struct PropertyStats {
    pub property: Property,
    pub cases: usize,
    pub passed: usize,
    pub inconclusive: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Individual comparisons over all passing cases.
    pub tuples: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub seed: u64,
    pub cases: usize,
    pub gen: GenConfig,
    pub properties: Vec<Property>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 0,
            cases: 200,
            gen: GenConfig::default(),
            properties: Property::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub stats: Vec<PropertyStats>,
    /// The shrunk first failure of each failing property.
    pub counterexamples: Vec<Counterexample>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.stats.iter().all(|s| s.failed == 0)
    }

    pub fn stats_for(&self, p: Property) -> Option<&PropertyStats> {
        self.stats.iter().find(|s| s.property == p)
    }
}

/// The summary table, without timings.
impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<22} {:>6} {:>6} {:>12} {:>6} {:>6} {:>12}",
            "property", "cases", "pass", "inconclusive", "fail", "skip", "comparisons"
        )?;
        for s in &self.stats {
            writeln!(
                f,
                "{:<22} {:>6} {:>6} {:>12} {:>6} {:>6} {:>12}",
                s.property.name(),
                s.cases,
                s.passed,
                s.inconclusive,
                s.failed,
                s.skipped,
                s.tuples
            )?;
        }
        Ok(())
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Report {
    let mut stats = Vec::new();
    let mut counterexamples = Vec::new();
    for &property in &cfg.properties {
        let start = Instant::now();
        let results: Vec<(u64, Case, Check)> = (0..cfg.cases as u64)
            .into_par_iter()
            .map(|index| {
                let case = case_for(property, cfg.seed, index, &cfg.gen);
                let check = property.check(&case);
                (index, case, check)
            })
            .collect();
        let mut st = PropertyStats {
            property,
            cases: results.len(),
            passed: 0,
            inconclusive: 0,
            failed: 0,
            skipped: 0,
            tuples: 0,
            elapsed: Duration::ZERO,
        };
        let mut first_failure = None;
        for (index, case, check) in results {
            match check {
                Check::Pass { tuples } => {
                    st.passed += 1;
                    st.tuples += tuples;
                }
                Check::Inconclusive => st.inconclusive += 1,
                Check::Skip => st.skipped += 1,
                Check::Fail(_) => {
                    st.failed += 1;
                    first_failure.get_or_insert((index, case));
                }
            }
        }
        if let Some((index, case)) = first_failure {
            let (case, message) = shrink(property, &case);
            counterexamples.push(Counterexample { property, index, message, case });
        }
        st.elapsed = start.elapsed();
        stats.push(st);
    }
    Report { stats, counterexamples }
}
