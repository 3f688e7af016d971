//! Operational semantics of Büchi register automata on lasso words.
//!
//! Positions past the prefix are folded onto `[1, L + p]`. Register values
//! are always data of the word or `⊥`, so the folded configuration graph is
//! finite, and a lasso word is accepted exactly when that graph has a
//! reachable cycle through an accepting state that consumes input.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use crate::automaton::{BuchiRA, Guard, InstantaneousDescription, StateId};
use crate::data::{Assignment, LassoWord, Letter};
use crate::formula::BasicFormula;

pub const DEFAULT_CONFIG_LIMIT: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("configuration limit {limit} exceeded (at most {bound} configurations)")]
    TooManyConfigs { bound: u128, limit: usize },
}

/// A guard flattened to literals. Basic formulas are conjunctions of
/// literals, so this is exact.
#[derive(Debug, Clone, Default)]
struct Literals {
    never: bool,
    present: Vec<String>,
    absent: Vec<String>,
    equal: Vec<usize>,
    unequal: Vec<usize>,
}

impl Literals {
    fn compile(phi: &BasicFormula) -> Self {
        let mut out = Literals::default();
        fn go(phi: &BasicFormula, out: &mut Literals) {
            match phi {
                BasicFormula::True => {}
                BasicFormula::False => out.never = true,
                BasicFormula::Atom(p) => out.present.push(p.clone()),
                BasicFormula::NegAtom(p) => out.absent.push(p.clone()),
                BasicFormula::Up(r) => out.equal.push(*r),
                BasicFormula::NegUp(r) => out.unequal.push(*r),
                BasicFormula::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(phi, &mut out);
        out
    }

    fn holds(&self, letter: &Letter, theta: &Assignment) -> bool {
        let reg = |r: usize| theta.values().get(r - 1).copied();
        !self.never
            && self.present.iter().all(|p| letter.has(p))
            && self.absent.iter().all(|p| !letter.has(p))
            && self.equal.iter().all(|&r| reg(r) == Some(letter.datum))
            && self.unequal.iter().all(|&r| reg(r) != Some(letter.datum))
    }
}

/// Rules with compiled guards, grouped by source state.
struct Compiled<'a> {
    a: &'a BuchiRA,
    by_source: Vec<Vec<(Option<Literals>, usize)>>,
}

impl<'a> Compiled<'a> {
    fn new(a: &'a BuchiRA) -> Self {
        let mut by_source = vec![Vec::new(); a.states.len()];
        for (n, r) in a.rules.iter().enumerate() {
            let lits = match &r.guard {
                Guard::Eps => None,
                Guard::Basic(b) => Some(Literals::compile(b)),
            };
            by_source[r.source.0].push((lits, n));
        }
        Compiled { a, by_source }
    }

    /// Successors `(state, assignment, consumes)` of `(q, θ)` reading `letter`.
    fn successors(&self, q: StateId, theta: &Assignment, letter: &Letter) -> Vec<(StateId, Assignment, bool)> {
        let mut out = Vec::new();
        for (lits, n) in &self.by_source[q.0] {
            let r = &self.a.rules[*n];
            match lits {
                None => out.push((r.target, theta.clone(), false)),
                Some(l) if l.holds(letter, theta) => {
                    let next = theta.update(&r.update, letter.datum).expect("validated update");
                    out.push((r.target, next, true));
                }
                Some(_) => {}
            }
        }
        out
    }
}

/// One application of a rule.
pub fn step(a: &BuchiRA, w: &LassoWord, id: &InstantaneousDescription) -> BTreeSet<InstantaneousDescription> {
    let c = Compiled::new(a);
    c.successors(id.state, &id.assignment, w.letter_at(id.position))
        .into_iter()
        .map(|(state, assignment, consumes)| InstantaneousDescription {
            state,
            assignment,
            position: id.position + usize::from(consumes),
        })
        .collect()
}

/// Every description reachable from `from` whose position is at most
/// `horizon`, including `from` itself.
pub fn reach(
    a: &BuchiRA,
    w: &LassoWord,
    from: &InstantaneousDescription,
    horizon: usize,
) -> BTreeSet<InstantaneousDescription> {
    let c = Compiled::new(a);
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    if from.position <= horizon {
        seen.insert(from.clone());
        queue.push_back(from.clone());
    }
    while let Some(id) = queue.pop_front() {
        for (state, assignment, consumes) in c.successors(id.state, &id.assignment, w.letter_at(id.position)) {
            let position = id.position + usize::from(consumes);
            if position > horizon {
                continue;
            }
            let next = InstantaneousDescription { state, assignment, position };
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// A node of the folded configuration graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub state: StateId,
    pub assignment: Assignment,
    /// Folded position in `[1, L + p]`.
    pub position: usize,
}

/// An accepting lasso-shaped run: `stem` leads from the initial
/// configuration to the first configuration of `cycle`, which repeats
/// forever. The cycle starts in an accepting state and consumes input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoRun {
    pub stem: Vec<Config>,
    pub cycle: Vec<Config>,
}

impl LassoRun {
    /// `stem : cycle` over `(state, assignment, folded position)` triples.
    pub fn display<'a>(&'a self, a: &'a BuchiRA) -> impl fmt::Display + 'a {
        struct D<'a>(&'a LassoRun, &'a BuchiRA);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let one = |f: &mut fmt::Formatter<'_>, c: &Config| {
                    write!(f, "({}, {}, {})", self.1.name(c.state), c.assignment, c.position)
                };
                for c in &self.0.stem {
                    one(f, c)?;
                    f.write_str(" ")?;
                }
                f.write_str(":")?;
                for c in &self.0.cycle {
                    f.write_str(" ")?;
                    one(f, c)?;
                }
                Ok(())
            }
        }
        D(self, a)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub accepted: bool,
    pub witness: Option<LassoRun>,
    /// Number of reachable folded configurations.
    pub configs: usize,
}

/// `|Q| · |D_w|^k · (L + p)`.
pub fn config_bound(a: &BuchiRA, w: &LassoWord) -> u128 {
    let d = w.data_domain().len() as u128;
    let mut b = (a.states.len() as u128).saturating_mul(w.folded_len() as u128);
    for _ in 0..a.k {
        b = b.saturating_mul(d);
    }
    b
}

pub fn accepts(a: &BuchiRA, w: &LassoWord) -> Result<bool, EngineError> {
    run(a, w, DEFAULT_CONFIG_LIMIT).map(|o| o.accepted)
}

/// Decides acceptance and produces a witness run when accepting.
pub fn run(a: &BuchiRA, w: &LassoWord, limit: usize) -> Result<Outcome, EngineError> {
    let c = Compiled::new(a);
    let mut graph: DiGraph<(), bool> = DiGraph::new();
    let mut index: HashMap<Config, NodeIndex> = HashMap::new();
    let mut nodes: Vec<Config> = Vec::new();
    let mut parent: Vec<Option<NodeIndex>> = Vec::new();
    let start = Config {
        state: a.initial,
        assignment: Assignment::bottom(a.k),
        position: 1,
    };
    let mut queue = VecDeque::new();
    index.insert(start.clone(), graph.add_node(()));
    nodes.push(start);
    parent.push(None);
    queue.push_back(NodeIndex::new(0));
    while let Some(u) = queue.pop_front() {
        let cfg = nodes[u.index()].clone();
        let letter = w.letter_at(cfg.position);
        for (state, assignment, consumes) in c.successors(cfg.state, &cfg.assignment, letter) {
            let position = if consumes { w.next_folded(cfg.position) } else { cfg.position };
            let next = Config { state, assignment, position };
            let v = match index.get(&next) {
                Some(&v) => v,
                None => {
                    if nodes.len() >= limit {
                        return Err(EngineError::TooManyConfigs {
                            bound: config_bound(a, w),
                            limit,
                        });
                    }
                    let v = graph.add_node(());
                    index.insert(next.clone(), v);
                    nodes.push(next);
                    parent.push(Some(u));
                    queue.push_back(v);
                    v
                }
            };
            graph.add_edge(u, v, consumes);
        }
    }

    let configs = nodes.len();
    let mut component = vec![usize::MAX; configs];
    let sccs = tarjan_scc(&graph);
    for (n, scc) in sccs.iter().enumerate() {
        for v in scc {
            component[v.index()] = n;
        }
    }
    for (n, scc) in sccs.iter().enumerate() {
        let Some(&f) = scc.iter().filter(|v| a.is_accepting(nodes[v.index()].state)).min() else {
            continue;
        };
        let consuming = scc.iter().find_map(|&u| {
            graph
                .edges(u)
                .find(|e| *e.weight() && component[petgraph::visit::EdgeRef::target(e).index()] == n)
                .map(|e| (u, petgraph::visit::EdgeRef::target(&e)))
        });
        let Some((u, v)) = consuming else {
            continue;
        };
        let within = |x: NodeIndex| component[x.index()] == n;
        let mut cycle = path(&graph, f, u, within);
        cycle.extend(path(&graph, v, f, within));
        cycle.pop();
        let mut stem = Vec::new();
        let mut cur = parent[f.index()];
        while let Some(p) = cur {
            stem.push(p);
            cur = parent[p.index()];
        }
        stem.reverse();
        let cfgs = |xs: Vec<NodeIndex>| xs.into_iter().map(|x| nodes[x.index()].clone()).collect();
        return Ok(Outcome {
            accepted: true,
            witness: Some(LassoRun {
                stem: cfgs(stem),
                cycle: cfgs(cycle),
            }),
            configs,
        });
    }
    Ok(Outcome {
        accepted: false,
        witness: None,
        configs,
    })
}

/// Shortest path from `from` to `to` (both included) through nodes
/// satisfying `allowed`.
fn path(graph: &DiGraph<(), bool>, from: NodeIndex, to: NodeIndex, allowed: impl Fn(NodeIndex) -> bool) -> Vec<NodeIndex> {
    let mut prev: HashMap<NodeIndex, NodeIndex> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for y in graph.neighbors(x) {
            if allowed(y) && seen.insert(y) {
                prev.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    let mut out = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        out.push(cur);
    }
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Rule;
    use crate::data::{Datum, RegSet};
    use crate::formula::{eval_on_letter, BasicFormula as B};
    use crate::textio::{parse_bra, parse_lasso};
    use proptest::prelude::*;

    fn universal() -> BuchiRA {
        parse_bra("registers 1\nstates q0\ninitial q0\naccepting q0\nq0 --(tt, {})--> q0\n").unwrap()
    }

    fn id(state: usize, theta: &[Datum], position: usize) -> InstantaneousDescription {
        InstantaneousDescription::new(StateId(state), Assignment::from_values(theta.to_vec()), position)
    }

    #[test]
    fn guarded_step() {
        let a = parse_bra(
            "atoms p1 p3\nregisters 2\nstates q q'\ninitial q\nq --(p1 & !p3 & up 1, {2})--> q'\n",
        )
        .unwrap();
        let w = parse_lasso("prefix ({p1},5) ({p1,p3},5) ({p1},4) ; period ({},0)").unwrap();
        let from = id(0, &[Datum::Val(5), Datum::Bot], 1);
        assert_eq!(step(&a, &w, &from), [id(1, &[Datum::Val(5), Datum::Val(5)], 2)].into());
        let at2 = id(0, &[Datum::Val(5), Datum::Bot], 2);
        assert!(step(&a, &w, &at2).is_empty());
        let at3 = id(0, &[Datum::Val(5), Datum::Bot], 3);
        assert!(step(&a, &w, &at3).is_empty());
    }

    #[test]
    fn epsilon_step_keeps_position() {
        let a = parse_bra("registers 1\nstates q r\ninitial q\nq --(eps, {})--> r\n").unwrap();
        let w = parse_lasso("prefix ; period ({},1)").unwrap();
        assert_eq!(step(&a, &w, &id(0, &[Datum::Val(1)], 7)), [id(1, &[Datum::Val(1)], 7)].into());
    }

    #[test]
    fn reach_universal() {
        let w = parse_lasso("prefix ; period ({},1)").unwrap();
        let got = reach(&universal(), &w, &id(0, &[Datum::Bot], 1), 3);
        let want: BTreeSet<_> = (1..=3).map(|i| id(0, &[Datum::Bot], i)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn reach_is_reflexive_without_rules() {
        let a = parse_bra("states q\ninitial q\n").unwrap();
        let w = parse_lasso("prefix ; period ({},1)").unwrap();
        let from = id(0, &[], 2);
        assert_eq!(reach(&a, &w, &from, 5), [from].into());
    }

    #[test]
    fn universal_accepts_with_witness() {
        let w = parse_lasso("prefix ({},3) ; period ({},1) ({},2)").unwrap();
        let a = universal();
        let o = run(&a, &w, 100).unwrap();
        assert!(o.accepted);
        let witness = o.witness.unwrap();
        assert_eq!(witness.display(&a).to_string(), "(q0, [_], 1) : (q0, [_], 2) (q0, [_], 3)");
    }

    #[test]
    fn pure_epsilon_cycle_rejects() {
        let a = parse_bra("states q\ninitial q\naccepting q\nq --(eps, {})--> q\n").unwrap();
        let w = parse_lasso("prefix ; period ({},1)").unwrap();
        assert!(!accepts(&a, &w).unwrap());
    }

    #[test]
    fn limit_reported() {
        let w = parse_lasso("prefix ({},1) ; period ({},2)").unwrap();
        let err = run(&universal(), &w, 1).unwrap_err();
        assert_eq!(err, EngineError::TooManyConfigs { bound: 6, limit: 1 });
    }

    fn arb_guard() -> impl Strategy<Value = B> {
        let leaf = prop_oneof![
            Just(B::True),
            Just(B::False),
            Just(B::atom("p")),
            Just(B::neg_atom("p")),
            (1usize..=2).prop_map(B::Up),
            (1usize..=2).prop_map(B::NegUp),
        ];
        leaf.prop_recursive(3, 8, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| B::and(a, b)))
    }

    fn arb_datum() -> impl Strategy<Value = Datum> {
        prop_oneof![Just(Datum::Bot), (0u64..3).prop_map(Datum::Val)]
    }

    proptest! {
        #[test]
        fn compiled_guards_agree_with_evaluation(
            phi in arb_guard(),
            has_p in any::<bool>(),
            d in arb_datum(),
            theta in proptest::collection::vec(arb_datum(), 2),
        ) {
            let letter = Letter::new(if has_p { vec!["p"] } else { vec![] }, d);
            let theta = Assignment::from_values(theta);
            prop_assert_eq!(
                Literals::compile(&phi).holds(&letter, &theta),
                eval_on_letter(&letter, &theta, &phi)
            );
        }

        #[test]
        fn acceptance_invariant_under_unrolling(
            guards in proptest::collection::vec(arb_guard(), 1..5),
            targets in proptest::collection::vec(0usize..2, 4),
            updates in proptest::collection::vec(0usize..3, 4),
            word in proptest::collection::vec((any::<bool>(), 0u64..3), 1..5),
            split in 0usize..4,
        ) {
            let rules = guards.iter().enumerate().map(|(n, g)| Rule {
                source: StateId(n % 2),
                guard: Guard::Basic(g.clone()),
                update: if updates[n % 4] == 0 { RegSet::empty() } else { RegSet::from([updates[n % 4]]) },
                target: StateId(targets[n % 4]),
            }).collect();
            let a = BuchiRA::new(vec!["p".into()], 2, vec!["a".into(), "b".into()], StateId(0), rules, [StateId(1)].into()).unwrap();
            let letters: Vec<Letter> = word.iter().map(|&(p, d)| Letter::new(if p { vec!["p"] } else { vec![] }, Datum::Val(d))).collect();
            let split = split.min(letters.len() - 1);
            let w = LassoWord::new(letters[..split].to_vec(), letters[split..].to_vec()).unwrap();
            let base = accepts(&a, &w).unwrap();
            prop_assert_eq!(base, accepts(&a, &w.unrolled()).unwrap());
            prop_assert_eq!(base, accepts(&a, &w.shifted()).unwrap());
        }
    }
}
