//! Direct evaluation of the fixed-point semantics of systems of equations
//! on lasso words.
//!
//! An environment maps every variable to a set of tuples
//! `(i, θ; j, θ', x)`. The oracle stores these sets explicitly for the
//! positions `1 ≤ i ≤ j ≤ N` of a window and for assignments over
//! `D_w ∪ {fresh}`, where `fresh` is a value absent from the word. Every
//! round recomputes the whole environment from the previous one.
//!
//! The semantics only tests equality against data of the word, so one
//! fresh value stands for all values outside `D_w`. Membership of a tuple
//! only depends on tuples with a larger first position and the same
//! second position, so the fixed point restricted to the window is exact.
//!
//! Satisfaction asks for an infinite chain of tuples through ω-variables.
//! The chain graph is folded onto the lasso; positions past the window are
//! not represented, so a negative answer is only reported when a
//! periodicity argument shows that the window already contains every
//! target class (see [`Oracle::window_is_sufficient`]).

use std::collections::{BTreeSet, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::data::{Assignment, Datum, LassoWord, RegSet};
use crate::formula::{eval_basic, BasicFormula, Formula};
use crate::system::{EquationSystem, SystemError};

const BLOCK: usize = usize::BITS as usize;

/// Largest environment the oracle builds, in tuples per variable times
/// variables.
pub const DEFAULT_TUPLE_BUDGET: usize = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("system is not desugared")]
    NotDesugared,
    #[error("window must be at least 1")]
    EmptyWindow,
    #[error("window {window} needs {tuples} tuple slots, above the budget of {budget}")]
    TooLarge { window: usize, tuples: usize, budget: usize },
    #[error(transparent)]
    System(#[from] SystemError),
}

/// `(i, θ; j, θ', x)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple {
    pub i: usize,
    pub theta: Assignment,
    pub j: usize,
    pub theta2: Assignment,
    pub x: String,
}

impl std::fmt::Display for Tuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{};{},{},{})", self.i, self.theta, self.j, self.theta2, self.x)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Var(usize),
    Or(Box<Node>, Box<Node>),
    Step { guard: usize, update: usize, next: Box<Node> },
    Tt,
}

/// A windowed environment: one tuple set per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Environment {
    sets: Vec<FixedBitSet>,
}

impl Environment {
    /// Pointwise inclusion.
    pub fn is_subset(&self, other: &Environment) -> bool {
        self.sets.iter().zip(&other.sets).all(|(a, b)| a.is_subset(b))
    }

    pub fn union_with(&mut self, other: &Environment) {
        for (a, b) in self.sets.iter_mut().zip(&other.sets) {
            a.union_with(b);
        }
    }

    /// Total number of tuples.
    pub fn len(&self) -> usize {
        self.sets.iter().map(|s| s.count_ones(..)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The least fixed point on the window: `env = F^rounds(∅)` and
/// `F(env) = env`.
#[derive(Debug, Clone)]
pub struct Lfp {
    pub env: Environment,
    pub rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    /// No chain was found and the window is too small to rule one out.
    Inconclusive { suggested_window: usize },
}

/// The evaluation context for one system and one word at a fixed window.
pub struct Oracle {
    word: LassoWord,
    window: usize,
    domain: Vec<Datum>,
    k: usize,
    /// `|domain|^k`
    assignments: usize,
    vars: Vec<String>,
    omega_vars: Vec<usize>,
    omega_slot: Vec<Option<usize>>,
    vtt_slot: usize,
    rhs: Vec<Node>,
    /// `[guard][(i-1)·assignments + θ]`
    guard_table: Vec<FixedBitSet>,
    /// `[update][(i-1)·assignments + θ]`
    update_table: Vec<Vec<u32>>,
    stride: usize,
    /// Distinct subformulas of all right-hand sides.
    subformulas: Vec<Formula>,
    system: EquationSystem,
}

impl Oracle {
    pub fn new(s: &EquationSystem, w: &LassoWord, window: usize) -> Result<Oracle, OracleError> {
        Self::with_budget(s, w, window, DEFAULT_TUPLE_BUDGET)
    }

    pub fn with_budget(s: &EquationSystem, w: &LassoWord, window: usize, budget: usize) -> Result<Oracle, OracleError> {
        if window == 0 {
            return Err(OracleError::EmptyWindow);
        }
        if !s.is_desugared() {
            return Err(OracleError::NotDesugared);
        }
        s.check_scope()?;
        let vtt = s.vtt().ok_or(SystemError::MissingTt)?.to_string();

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
        let assignments = domain
            .len()
            .checked_pow(s.k as u32)
            .filter(|&a| a <= u32::MAX as usize)
            .ok_or(OracleError::TooLarge { window, tuples: usize::MAX, budget })?;

        let vars: Vec<String> = s.vars().map(str::to_string).collect();
        let omega_vars: Vec<usize> = (0..vars.len()).filter(|&v| s.is_omega(&vars[v])).collect();
        let mut omega_slot = vec![None; vars.len()];
        for (slot, &v) in omega_vars.iter().enumerate() {
            omega_slot[v] = Some(slot);
        }
        let vtt_slot = omega_slot[vars.iter().position(|v| *v == vtt).unwrap()].unwrap();

        let row_bits = window
            .checked_mul(assignments)
            .and_then(|x| x.checked_mul(omega_vars.len()))
            .ok_or(OracleError::TooLarge { window, tuples: usize::MAX, budget })?;
        let stride = row_bits.div_ceil(BLOCK) * BLOCK;
        let total = stride
            .checked_mul(window * assignments)
            .and_then(|x| x.checked_mul(vars.len()))
            .unwrap_or(usize::MAX);
        if total > budget {
            return Err(OracleError::TooLarge { window, tuples: total, budget });
        }

        let mut oracle = Oracle {
            word: w.clone(),
            window,
            domain,
            k: s.k,
            assignments,
            vars,
            omega_vars,
            omega_slot,
            vtt_slot,
            rhs: Vec::new(),
            guard_table: Vec::new(),
            update_table: Vec::new(),
            stride,
            subformulas: Vec::new(),
            system: s.clone(),
        };
        let mut guards: Vec<BasicFormula> = Vec::new();
        let mut updates: Vec<RegSet> = Vec::new();
        oracle.rhs = s
            .equations
            .iter()
            .map(|e| oracle.compile(&e.rhs, &mut guards, &mut updates))
            .collect();
        for e in &s.equations {
            collect_subformulas(&e.rhs, &mut oracle.subformulas);
        }
        oracle.guard_table = guards.iter().map(|g| oracle.tabulate_guard(g)).collect();
        oracle.update_table = updates.iter().map(|r| oracle.tabulate_update(r)).collect();
        Ok(oracle)
    }

    fn compile(&self, f: &Formula, guards: &mut Vec<BasicFormula>, updates: &mut Vec<RegSet>) -> Node {
        match f {
            Formula::Var(v) => Node::Var(self.var_index(v).expect("scope checked")),
            Formula::Or(a, b) => Node::Or(
                Box::new(self.compile(a, guards, updates)),
                Box::new(self.compile(b, guards, updates)),
            ),
            Formula::FreezeNext { regs, next, guard } => {
                let g = intern(guards, guard);
                let u = intern(updates, regs);
                Node::Step {
                    guard: g,
                    update: u,
                    next: Box::new(self.compile(next, guards, updates)),
                }
            }
            Formula::True => Node::Tt,
            _ => unreachable!("desugared"),
        }
    }

    fn tabulate_guard(&self, g: &BasicFormula) -> FixedBitSet {
        let mut t = FixedBitSet::with_capacity(self.window * self.assignments);
        for i in 1..=self.window {
            for a in 0..self.assignments {
                if eval_basic(&self.word, i, &self.decode(a), g) {
                    t.insert((i - 1) * self.assignments + a);
                }
            }
        }
        t
    }

    fn tabulate_update(&self, r: &RegSet) -> Vec<u32> {
        let mut t = Vec::with_capacity(self.window * self.assignments);
        for i in 1..=self.window {
            let d = self.word.letter_at(i).datum;
            for a in 0..self.assignments {
                let next = self.decode(a).update(r, d).expect("scope checked");
                t.push(self.encode(&next).expect("word data is in the domain") as u32);
            }
        }
        t
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn word(&self) -> &LassoWord {
        &self.word
    }

    pub fn system(&self) -> &EquationSystem {
        &self.system
    }

    /// `D_w ∪ {fresh}`, with the fresh value last.
    pub fn domain(&self) -> &[Datum] {
        &self.domain
    }

    pub fn fresh(&self) -> Datum {
        *self.domain.last().unwrap()
    }

    pub fn var_index(&self, v: &str) -> Option<usize> {
        self.vars.iter().position(|x| x == v)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// All assignments over the domain, in index order.
    pub fn all_assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.assignments).map(|a| self.decode(a))
    }

    pub fn encode(&self, theta: &Assignment) -> Option<usize> {
        if theta.k() != self.k {
            return None;
        }
        let mut idx = 0;
        for d in theta.values().iter().rev() {
            idx = idx * self.domain.len() + self.domain.iter().position(|x| x == d)?;
        }
        Some(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Assignment {
        let m = self.domain.len();
        let mut values = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            values.push(self.domain[idx % m]);
            idx /= m;
        }
        Assignment::from_values(values)
    }

    fn row(&self, i: usize, a: usize) -> usize {
        (i - 1) * self.assignments + a
    }

    fn column(&self, j: usize, a: usize, slot: usize) -> usize {
        ((j - 1) * self.assignments + a) * self.omega_vars.len() + slot
    }

    fn bit(&self, i: usize, a: usize, j: usize, a2: usize, slot: usize) -> usize {
        self.row(i, a) * self.stride + self.column(j, a2, slot)
    }

    pub fn empty(&self) -> Environment {
        let bits = self.stride * self.window * self.assignments;
        Environment {
            sets: vec![FixedBitSet::with_capacity(bits); self.vars.len()],
        }
    }

    /// Inserts a tuple; returns `false` if it lies outside the window or the
    /// domain.
    pub fn insert(&self, env: &mut Environment, var: &str, t: &Tuple) -> bool {
        match self.locate(var, t) {
            Some((v, bit)) => {
                env.sets[v].insert(bit);
                true
            }
            None => false,
        }
    }

    fn locate(&self, var: &str, t: &Tuple) -> Option<(usize, usize)> {
        let v = self.var_index(var)?;
        let slot = self.omega_slot[self.var_index(&t.x)?]?;
        if t.i < 1 || t.i > t.j || t.j > self.window {
            return None;
        }
        let a = self.encode(&t.theta)?;
        let a2 = self.encode(&t.theta2)?;
        Some((v, self.bit(t.i, a, t.j, a2, slot)))
    }

    /// Membership of a tuple in `env(var)`. Tuples outside the window or
    /// over values outside the domain are reported as absent.
    pub fn contains(&self, env: &Environment, var: &str, t: &Tuple) -> bool {
        self.locate(var, t).is_some_and(|(v, bit)| env.sets[v].contains(bit))
    }

    /// The tuples of `env(var)` in index order.
    pub fn tuples(&self, env: &Environment, var: &str) -> Vec<Tuple> {
        let Some(v) = self.var_index(var) else {
            return Vec::new();
        };
        let w = self.omega_vars.len();
        env.sets[v]
            .ones()
            .map(|bit| {
                let (row, col) = (bit / self.stride, bit % self.stride);
                let (i, a) = (row / self.assignments + 1, row % self.assignments);
                let (cell, slot) = (col / w, col % w);
                let (j, a2) = (cell / self.assignments + 1, cell % self.assignments);
                Tuple {
                    i,
                    theta: self.decode(a),
                    j,
                    theta2: self.decode(a2),
                    x: self.vars[self.omega_vars[slot]].clone(),
                }
            })
            .collect()
    }

    /// A random environment containing each windowed tuple with
    /// probability `density`.
    pub fn random_environment(&self, rng: &mut impl Rng, density: f64) -> Environment {
        let mut env = self.empty();
        for set in &mut env.sets {
            for i in 1..=self.window {
                for a in 0..self.assignments {
                    for j in i..=self.window {
                        for a2 in 0..self.assignments {
                            for slot in 0..self.omega_vars.len() {
                                if rng.gen_bool(density) {
                                    set.insert(self.bit(i, a, j, a2, slot));
                                }
                            }
                        }
                    }
                }
            }
        }
        env
    }

    /// Decides `w, i, θ, j, θ', x ⊨_u ψ` by the defining clauses, without
    /// the precomputed tables.
    pub fn eval_augmented(&self, u: &Environment, t: &Tuple, psi: &Formula) -> bool {
        match psi {
            Formula::Var(v) => self.contains(u, v, t),
            Formula::Or(a, b) => self.eval_augmented(u, t, a) || self.eval_augmented(u, t, b),
            Formula::FreezeNext { regs, next, guard } => {
                if t.i >= t.j || !eval_basic(&self.word, t.i, &t.theta, guard) {
                    return false;
                }
                let d = self.word.letter_at(t.i).datum;
                let Ok(theta) = t.theta.update(regs, d) else {
                    return false;
                };
                let t2 = Tuple {
                    i: t.i + 1,
                    theta,
                    ..t.clone()
                };
                self.eval_augmented(u, &t2, next)
            }
            Formula::True => {
                t.theta == t.theta2 && self.system.vtt() == Some(t.x.as_str())
            }
            _ => panic!("eval_augmented expects a desugared formula"),
        }
    }

    /// ORs the row of `node` at `(i, a)` into `dst`.
    fn or_row(&self, dst: &mut [usize], node: &Node, i: usize, a: usize, u: &Environment) {
        match node {
            Node::Var(v) => {
                let words = self.stride / BLOCK;
                let start = self.row(i, a) * words;
                let src = &u.sets[*v].as_slice()[start..start + words];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d |= s;
                }
            }
            Node::Or(x, y) => {
                self.or_row(dst, x, i, a, u);
                self.or_row(dst, y, i, a, u);
            }
            Node::Step { guard, update, next } => {
                let cell = self.row(i, a);
                if i < self.window && self.guard_table[*guard].contains(cell) {
                    let a2 = self.update_table[*update][cell] as usize;
                    self.or_row(dst, next, i + 1, a2, u);
                }
            }
            Node::Tt => {
                for j in i..=self.window {
                    let c = self.column(j, a, self.vtt_slot);
                    dst[c / BLOCK] |= 1 << (c % BLOCK);
                }
            }
        }
    }

    /// `F_{σ,w}(u)` on the window.
    pub fn apply_f(&self, u: &Environment) -> Environment {
        let words = self.stride / BLOCK;
        let sets = (0..self.vars.len())
            .into_par_iter()
            .map(|v| {
                let mut set = FixedBitSet::with_capacity(self.stride * self.window * self.assignments);
                let blocks = set.as_mut_slice();
                for i in 1..=self.window {
                    for a in 0..self.assignments {
                        let start = self.row(i, a) * words;
                        let dst = &mut blocks[start..start + words];
                        self.or_row(dst, &self.rhs[v], i, a, u);
                        if let Some(slot) = self.omega_slot[v] {
                            let c = self.column(i, a, slot);
                            dst[c / BLOCK] |= 1 << (c % BLOCK);
                        }
                    }
                }
                set
            })
            .collect();
        Environment { sets }
    }

    /// `F^n(∅)` for `n = 0, 1, …` up to and including the first repetition.
    pub fn iterates(&self) -> Vec<Environment> {
        let mut out = vec![self.empty()];
        loop {
            let next = self.apply_f(out.last().unwrap());
            if &next == out.last().unwrap() {
                return out;
            }
            out.push(next);
        }
    }

    pub fn lfp(&self) -> Lfp {
        let mut env = self.empty();
        let mut rounds = 0;
        loop {
            let next = self.apply_f(&env);
            if next == env {
                return Lfp { env, rounds };
            }
            env = next;
            rounds += 1;
        }
    }

    /// Decides whether an infinite chain starts at `(i, θ, V)`, given the
    /// fixed point on this window.
    pub fn chain_verdict(&self, lfp: &Environment, i: usize, theta: &Assignment, var: &str) -> Verdict {
        let start_pos = self.word.fold(i);
        let (Some(a), Some(v)) = (self.encode(theta), self.var_index(var)) else {
            return Verdict::Unsat;
        };
        if self.has_chain(lfp, start_pos, a, v) {
            Verdict::Sat
        } else if self.window_is_sufficient(lfp) {
            Verdict::Unsat
        } else {
            Verdict::Inconclusive {
                suggested_window: 2 * self.window,
            }
        }
    }

    /// Folded chain graph: nodes `(ρ, θ, x)` with `ρ ∈ [1, L+p]` and `x` an
    /// ω-variable, plus the start node. A node survives while it has a
    /// surviving successor; a chain exists iff the start node survives.
    fn has_chain(&self, lfp: &Environment, start_pos: usize, start_a: usize, start_var: usize) -> bool {
        let folded = self.word.folded_len();
        let w = self.omega_vars.len();
        let id = |rho: usize, a: usize, slot: usize| ((rho - 1) * self.assignments + a) * w + slot;
        let nodes = folded * self.assignments * w;
        let start = nodes;
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes + 1];

        let edges_from = |rho: usize, a: usize, v: usize| -> Vec<usize> {
            let mut out = BTreeSet::new();
            if rho > self.window {
                return Vec::new();
            }
            for j in rho + 1..=self.window {
                for a2 in 0..self.assignments {
                    for slot in 0..w {
                        if lfp.sets[v].contains(self.bit(rho, a, j, a2, slot)) {
                            out.insert(id(self.word.fold(j), a2, slot));
                        }
                    }
                }
            }
            out.into_iter().collect()
        };
        for rho in 1..=folded {
            for a in 0..self.assignments {
                for (slot, &v) in self.omega_vars.iter().enumerate() {
                    succ[id(rho, a, slot)] = edges_from(rho, a, v);
                }
            }
        }
        succ[start] = edges_from(start_pos, start_a, start_var);

        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); nodes + 1];
        let mut live_succ: Vec<usize> = succ.iter().map(Vec::len).collect();
        for (x, ys) in succ.iter().enumerate() {
            for &y in ys {
                pred[y].push(x);
            }
        }
        let mut alive = vec![true; nodes + 1];
        let mut queue: VecDeque<usize> = (0..=nodes).filter(|&x| live_succ[x] == 0).collect();
        for &x in &queue {
            alive[x] = false;
        }
        while let Some(y) = queue.pop_front() {
            for &x in &pred[y] {
                if alive[x] {
                    live_succ[x] -= 1;
                    if live_succ[x] == 0 {
                        alive[x] = false;
                        queue.push_back(x);
                    }
                }
            }
        }
        alive[start]
    }

    /// Whether every folded chain edge from a position `ρ ≤ L + p` has a
    /// representative with target inside the window.
    ///
    /// Fix an anchor `A = L + p + 1` and a target `(j, θ', x)` with
    /// `j ≥ A`. Let `S(j)` be the set of pairs `(ψ, θ)`, for `ψ` ranging
    /// over all subformulas of right-hand sides, such that
    /// `A, θ; j, θ', x ⊨ ψ` under the fixed point. Membership at a position
    /// only depends on subformulas at the same or the next position, so
    /// `S(j)` determines every tuple towards that target from positions
    /// below `A`, and by periodicity `S(j + p)` is a fixed function of
    /// `S(j)`. Once the sequence `S(j0), S(j0 + p), …` repeats inside the
    /// window, it has shown all its values.
    pub fn window_is_sufficient(&self, lfp: &Environment) -> bool {
        let (l, p) = (self.word.prefix_len(), self.word.period_len());
        let anchor = l + p + 1;
        if anchor + 2 * p - 1 > self.window {
            return false;
        }
        let thetas: Vec<Assignment> = self.all_assignments().collect();
        for j0 in anchor..anchor + p {
            for theta2 in &thetas {
                for &x in &self.omega_vars {
                    let mut seen: HashSet<Vec<bool>> = HashSet::new();
                    let mut repeated = false;
                    let mut j = j0;
                    while j <= self.window {
                        let layer: Vec<bool> = self
                            .subformulas
                            .iter()
                            .flat_map(|psi| {
                                thetas.iter().map(move |theta| {
                                    let t = Tuple {
                                        i: anchor,
                                        theta: theta.clone(),
                                        j,
                                        theta2: theta2.clone(),
                                        x: self.vars[x].clone(),
                                    };
                                    self.eval_augmented(lfp, &t, psi)
                                })
                            })
                            .collect();
                        if !seen.insert(layer) {
                            repeated = true;
                            break;
                        }
                        j += p;
                    }
                    if !repeated {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn satisfies_variable(&self, i: usize, theta: &Assignment, var: &str) -> Verdict {
        let lfp = self.lfp();
        self.chain_verdict(&lfp.env, i, theta, var)
    }
}

fn collect_subformulas(f: &Formula, out: &mut Vec<Formula>) {
    if !out.contains(f) {
        out.push(f.clone());
    }
    match f {
        Formula::Or(a, b) => {
            collect_subformulas(a, out);
            collect_subformulas(b, out);
        }
        Formula::FreezeNext { next, .. } => collect_subformulas(next, out),
        _ => {}
    }
}

fn intern<T: PartialEq + Clone>(pool: &mut Vec<T>, x: &T) -> usize {
    if let Some(n) = pool.iter().position(|y| y == x) {
        n
    } else {
        pool.push(x.clone());
        pool.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowChoice {
    /// Grow the window until the answer is conclusive or the bounds are
    /// reached.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SatOutcome {
    pub verdict: Verdict,
    /// The last window evaluated.
    pub window: usize,
    pub rounds: usize,
}

/// `L + p·(|Var|·|D_w|^k + 2)`: by a pigeonhole argument over automaton
/// configurations no chain edge needs a longer window.
pub fn window_cap(s: &EquationSystem, w: &LassoWord) -> usize {
    let d = w.data_domain().len();
    let configs = d.saturating_pow(s.k as u32).saturating_mul(s.equations.len());
    w.prefix_len()
        .saturating_add(w.period_len().saturating_mul(configs.saturating_add(2)))
}

/// Whether `w` satisfies `s`: an infinite chain from `(1, ⊥^k, main)`.
pub fn satisfies(s: &EquationSystem, w: &LassoWord, window: WindowChoice) -> Result<SatOutcome, OracleError> {
    satisfies_with_budget(s, w, window, DEFAULT_TUPLE_BUDGET)
}

pub fn satisfies_with_budget(
    s: &EquationSystem,
    w: &LassoWord,
    window: WindowChoice,
    budget: usize,
) -> Result<SatOutcome, OracleError> {
    let bottom = Assignment::bottom(s.k);
    let eval = |n: usize| -> Result<SatOutcome, OracleError> {
        let o = Oracle::with_budget(s, w, n, budget)?;
        let lfp = o.lfp();
        Ok(SatOutcome {
            verdict: o.chain_verdict(&lfp.env, 1, &bottom, &s.main),
            window: n,
            rounds: lfp.rounds,
        })
    };
    match window {
        WindowChoice::Fixed(n) => eval(n),
        WindowChoice::Auto => {
            let (l, p) = (w.prefix_len(), w.period_len());
            let cap = window_cap(s, w).max(l + 4 * p);
            let mut t = 0u32;
            loop {
                let n = (l + p * (3 + (1usize << t))).min(cap);
                let out = match eval(n) {
                    Ok(o) => o,
                    Err(OracleError::TooLarge { .. }) if t > 0 => {
                        return Ok(SatOutcome {
                            verdict: Verdict::Inconclusive { suggested_window: n },
                            window: l + p * (3 + (1usize << (t - 1))),
                            rounds: 0,
                        })
                    }
                    Err(e) => return Err(e),
                };
                match out.verdict {
                    Verdict::Inconclusive { .. } if n < cap => t += 1,
                    _ => return Ok(out),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{ensure_wellformed, normal_form};
    use crate::textio::{parse_lasso, parse_system};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SIGMA1: &str = "atoms p1 p2\nregisters 1\nomega Vtt\nmain V3\nVtt = tt\nV1 = up 1\n\
                          V2 = V1 | (X V2 & (!up 1 & p1))\nV3 = down {1} X V2\n";
    const W: &str = "prefix ({},5) ({p1,p2},4) ({p1},4) ; period ({p1},5)";
    const W2: &str = "prefix ({},3) ({p1,p2},4) ({p1},4) ; period ({p1},5)";

    fn one(d: Datum) -> Assignment {
        Assignment::from_values(vec![d])
    }

    fn t(i: usize, d: Datum, j: usize, d2: Datum, x: &str) -> Tuple {
        Tuple { i, theta: one(d), j, theta2: one(d2), x: x.into() }
    }

    #[test]
    fn encoding_round_trips() {
        let s = parse_system(SIGMA1).unwrap();
        let o = Oracle::new(&s, &parse_lasso(W).unwrap(), 4).unwrap();
        assert_eq!(o.domain(), [Datum::Bot, Datum::Val(4), Datum::Val(5), Datum::Val(6)]);
        for a in 0..4 {
            assert_eq!(o.encode(&o.decode(a)), Some(a));
        }
    }

    #[test]
    fn tt_clause() {
        let s = parse_system(SIGMA1).unwrap();
        let o = Oracle::new(&s, &parse_lasso(W).unwrap(), 4).unwrap();
        let u = o.empty();
        let v5 = Datum::Val(5);
        assert!(o.eval_augmented(&u, &t(1, v5, 3, v5, "Vtt"), &Formula::True));
        assert!(!o.eval_augmented(&u, &t(1, v5, 3, Datum::Val(4), "Vtt"), &Formula::True));
    }

    #[test]
    fn tt_clause_needs_vtt() {
        let s = parse_system("registers 1\nomega Vtt W\nmain W\nVtt = tt\nW = X W\n").unwrap();
        let o = Oracle::new(&s, &parse_lasso(W).unwrap(), 4).unwrap();
        let d = Datum::Bot;
        assert!(!o.eval_augmented(&o.empty(), &t(1, d, 2, d, "W"), &Formula::True));
    }

    #[test]
    fn sigma1_rounds() {
        let s = parse_system(SIGMA1).unwrap();
        let o = Oracle::new(&s, &parse_lasso(W).unwrap(), 9).unwrap();
        let it = o.iterates();
        assert_eq!(it.len(), 6, "F^5(∅) is the first repeated iterate");
        assert!(o.tuples(&it[1], "V2").is_empty());
        assert_eq!(o.tuples(&it[2], "V2"), o.tuples(&it[1], "V1"));
        let v5 = Datum::Val(5);
        let probe = t(2, v5, 5, v5, "Vtt");
        let rhs = s.rhs("V2").unwrap();
        assert!(!o.eval_augmented(&it[1], &probe, rhs));
        assert!(!o.contains(&it[3], "V2", &probe));
        assert!(o.eval_augmented(&it[3], &probe, rhs));
        assert!(o.contains(&it[4], "V2", &probe));
        for &d in o.domain() {
            assert!(o.contains(&it[5], "V3", &t(1, d, 5, v5, "Vtt")));
            assert!(!o.contains(&it[4], "V3", &t(1, d, 5, v5, "Vtt")));
            assert!(o.contains(&it[5], "V3", &t(2, d, 4, Datum::Val(4), "Vtt")));
        }
        let lfp = o.lfp();
        assert_eq!(lfp.rounds, 5);
        assert_eq!(lfp.env, it[5]);
    }

    #[test]
    fn seeds_present_after_one_round() {
        let s = parse_system(&SIGMA1.replace("omega Vtt", "omega Vtt V2")).unwrap();
        let o = Oracle::new(&s, &parse_lasso(W2).unwrap(), 5).unwrap();
        let u1 = o.apply_f(&o.empty());
        for i in 1..=5 {
            for &d in o.domain() {
                assert!(o.contains(&u1, "V2", &t(i, d, i, d, "V2")));
            }
        }
    }

    #[test]
    fn universal_system_fixpoint() {
        let s = parse_system("registers 1\nomega Vtt\nmain Vtt\nVtt = tt\n").unwrap();
        let o = Oracle::new(&s, &parse_lasso(W).unwrap(), 3).unwrap();
        let lfp = o.lfp();
        let mut want = Vec::new();
        for i in 1..=3 {
            for &d in o.domain() {
                for j in i..=3 {
                    want.push(t(i, d, j, d, "Vtt"));
                }
            }
        }
        want.sort();
        let mut got = o.tuples(&lfp.env, "Vtt");
        got.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn sample_verdicts() {
        let sigma1 = parse_system(SIGMA1).unwrap();
        let sigma2 = parse_system(&SIGMA1.replace("omega Vtt", "omega Vtt V2")).unwrap();
        let (w, w2) = (parse_lasso(W).unwrap(), parse_lasso(W2).unwrap());
        let sat = |s: &EquationSystem, w: &LassoWord| satisfies(s, w, WindowChoice::Auto).unwrap().verdict;
        assert_eq!(sat(&sigma1, &w), Verdict::Sat);
        assert_eq!(sat(&sigma1, &w2), Verdict::Unsat);
        assert_eq!(sat(&sigma2, &w2), Verdict::Sat);
        assert_eq!(sat(&sigma2, &w), Verdict::Sat);
        let n1 = normal_form(&sigma1).unwrap();
        assert_eq!(sat(&n1, &w), Verdict::Sat);
        assert_eq!(sat(&n1, &w2), Verdict::Unsat);
    }

    #[test]
    fn universal_on_any_word() {
        let s = ensure_wellformed(&parse_system("main Vtt\nVtt = tt\n").unwrap()).unwrap();
        for text in [W, W2, "prefix ; period ({},0)"] {
            let w = parse_lasso(text).unwrap();
            assert_eq!(satisfies(&s, &w, WindowChoice::Auto).unwrap().verdict, Verdict::Sat);
        }
    }

    #[test]
    fn nested_targets_beyond_first_window() {
        // The only chain reaches `Vtt` four positions later, past the first
        // window tried; deciding it needs the nested subformulas.
        let s = parse_system("omega Vtt\nmain V2\nV2 = X V5\nV5 = X X X Vtt\nVtt = tt\n").unwrap();
        let w = parse_lasso("prefix ; period ({},0)").unwrap();
        let out = satisfies(&s, &w, WindowChoice::Auto).unwrap();
        assert_eq!(out.verdict, Verdict::Sat);
        let o = Oracle::new(&s, &w, 4).unwrap();
        assert!(!o.window_is_sufficient(&o.lfp().env));
    }

    #[test]
    fn tiny_fixed_window_is_inconclusive() {
        let sigma1 = parse_system(SIGMA1).unwrap();
        let w2 = parse_lasso(W2).unwrap();
        let out = satisfies(&sigma1, &w2, WindowChoice::Fixed(3)).unwrap();
        assert!(matches!(out.verdict, Verdict::Inconclusive { .. }));
    }

    #[test]
    fn budget_enforced() {
        let s = parse_system(SIGMA1).unwrap();
        let err = Oracle::with_budget(&s, &parse_lasso(W).unwrap(), 9, 10).err().unwrap();
        assert!(matches!(err, OracleError::TooLarge { .. }));
    }

    #[test]
    fn direct_and_tabled_evaluation_agree() {
        let s = parse_system(&SIGMA1.replace("omega Vtt", "omega Vtt V2")).unwrap();
        let w = parse_lasso(W2).unwrap();
        let o = Oracle::new(&s, &w, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = o.random_environment(&mut rng, 0.3);
        let fu = o.apply_f(&u);
        for v in o.vars().to_vec() {
            let rhs = s.rhs(&v).unwrap();
            for i in 1..=5 {
                for theta in o.all_assignments() {
                    for j in i..=5 {
                        for theta2 in o.all_assignments() {
                            for x in ["Vtt", "V2"] {
                                let tu = Tuple { i, theta: theta.clone(), j, theta2: theta2.clone(), x: x.into() };
                                let seed = s.is_omega(&v) && i == j && theta == theta2 && x == v;
                                assert_eq!(o.contains(&fu, &v, &tu), seed || o.eval_augmented(&u, &tu, rhs), "{v} {tu}");
                            }
                        }
                    }
                }
            }
        }
    }
}
