//! Formula syntax: basic (guard-level) formulas and the disjunctive
//! next-time formulas used as right-hand sides of equation systems.
//!
//! The `Display` impls produce the canonical ASCII form. Printing a
//! desugared formula and parsing it back yields the same tree.

use std::fmt;

use crate::data::{Assignment, LassoWord, Letter, RegSet};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicFormula {
    True,
    False,
    Atom(String),
    NegAtom(String),
    Up(usize),
    NegUp(usize),
    And(Box<BasicFormula>, Box<BasicFormula>),
}

impl BasicFormula {
    pub fn and(a: BasicFormula, b: BasicFormula) -> BasicFormula {
        BasicFormula::And(Box::new(a), Box::new(b))
    }

    pub fn atom(p: impl Into<String>) -> BasicFormula {
        BasicFormula::Atom(p.into())
    }

    pub fn neg_atom(p: impl Into<String>) -> BasicFormula {
        BasicFormula::NegAtom(p.into())
    }

    /// Atoms mentioned by the formula, in left-to-right order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |b| {
            if let BasicFormula::Atom(p) | BasicFormula::NegAtom(p) = b {
                out.push(p.as_str());
            }
        });
        out
    }

    /// Register indices looked up by the formula.
    pub fn registers(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&mut |b| {
            if let BasicFormula::Up(r) | BasicFormula::NegUp(r) = b {
                out.push(*r);
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a BasicFormula)) {
        f(self);
        if let BasicFormula::And(a, b) = self {
            a.visit(f);
            b.visit(f);
        }
    }
}

/// `w, i, θ ⊨ φ`.
///
/// Look-ups of registers outside `θ` evaluate to false (and their negations
/// to true); well-formed formulas never contain them.
pub fn eval_basic(w: &LassoWord, i: usize, theta: &Assignment, phi: &BasicFormula) -> bool {
    eval_on_letter(w.letter_at(i), theta, phi)
}

/// `eval_basic` against a single letter.
pub fn eval_on_letter(letter: &Letter, theta: &Assignment, phi: &BasicFormula) -> bool {
    match phi {
        BasicFormula::True => true,
        BasicFormula::False => false,
        BasicFormula::Atom(p) => letter.has(p),
        BasicFormula::NegAtom(p) => !letter.has(p),
        BasicFormula::Up(r) => theta.get(*r).is_ok_and(|d| d == letter.datum),
        BasicFormula::NegUp(r) => !theta.get(*r).is_ok_and(|d| d == letter.datum),
        BasicFormula::And(a, b) => {
            eval_on_letter(letter, theta, a) && eval_on_letter(letter, theta, b)
        }
    }
}

/// Right-hand sides of equations.
///
/// `Var`, `Or`, `FreezeNext` and `True` are the core constructors.
/// `Next`, `Basic` and `And` are sugar accepted from programmatic callers and
/// removed by [`crate::normalize::desugar`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(String),
    Or(Box<Formula>, Box<Formula>),
    /// `↓_R X next ∧ guard`.
    FreezeNext {
        regs: RegSet,
        next: Box<Formula>,
        guard: BasicFormula,
    },
    True,
    Next(Box<Formula>),
    Basic(BasicFormula),
    And(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn next(a: Formula) -> Formula {
        Formula::Next(Box::new(a))
    }

    pub fn freeze_next(regs: RegSet, next: Formula, guard: BasicFormula) -> Formula {
        Formula::FreezeNext {
            regs,
            next: Box::new(next),
            guard,
        }
    }

    /// Whether only core constructors occur.
    pub fn is_desugared(&self) -> bool {
        match self {
            Formula::Var(_) | Formula::True => true,
            Formula::Or(a, b) => a.is_desugared() && b.is_desugared(),
            Formula::FreezeNext { next, .. } => next.is_desugared(),
            Formula::Next(_) | Formula::Basic(_) | Formula::And(..) => false,
        }
    }

    /// A variable or `tt`: the operands allowed inside normal-form equations.
    pub fn is_operand(&self) -> bool {
        matches!(self, Formula::Var(_) | Formula::True)
    }

    /// Leaves of the maximal `Or`-tree rooted here, left to right.
    pub fn disjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Left-nested disjunction of the given formulas.
    ///
    /// # Panics
    ///
    /// Panics on an empty list.
    pub fn any_of(items: Vec<Formula>) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().expect("disjunction of no formulas");
        it.fold(first, Formula::or)
    }

    /// Variables referenced anywhere in the formula.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Var(v) = f {
                out.push(v.as_str());
            }
        });
        out
    }

    /// Basic formulas occurring in the formula (guards and sugar `Basic`).
    pub fn basics(&self) -> Vec<&BasicFormula> {
        let mut out = Vec::new();
        self.visit(&mut |f| match f {
            Formula::FreezeNext { guard, .. } => out.push(guard),
            Formula::Basic(b) => out.push(b),
            _ => {}
        });
        out
    }

    /// Register sets of all freeze operators.
    pub fn updates(&self) -> Vec<&RegSet> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::FreezeNext { regs, .. } = f {
                out.push(regs);
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::FreezeNext { next, .. } | Formula::Next(next) => next.visit(f),
            Formula::Var(_) | Formula::True | Formula::Basic(_) => {}
        }
    }
}

// Precedence levels for printing: `|` < `&` < prefix operators.

impl fmt::Display for BasicFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicFormula::True => f.write_str("tt"),
            BasicFormula::False => f.write_str("ff"),
            BasicFormula::Atom(p) => f.write_str(p),
            BasicFormula::NegAtom(p) => write!(f, "!{p}"),
            BasicFormula::Up(r) => write!(f, "up {r}"),
            BasicFormula::NegUp(r) => write!(f, "!up {r}"),
            BasicFormula::And(a, b) => {
                write!(f, "{a} & ")?;
                if matches!(**b, BasicFormula::And(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

/// Prints a guard after `&`: conjunctions are parenthesized.
struct Guard<'a>(&'a BasicFormula);

impl fmt::Display for Guard<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if matches!(self.0, BasicFormula::And(..)) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints the operand of a prefix operator.
struct PrefixOperand<'a>(&'a Formula);

impl fmt::Display for PrefixOperand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bare = match self.0 {
            Formula::Var(_) | Formula::True | Formula::Next(_) => true,
            Formula::FreezeNext { guard, .. } => *guard == BasicFormula::True,
            Formula::Basic(b) => !matches!(b, BasicFormula::And(..)),
            Formula::Or(..) | Formula::And(..) => false,
        };
        if bare {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

/// Prints an operand of `&` in sugar conjunctions.
struct Conjunct<'a>(&'a Formula);

impl fmt::Display for Conjunct<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if matches!(self.0, Formula::Or(..)) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(v) => f.write_str(v),
            Formula::True => f.write_str("tt"),
            Formula::Or(a, b) => {
                write!(f, "{a} | ")?;
                if matches!(**b, Formula::Or(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Formula::FreezeNext { regs, next, guard } => {
                if !regs.is_empty() {
                    write!(f, "down {regs} ")?;
                }
                write!(f, "X {}", PrefixOperand(next))?;
                if *guard != BasicFormula::True {
                    write!(f, " & {}", Guard(guard))?;
                }
                Ok(())
            }
            Formula::Next(next) => write!(f, "X {}", PrefixOperand(next)),
            Formula::Basic(b) => write!(f, "{b}"),
            Formula::And(a, b) => {
                write!(f, "{} & ", Conjunct(a))?;
                if matches!(**b, Formula::And(..) | Formula::Or(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}
