//! Desugaring, well-formedness repair and the normal-form translation.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::data::RegSet;
use crate::formula::{BasicFormula, Formula};
use crate::system::{fresh_name, Equation, EquationSystem, SystemError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("conjunction `{0}` has no basic conjunct")]
    NoBasicConjunct(String),
    #[error("`{0}` cannot be conjoined with a basic formula: it is not a next-formula")]
    NotNextFormula(String),
    #[error("ω-variables `{0}` and `{1}` have identical right-hand sides")]
    Unrepairable(String, String),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Interprets `f` as a basic formula if it is built from basic parts only.
/// `tt` counts as basic here.
fn as_basic(f: &Formula) -> Option<BasicFormula> {
    match f {
        Formula::Basic(b) => Some(b.clone()),
        Formula::True => Some(BasicFormula::True),
        Formula::And(a, b) => Some(BasicFormula::and(as_basic(a)?, as_basic(b)?)),
        _ => None,
    }
}

/// Conjoins `phi` onto the guard of a desugared next-formula.
fn push_guard(f: Formula, phi: BasicFormula) -> Result<Formula, NormalizeError> {
    match f {
        Formula::FreezeNext { regs, next, guard } => {
            let guard = if guard == BasicFormula::True {
                phi
            } else {
                BasicFormula::and(guard, phi)
            };
            Ok(Formula::FreezeNext { regs, next, guard })
        }
        other => Err(NormalizeError::NotNextFormula(other.to_string())),
    }
}

/// Removes `Next`, `Basic` and `And` from a formula.
///
/// `X ψ` becomes `↓_∅ X ψ ∧ tt`, a basic `φ` becomes `↓_∅ X tt ∧ φ`, and a
/// conjunction with a basic side conjoins that side onto the guard of the
/// other side.
pub fn desugar_formula(f: &Formula) -> Result<Formula, NormalizeError> {
    Ok(match f {
        Formula::Var(_) | Formula::True => f.clone(),
        Formula::Basic(b) => Formula::freeze_next(RegSet::empty(), Formula::True, b.clone()),
        Formula::Next(e) => Formula::freeze_next(RegSet::empty(), desugar_formula(e)?, BasicFormula::True),
        Formula::FreezeNext { regs, next, guard } => {
            Formula::freeze_next(regs.clone(), desugar_formula(next)?, guard.clone())
        }
        Formula::Or(a, b) => Formula::or(desugar_formula(a)?, desugar_formula(b)?),
        Formula::And(a, b) => match (as_basic(a), as_basic(b)) {
            (Some(x), Some(y)) => {
                Formula::freeze_next(RegSet::empty(), Formula::True, BasicFormula::and(x, y))
            }
            (Some(x), None) => push_guard(desugar_formula(b)?, x)?,
            (None, Some(y)) => push_guard(desugar_formula(a)?, y)?,
            (None, None) => return Err(NormalizeError::NoBasicConjunct(f.to_string())),
        },
    })
}

pub fn desugar(s: &EquationSystem) -> Result<EquationSystem, NormalizeError> {
    let mut out = s.clone();
    for e in &mut out.equations {
        e.rhs = desugar_formula(&e.rhs)?;
    }
    Ok(out)
}

/// `ff ∧ X tt`, desugared.
fn never() -> Formula {
    Formula::freeze_next(RegSet::empty(), Formula::True, BasicFormula::False)
}

/// Establishes the ω-variable conditions: adds a fresh `Vtt = tt` when no
/// ω-variable has right-hand side `tt`, and rewrites every non-ω variable
/// that shares its right-hand side with an ω-variable to
/// `σ(V') ∨ (ff ∧ X tt)`.
pub fn ensure_wellformed(s: &EquationSystem) -> Result<EquationSystem, NormalizeError> {
    let mut out = desugar(s)?;
    out.check_scope()?;
    if out.vtt().is_none() {
        let name = if out.used_names().contains("Vtt") {
            fresh_name("Vtt", &out.used_names())
        } else {
            "Vtt".to_string()
        };
        out.equations.push(Equation { var: name.clone(), rhs: Formula::True });
        out.omega.insert(name);
    }
    while let Some((omega, other)) = out.injectivity_violation() {
        if out.is_omega(&other) {
            return Err(NormalizeError::Unrepairable(omega, other));
        }
        let rhs = out.rhs_mut(&other).expect("variable exists");
        *rhs = Formula::or(rhs.clone(), never());
    }
    Ok(out)
}

/// Degree of normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `V = V' ∨ V''`, `V = ↓_R X V' ∧ φ` or `V = tt` only.
    Strict,
    /// Also allows `V = V'` and disjunctions of any number of operands.
    Extended,
}

/// The shape class of a normal-form right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalShape {
    Disjunction,
    FreezeNext,
    Tt,
}

/// Classifies a right-hand side, or returns `None` when it is not in normal
/// form. Operands are variables or `tt`.
pub fn shape_of(rhs: &Formula, shape: Shape) -> Option<NormalShape> {
    match rhs {
        Formula::True => Some(NormalShape::Tt),
        Formula::FreezeNext { next, .. } if next.is_operand() => Some(NormalShape::FreezeNext),
        Formula::Or(a, b) => match shape {
            Shape::Strict if a.is_operand() && b.is_operand() => Some(NormalShape::Disjunction),
            Shape::Extended if rhs.disjuncts().iter().all(|d| d.is_operand()) => {
                Some(NormalShape::Disjunction)
            }
            _ => None,
        },
        Formula::Var(_) if shape == Shape::Extended => Some(NormalShape::Disjunction),
        _ => None,
    }
}

pub fn is_normal(s: &EquationSystem, shape: Shape) -> bool {
    s.equations.iter().all(|e| shape_of(&e.rhs, shape).is_some())
}

struct Flattener {
    shape: Shape,
    taken: BTreeSet<String>,
    base: String,
    fresh: Vec<Equation>,
}

impl Flattener {
    /// Replaces a non-operand by a fresh variable defined as its flattened
    /// form. Children are flattened first.
    fn lift(&mut self, f: &Formula) -> Formula {
        if f.is_operand() {
            return f.clone();
        }
        let rhs = self.inner(f);
        let name = fresh_name(&self.base, &self.taken);
        self.taken.insert(name.clone());
        self.fresh.push(Equation { var: name.clone(), rhs });
        Formula::Var(name)
    }

    fn inner(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Or(a, b) => match self.shape {
                Shape::Strict => {
                    let a = self.lift(a);
                    let b = self.lift(b);
                    Formula::or(a, b)
                }
                Shape::Extended => {
                    let leaves: Vec<Formula> = f.disjuncts().into_iter().map(|d| self.lift(d)).collect();
                    Formula::any_of(leaves)
                }
            },
            Formula::FreezeNext { regs, next, guard } => {
                let next = self.lift(next);
                Formula::freeze_next(regs.clone(), next, guard.clone())
            }
            Formula::Var(v) => match self.shape {
                Shape::Strict => Formula::or(Formula::var(v.clone()), Formula::var(v.clone())),
                Shape::Extended => f.clone(),
            },
            Formula::True => Formula::True,
            sugar => unreachable!("normal form of non-desugared formula {sugar}"),
        }
    }
}

/// Strict normal form: every equation becomes `V = V' ∨ V''`,
/// `V = ↓_R X V' ∧ φ` or `V = tt`.
pub fn normal_form(s: &EquationSystem) -> Result<EquationSystem, NormalizeError> {
    normal_form_with(s, Shape::Strict)
}

/// Flattens every right-hand side by introducing fresh non-ω variables for
/// nested disjunctions and next-formulas, bottom-up and left to right. The
/// operands of normal-form equations are variables or `tt`.
///
/// Original variables, ω-variables and the main variable are kept. If a
/// flattened right-hand side coincides with that of an ω-variable the clash
/// is removed by an equivalent rewrite, so the result stays well-formed.
pub fn normal_form_with(s: &EquationSystem, shape: Shape) -> Result<EquationSystem, NormalizeError> {
    let s = desugar(s)?;
    let mut flat = Flattener {
        shape,
        taken: s.used_names(),
        base: String::new(),
        fresh: Vec::new(),
    };
    let mut equations = Vec::new();
    for e in &s.equations {
        flat.base = e.var.clone();
        let rhs = if shape_of(&e.rhs, shape).is_some() {
            e.rhs.clone()
        } else {
            flat.inner(&e.rhs)
        };
        equations.push(Equation { var: e.var.clone(), rhs });
        equations.append(&mut flat.fresh);
    }
    let mut out = EquationSystem { equations, ..s };
    separate_omega_clashes(&mut out, shape, &mut flat.taken);
    Ok(out)
}

fn separate_omega_clashes(s: &mut EquationSystem, shape: Shape, taken: &mut BTreeSet<String>) {
    while let Some((omega, other)) = s.injectivity_violation() {
        let victim = if s.is_omega(&other) {
            // Both are ω-variables: keep the earlier one.
            let (a, b) = (s.index_of(&omega).unwrap(), s.index_of(&other).unwrap());
            if a < b { other } else { omega }
        } else {
            other
        };
        let pos = s.index_of(&victim).unwrap();
        let rhs = s.equations[pos].rhs.clone();
        match rhs {
            Formula::FreezeNext { regs, next, guard } => {
                // φ ∧ tt ≡ φ
                s.equations[pos].rhs =
                    Formula::freeze_next(regs, *next, BasicFormula::and(guard, BasicFormula::True));
            }
            other_rhs => {
                // d_1 ∨ … ∨ d_m ≡ d_1 ∨ … ∨ d_m ∨ (ff ∧ X tt)
                let fresh = |taken: &mut BTreeSet<String>| {
                    let n = fresh_name(&victim, taken);
                    taken.insert(n.clone());
                    n
                };
                let never_var = fresh(taken);
                let mut new_eqs = Vec::new();
                let disjuncts: Vec<Formula> = other_rhs.disjuncts().into_iter().cloned().collect();
                let new_rhs = match shape {
                    Shape::Extended => {
                        let mut items = disjuncts;
                        items.push(Formula::var(never_var.clone()));
                        Formula::any_of(items)
                    }
                    Shape::Strict => match disjuncts.as_slice() {
                        [a, b] => {
                            let tail = fresh(taken);
                            new_eqs.push(Equation {
                                var: tail.clone(),
                                rhs: Formula::or(b.clone(), Formula::var(never_var.clone())),
                            });
                            Formula::or(a.clone(), Formula::var(tail))
                        }
                        [a] => Formula::or(a.clone(), Formula::var(never_var.clone())),
                        _ => unreachable!("strict disjunctions are binary"),
                    },
                };
                new_eqs.push(Equation { var: never_var, rhs: never() });
                s.equations[pos].rhs = new_rhs;
                for (n, e) in new_eqs.into_iter().enumerate() {
                    s.equations.insert(pos + 1 + n, e);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::BasicFormula as B;

    fn sys(equations: Vec<(&str, Formula)>, omega: &[&str], main: &str) -> EquationSystem {
        EquationSystem {
            atoms: vec!["p1".into(), "p2".into()],
            k: 1,
            equations: equations
                .into_iter()
                .map(|(v, rhs)| Equation { var: v.into(), rhs })
                .collect(),
            omega: omega.iter().map(|s| s.to_string()).collect(),
            main: main.into(),
        }
    }

    fn sigma1() -> EquationSystem {
        sys(
            vec![
                ("Vtt", Formula::True),
                ("V1", Formula::Basic(B::Up(1))),
                (
                    "V2",
                    Formula::or(
                        Formula::var("V1"),
                        Formula::and(
                            Formula::next(Formula::var("V2")),
                            Formula::Basic(B::and(B::NegUp(1), B::atom("p1"))),
                        ),
                    ),
                ),
                ("V3", Formula::freeze_next(RegSet::from([1]), Formula::var("V2"), B::True)),
            ],
            &["Vtt"],
            "V3",
        )
    }

    #[test]
    fn basic_abbreviation_desugars() {
        let d = desugar_formula(&Formula::Basic(B::Up(1))).unwrap();
        assert_eq!(d, Formula::freeze_next(RegSet::empty(), Formula::True, B::Up(1)));
    }

    #[test]
    fn next_desugars() {
        let d = desugar_formula(&Formula::next(Formula::var("V2"))).unwrap();
        assert_eq!(d, Formula::freeze_next(RegSet::empty(), Formula::var("V2"), B::True));
    }

    #[test]
    fn two_nonbasic_conjuncts_rejected() {
        let or = Formula::or(Formula::var("V1"), Formula::var("V2"));
        let err = desugar_formula(&Formula::and(or.clone(), or)).unwrap_err();
        assert!(matches!(err, NormalizeError::NoBasicConjunct(_)));
    }

    #[test]
    fn variable_conjunct_rejected() {
        let err = desugar_formula(&Formula::and(Formula::var("V1"), Formula::Basic(B::atom("p1"))))
            .unwrap_err();
        assert!(matches!(err, NormalizeError::NotNextFormula(_)));
    }

    #[test]
    fn guards_accumulate() {
        let f = Formula::and(
            Formula::and(Formula::Basic(B::atom("p1")), Formula::next(Formula::var("V"))),
            Formula::Basic(B::atom("p2")),
        );
        assert_eq!(
            desugar_formula(&f).unwrap(),
            Formula::freeze_next(
                RegSet::empty(),
                Formula::var("V"),
                B::and(B::atom("p1"), B::atom("p2"))
            )
        );
    }

    #[test]
    fn missing_vtt_added() {
        let s = sys(
            vec![("A", Formula::freeze_next(RegSet::empty(), Formula::var("A"), B::True))],
            &[],
            "A",
        );
        let w = ensure_wellformed(&s).unwrap();
        assert_eq!(w.rhs("Vtt"), Some(&Formula::True));
        assert!(w.is_omega("Vtt"));
        assert_eq!(w.check_wellformed(), Ok(()));
    }

    #[test]
    fn non_omega_duplicate_rewritten() {
        let s = sys(vec![("Va", Formula::True), ("Vb", Formula::True)], &["Va"], "Vb");
        let w = ensure_wellformed(&s).unwrap();
        assert_eq!(w.rhs("Va"), Some(&Formula::True));
        assert_eq!(w.rhs("Vb"), Some(&Formula::or(Formula::True, never())));
        assert_eq!(w.check_wellformed(), Ok(()));
    }

    #[test]
    fn omega_duplicates_unrepairable() {
        let s = sys(vec![("Va", Formula::True), ("Vb", Formula::True)], &["Va", "Vb"], "Vb");
        assert_eq!(
            ensure_wellformed(&s),
            Err(NormalizeError::Unrepairable("Va".into(), "Vb".into()))
        );
    }

    #[test]
    fn sigma1_already_wellformed() {
        let d = desugar(&sigma1()).unwrap();
        assert_eq!(ensure_wellformed(&d).unwrap(), d);
    }

    #[test]
    fn sigma1_normal_form() {
        let n = normal_form(&ensure_wellformed(&sigma1()).unwrap()).unwrap();
        let vars: Vec<&str> = n.vars().collect();
        assert_eq!(vars, ["Vtt", "V1", "V2", "V2'", "V3"]);
        assert_eq!(n.rhs("V2").unwrap().to_string(), "V1 | V2'");
        assert_eq!(n.rhs("V2'").unwrap().to_string(), "X V2 & (!up 1 & p1)");
        assert_eq!(n.rhs("V1").unwrap().to_string(), "X tt & up 1");
        assert_eq!(n.rhs("V3").unwrap().to_string(), "down {1} X V2");
        assert!(!n.is_omega("V2'"));
        assert!(is_normal(&n, Shape::Strict));
    }

    #[test]
    fn tt_stays() {
        let s = sys(vec![("Vtt", Formula::True)], &["Vtt"], "Vtt");
        assert_eq!(normal_form(&s).unwrap(), s);
    }

    #[test]
    fn nested_disjunction_of_variables() {
        // V = (A ∨ B) ∨ C
        let s = sys(
            vec![
                ("Vtt", Formula::True),
                ("A", Formula::var("Vtt")),
                ("B", Formula::var("Vtt")),
                ("C", Formula::var("Vtt")),
                ("V", Formula::or(Formula::or(Formula::var("A"), Formula::var("B")), Formula::var("C"))),
            ],
            &["Vtt"],
            "V",
        );
        let n = normal_form(&s).unwrap();
        assert_eq!(n.rhs("V").unwrap().to_string(), "V' | C");
        assert_eq!(n.rhs("V'").unwrap().to_string(), "A | B");
        // bare variables are doubled
        assert_eq!(n.rhs("A").unwrap().to_string(), "Vtt | Vtt");
    }

    #[test]
    fn nested_disjunction_with_next_operand() {
        // V = (A ∨ B) ∨ X C
        let s = sys(
            vec![
                ("Vtt", Formula::True),
                ("A", Formula::next(Formula::var("A"))),
                ("B", Formula::next(Formula::var("B"))),
                ("C", Formula::next(Formula::var("C"))),
                (
                    "V",
                    Formula::or(
                        Formula::or(Formula::var("A"), Formula::var("B")),
                        Formula::next(Formula::var("C")),
                    ),
                ),
            ],
            &["Vtt"],
            "V",
        );
        let n = normal_form(&s).unwrap();
        assert_eq!(n.rhs("V").unwrap().to_string(), "V' | V''");
        assert_eq!(n.rhs("V'").unwrap().to_string(), "A | B");
        assert_eq!(n.rhs("V''").unwrap().to_string(), "X C");
        assert!(is_normal(&n, Shape::Strict));
    }

    #[test]
    fn extended_keeps_nary() {
        let s = sys(
            vec![
                ("Vtt", Formula::True),
                (
                    "V",
                    Formula::any_of(vec![
                        Formula::var("Vtt"),
                        Formula::var("V"),
                        Formula::next(Formula::var("V")),
                    ]),
                ),
            ],
            &["Vtt"],
            "V",
        );
        let n = normal_form_with(&s, Shape::Extended).unwrap();
        assert_eq!(n.rhs("V").unwrap().to_string(), "Vtt | V | V'");
        assert!(is_normal(&n, Shape::Extended));
        assert!(!is_normal(&n, Shape::Strict));
        let strict = normal_form(&n).unwrap();
        assert!(is_normal(&strict, Shape::Strict));
    }

    #[test]
    fn idempotent_on_normal_systems() {
        let n = normal_form(&ensure_wellformed(&sigma1()).unwrap()).unwrap();
        assert_eq!(normal_form(&n).unwrap(), n);
    }

    #[test]
    fn fresh_variable_clashing_with_omega_is_separated() {
        // W (ω) = X V ∧ p1 and V = Z ∨ (X V ∧ p1): the lifted disjunct would
        // duplicate σ(W).
        let step = Formula::freeze_next(RegSet::empty(), Formula::var("V"), B::atom("p1"));
        let s = sys(
            vec![
                ("Vtt", Formula::True),
                ("W", step.clone()),
                ("Z", Formula::next(Formula::var("Vtt"))),
                ("V", Formula::or(Formula::var("Z"), step)),
            ],
            &["Vtt", "W"],
            "V",
        );
        let n = normal_form(&ensure_wellformed(&s).unwrap()).unwrap();
        assert_eq!(n.check_wellformed(), Ok(()));
        assert!(is_normal(&n, Shape::Strict));
        assert_eq!(n.rhs("V'").unwrap().to_string(), "X V & (p1 & tt)");
    }

    #[test]
    fn doubled_variables_clashing_are_separated() {
        let s = sys(
            vec![
                ("Vtt", Formula::True),
                ("A", Formula::var("Vtt")),
                ("B", Formula::or(Formula::var("Vtt"), Formula::var("Vtt"))),
            ],
            &["Vtt", "A", "B"],
            "A",
        );
        let n = normal_form(&ensure_wellformed(&s).unwrap()).unwrap();
        assert_eq!(n.check_wellformed(), Ok(()));
        assert!(is_normal(&n, Shape::Strict));
        for v in ["A", "B", "Vtt"] {
            assert!(n.is_omega(v));
        }
    }
}
