//! Disjunctive μ-calculus with freeze quantifier over infinite data words,
//! Büchi register automata, and the translations between them.
//!
//! * [`textio`] parses and prints systems of equations, automata and lasso
//!   words.
//! * [`normalize`] desugars systems and brings them into normal form.
//! * [`mu2bra`] and [`bra2mu`] translate in both directions.
//! * [`engine`] decides membership of lasso words in automata.
//! * [`oracle`] evaluates the fixed-point semantics of systems directly and
//!   serves as a reference for the other modules.

pub mod automaton;
pub mod bra2mu;
pub mod data;
pub mod difftest;
pub mod engine;
pub mod formula;
pub mod gen;
pub mod mu2bra;
pub mod normalize;
pub mod oracle;
pub mod system;
pub mod textio;

pub use automaton::{AutomatonError, BuchiRA, Guard, InstantaneousDescription, Rule, StateId};
pub use data::{Assignment, Datum, LassoWord, Letter, RegSet};
pub use formula::{eval_basic, BasicFormula, Formula};
pub use system::{Equation, EquationSystem, SystemError};
