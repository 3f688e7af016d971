use mubra::engine::accepts;
use mubra::mu2bra::to_bra;
use mubra::normalize::normal_form;
use mubra::oracle::{satisfies, Oracle, Tuple, Verdict, WindowChoice};
use mubra::textio::{parse_bra, parse_lasso, parse_system, serialize_bra};
use mubra::{Assignment, Datum, EquationSystem, LassoWord, StateId};

fn data(name: &str) -> String {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn system(name: &str) -> EquationSystem {
    parse_system(&data(name)).unwrap()
}

fn word(name: &str) -> LassoWord {
    parse_lasso(&data(name)).unwrap()
}

#[test]
fn sigma1_automaton_matches_stored_file() {
    let a = to_bra(&normal_form(&system("sigma1.mu")).unwrap()).unwrap();
    assert_eq!(serialize_bra(&a), data("bra_sigma1.bra"));
    assert_eq!(parse_bra(&data("bra_sigma1.bra")).unwrap(), a);
    assert_eq!(a.states.len(), 5);
    assert_eq!(a.name(a.initial), "down {1} X V2");
    assert_eq!(a.accepting, [a.state_id("tt").unwrap()].into());
    assert_eq!(a.rules.len(), 6);
}

#[test]
fn sigma2_accepts_the_disjunction_state() {
    let a = to_bra(&normal_form(&system("sigma2.mu")).unwrap()).unwrap();
    assert_eq!(serialize_bra(&a), data("bra_sigma2.bra"));
    let names: Vec<&str> = a.accepting.iter().map(|&q| a.name(q)).collect();
    assert_eq!(names, ["tt", "V1 | V2'"]);
    assert_eq!(a.state_id("tt"), Some(StateId(0)));
}

#[test]
fn sample_words() {
    let (w, w2) = (word("w.lasso"), word("wprime.lasso"));
    let a1 = to_bra(&normal_form(&system("sigma1.mu")).unwrap()).unwrap();
    let a2 = to_bra(&normal_form(&system("sigma2.mu")).unwrap()).unwrap();
    assert!(accepts(&a1, &w).unwrap());
    assert!(!accepts(&a1, &w2).unwrap());
    assert!(accepts(&a2, &w2).unwrap());

    let sat = |s: &EquationSystem, w: &LassoWord| satisfies(s, w, WindowChoice::Auto).unwrap().verdict;
    assert_eq!(sat(&system("sigma1.mu"), &w), Verdict::Sat);
    assert_eq!(sat(&system("sigma1.mu"), &w2), Verdict::Unsat);
    assert_eq!(sat(&system("sigma2.mu"), &w2), Verdict::Sat);
}

#[test]
fn sigma1_fixpoint_tables() {
    let s = system("sigma1.mu");
    let o = Oracle::new(&s, &word("w.lasso"), 9).unwrap();
    let it = o.iterates();
    assert!(o.tuples(&it[1], "V2").is_empty());
    assert_eq!(o.tuples(&it[2], "V2"), o.tuples(&it[1], "V1"));
    let five = Assignment::from_values(vec![Datum::Val(5)]);
    for theta in o.all_assignments() {
        for j in 5..=9 {
            let t = Tuple { i: 1, theta: theta.clone(), j, theta2: five.clone(), x: "Vtt".into() };
            assert!(o.contains(&it[5], "V3", &t), "{t}");
        }
    }
    assert_eq!(o.apply_f(&it[5]), it[5]);
}

#[test]
fn sigma1_on_wprime_stalls_after_three_rounds() {
    let s = system("sigma1.mu");
    let o = Oracle::new(&s, &word("wprime.lasso"), 9).unwrap();
    let it = o.iterates();
    let last = it.last().unwrap();
    assert_eq!(o.tuples(last, "V3"), o.tuples(&it[3], "V3"));
    let lfp = o.lfp().env;
    assert!(o.tuples(&lfp, "V3").iter().all(|t| t.i > 1));
}
