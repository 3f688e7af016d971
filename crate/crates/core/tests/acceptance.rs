//! Acceptance suite: one PASS/FAIL line per criterion, with timings.
//! Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use mubra::automaton::Guard;
use mubra::difftest::{run_campaign, CampaignConfig, Property, Report};
use mubra::engine::accepts;
use mubra::gen::GenConfig;
use mubra::mu2bra::to_bra;
use mubra::normalize::normal_form;
use mubra::oracle::{Oracle, Tuple};
use mubra::textio::{parse_lasso, parse_system, serialize_bra};
use mubra::{Assignment, BasicFormula, BuchiRA, Datum, EquationSystem, LassoWord, RegSet};

const SEED: u64 = 20261014;

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

fn automaton_of(name: &str) -> BuchiRA {
    to_bra(&normal_form(&system(name)).unwrap()).unwrap()
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn has_rule(a: &BuchiRA, from: &str, guard: Guard, update: RegSet, to: &str) -> bool {
    a.rules.iter().any(|r| {
        a.name(r.source) == from && r.guard == guard && r.update == update && a.name(r.target) == to
    })
}

fn sigma1_automaton() -> Outcome {
    let a = automaton_of("sigma1.mu");
    let text_ok = serialize_bra(&a) == data("bra_sigma1.bra");
    let eps = |to| has_rule(&a, "V1 | V2'", Guard::Eps, RegSet::empty(), to);
    let shape_ok = a.states.len() == 5
        && a.name(a.initial) == "down {1} X V2"
        && a.accepting.iter().map(|&q| a.name(q)).eq(["tt"])
        && a.rules.len() == 6
        && has_rule(&a, "tt", Guard::Basic(BasicFormula::True), RegSet::empty(), "tt")
        && eps("X tt & up 1")
        && eps("X V2 & (!up 1 & p1)");
    let b = automaton_of("sigma2.mu");
    let sigma2_ok = b.accepting.iter().map(|&q| b.name(q)).eq(["tt", "V1 | V2'"])
        && b.states == a.states
        && b.rules == a.rules;
    outcome(
        text_ok && shape_ok && sigma2_ok,
        format!("serialization {text_ok}, structure {shape_ok}, second system {sigma2_ok}"),
    )
}

fn memberships() -> Outcome {
    let (w, w2) = (word("w.lasso"), word("wprime.lasso"));
    let (a1, a2) = (automaton_of("sigma1.mu"), automaton_of("sigma2.mu"));
    let got = [accepts(&a1, &w).unwrap(), accepts(&a1, &w2).unwrap(), accepts(&a2, &w2).unwrap()];
    outcome(got == [true, false, true], format!("accepts = {got:?}, expected [true, false, true]"))
}

fn fixpoint_tables() -> Outcome {
    let s = system("sigma1.mu");
    let o = Oracle::new(&s, &word("w.lasso"), 9).unwrap();
    let mut u = vec![o.empty()];
    for _ in 0..6 {
        let next = o.apply_f(u.last().unwrap());
        u.push(next);
    }
    let first = o.tuples(&u[1], "V2").is_empty();
    let second = o.tuples(&u[2], "V2") == o.tuples(&u[1], "V1");
    let five = Assignment::from_values(vec![Datum::Val(5)]);
    let fifth = o.all_assignments().all(|theta| {
        (5..=9).all(|j| {
            let t = Tuple { i: 1, theta: theta.clone(), j, theta2: five.clone(), x: "Vtt".into() };
            o.contains(&u[5], "V3", &t)
        })
    });
    let stable = u[6] == u[5];
    outcome(
        first && second && fifth && stable,
        format!("u1(V2)=∅ {first}, u2(V2)=u1(V1) {second}, u5(V3) ⊇ targets {fifth}, u6=u5 {stable}"),
    )
}

fn campaign(properties: Vec<Property>, cases: usize) -> Report {
    run_campaign(&CampaignConfig {
        seed: SEED,
        cases,
        gen: GenConfig::default(),
        properties,
    })
}

fn summarize(report: &Report) -> (bool, String) {
    let mut ok = report.all_passed();
    let mut parts = Vec::new();
    for s in &report.stats {
        ok &= s.skipped == 0;
        parts.push(format!(
            "{}: {}/{} pass, {} inconclusive, {} fail, {} comparisons",
            s.property.name(),
            s.passed,
            s.cases,
            s.inconclusive,
            s.failed,
            s.tuples
        ));
    }
    for cx in &report.counterexamples {
        parts.push(format!("counterexample {} #{}: {}", cx.property.name(), cx.index, cx.message));
    }
    (ok, parts.join("; "))
}

fn tuples_vs_runs() -> Outcome {
    let r = campaign(vec![Property::TuplesVsRuns], 200);
    let (ok, detail) = summarize(&r);
    outcome(ok && r.stats[0].passed >= 200, detail)
}

fn sat_vs_accept() -> Outcome {
    let r = campaign(vec![Property::SatVsAccept], 200);
    let (ok, detail) = summarize(&r);
    let s = &r.stats[0];
    let rate = s.inconclusive as f64 / s.cases as f64;
    outcome(ok && rate < 0.05, format!("{detail}; inconclusive rate {:.1}%", 100.0 * rate))
}

fn bra_round_trip() -> Outcome {
    let r = campaign(vec![Property::BraRoundTrip], 200);
    let (ok, detail) = summarize(&r);
    outcome(ok && r.stats[0].tuples >= 1000, detail)
}

fn preprocessing() -> Outcome {
    let r = campaign(vec![Property::EpsElim, Property::Totalize, Property::Preprocess], 200);
    let (ok, detail) = summarize(&r);
    outcome(ok && r.stats.iter().all(|s| s.tuples >= 100), detail)
}

fn normal_forms() -> Outcome {
    let r = campaign(vec![Property::NormalForm], 200);
    let (ok, detail) = summarize(&r);
    outcome(ok && r.stats[0].passed >= 100, detail)
}

fn algebraic() -> Outcome {
    let r = campaign(vec![Property::Monotonicity, Property::Locality, Property::Periodicity], 1000);
    let (ok, detail) = summarize(&r);
    outcome(ok && r.stats.iter().all(|s| s.passed >= 1000), detail)
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("translated automaton", Duration::from_secs(1), sigma1_automaton),
        ("example memberships", Duration::from_secs(1), memberships),
        ("fixpoint tables", Duration::from_secs(10), fixpoint_tables),
        ("tuples vs runs", Duration::from_secs(300), tuples_vs_runs),
        ("satisfaction vs acceptance", Duration::from_secs(300), sat_vs_accept),
        ("automaton round trip", Duration::from_secs(300), bra_round_trip),
        ("preprocessing", Duration::from_secs(300), preprocessing),
        ("normal form", Duration::from_secs(300), normal_forms),
        ("oracle algebra", Duration::from_secs(300), algebraic),
    ];
    let mut failed = 0;
    for (n, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let ok = out.ok && elapsed < *budget;
        failed += usize::from(!ok);
        println!(
            "{} criterion {} ({name}) in {:.3}s [budget {}s]: {}",
            if ok { "PASS" } else { "FAIL" },
            n + 1,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
