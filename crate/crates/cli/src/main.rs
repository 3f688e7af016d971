//! `mubra`: command-line access to the translations, the automaton engine
//! and the fixed-point oracle.
//!
//! Exit status: 0 on success, acceptance, satisfaction or agreement; 1 on
//! rejection, unsatisfiability, failed checks or violated preconditions;
//! 2 on usage, input or parse errors; 3 when the oracle is inconclusive or
//! the engine hits its configuration limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mubra::bra2mu::{eliminate_epsilon, from_bra, totalize};
use mubra::difftest::{run_campaign, CampaignConfig, Property};
use mubra::engine::{run, EngineError, DEFAULT_CONFIG_LIMIT};
use mubra::gen::GenConfig;
use mubra::mu2bra::to_bra;
use mubra::normalize::{ensure_wellformed, is_normal, normal_form_with, Shape};
use mubra::oracle::{satisfies, window_cap, Oracle, Verdict, WindowChoice};
use mubra::textio::{
    parse_bra, parse_lasso, parse_lasso_over, parse_system, serialize_bra, serialize_system, to_dot, ParseError,
};
use mubra::{BuchiRA, EquationSystem, LassoWord};

#[derive(Parser)]
#[command(name = "mubra", version, about = "Register automata and freeze μ-calculus equation systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    System,
    Bra,
    Lasso,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a file and report on its well-formedness.
    Check {
        file: PathBuf,
        /// File kind; guessed from the extension (.mu, .bra, .lasso) when absent.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Bring a system into normal form.
    Normalize {
        system: PathBuf,
        /// Keep disjunctions with any number of operands.
        #[arg(long)]
        extended: bool,
    },
    /// Translate a system into a Büchi register automaton.
    ToBra {
        system: PathBuf,
        /// Print graphviz instead of the automaton format.
        #[arg(long)]
        dot: bool,
    },
    /// Translate an ε-free total automaton into a system.
    FromBra {
        automaton: PathBuf,
        /// Eliminate ε-rules and totalize first.
        #[arg(long)]
        preprocess: bool,
    },
    /// Remove ε-rules.
    EpsElim { automaton: PathBuf },
    /// Give every state at least one rule.
    Totalize { automaton: PathBuf },
    /// Decide whether an automaton accepts a lasso word.
    Run {
        automaton: PathBuf,
        word: PathBuf,
        /// Maximum number of folded configurations to explore.
        #[arg(long, default_value_t = DEFAULT_CONFIG_LIMIT)]
        limit: usize,
    },
    /// Decide satisfaction of a system on a lasso word by fixed-point iteration.
    SatOracle {
        system: PathBuf,
        word: PathBuf,
        /// Fixed window; by default the window grows until the answer is conclusive.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Print the iterates of the fixed-point operator on a window.
    Fixpoint {
        system: PathBuf,
        word: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Run the random differential campaign.
    Difftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 4)]
        max_states: usize,
        #[arg(long, default_value_t = 2)]
        max_regs: usize,
        #[arg(long, default_value_t = 2)]
        max_atoms: usize,
        #[arg(long, default_value_t = 3)]
        max_prefix: usize,
        #[arg(long, default_value_t = 2)]
        max_period: usize,
        /// Restrict to these properties (repeatable).
        #[arg(long = "property")]
        properties: Vec<String>,
        /// Directory for counterexample files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an automaton in graphviz format.
    Dot { automaton: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

type Outcome = Result<u8, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn parse_error(path: &Path, e: ParseError) -> Failure {
    fail(2, format!("{}:{e}", path.display()))
}

fn load_system(path: &Path) -> Result<EquationSystem, Failure> {
    parse_system(&read(path)?).map_err(|e| parse_error(path, e))
}

fn load_bra(path: &Path) -> Result<BuchiRA, Failure> {
    parse_bra(&read(path)?).map_err(|e| parse_error(path, e))
}

fn load_word(path: &Path, atoms: &[String]) -> Result<LassoWord, Failure> {
    parse_lasso_over(&read(path)?, atoms).map_err(|e| parse_error(path, e))
}

fn wellformed(s: &EquationSystem) -> Result<EquationSystem, Failure> {
    ensure_wellformed(s).map_err(|e| fail(1, e.to_string()))
}

fn check(file: &Path, kind: Option<Kind>) -> Outcome {
    let kind = match kind {
        Some(k) => k,
        None => match file.extension().and_then(|e| e.to_str()) {
            Some("mu") => Kind::System,
            Some("bra") => Kind::Bra,
            Some("lasso") => Kind::Lasso,
            _ => return Err(fail(2, "cannot tell the file kind; pass --kind")),
        },
    };
    match kind {
        Kind::System => {
            let s = load_system(file)?;
            println!(
                "system: {} equations, {} registers, omega {{{}}}, main {}",
                s.equations.len(),
                s.k,
                s.omega_vars().join(", "),
                s.main
            );
            let normal = if is_normal(&s, Shape::Strict) {
                "normal form"
            } else if is_normal(&s, Shape::Extended) {
                "extended normal form"
            } else {
                "not in normal form"
            };
            match s.check_wellformed() {
                Ok(()) => {
                    println!("well-formed, {normal}");
                    Ok(0)
                }
                Err(e) => {
                    println!("not well-formed: {e}");
                    Ok(1)
                }
            }
        }
        Kind::Bra => {
            let a = load_bra(file)?;
            println!(
                "automaton: {} states, {} rules ({} ε), {} registers, {} accepting",
                a.states.len(),
                a.rules.len(),
                a.rules.iter().filter(|r| r.guard.is_eps()).count(),
                a.k,
                a.accepting.len()
            );
            println!("{}", if a.is_total() { "total" } else { "not total" });
            Ok(0)
        }
        Kind::Lasso => {
            let w = parse_lasso(&read(file)?).map_err(|e| parse_error(file, e))?;
            println!("lasso word: prefix length {}, period length {}", w.prefix_len(), w.period_len());
            Ok(0)
        }
    }
}

fn translate_system(path: &Path) -> Result<BuchiRA, Failure> {
    let s = wellformed(&load_system(path)?)?;
    let nf = normal_form_with(&s, Shape::Extended).map_err(|e| fail(1, e.to_string()))?;
    to_bra(&nf).map_err(|e| fail(1, e.to_string()))
}

fn fixpoint(system: &Path, word: &Path, rounds: usize, window: Option<usize>) -> Outcome {
    let s = wellformed(&load_system(system)?)?;
    let w = load_word(word, &s.atoms)?;
    let n = window.unwrap_or_else(|| window_cap(&s, &w));
    let o = Oracle::new(&s, &w, n).map_err(|e| fail(1, e.to_string()))?;
    println!("window {n}, domain {{{}}}", o.domain().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", "));
    let mut u = o.empty();
    for round in 1..=rounds {
        let next = o.apply_f(&u);
        for v in o.vars() {
            let tuples: Vec<String> = o.tuples(&next, v).iter().map(|t| t.to_string()).collect();
            println!("u^{round}({v}) = {{{}}}", tuples.join(", "));
        }
        u = next;
    }
    let next = o.apply_f(&u);
    let relation = if next == u { "=" } else { "!=" };
    println!("u^{} {relation} u^{rounds}", rounds + 1);
    Ok(0)
}

fn difftest(seed: u64, cases: usize, gen: GenConfig, names: &[String], out: Option<&Path>) -> Outcome {
    let properties = if names.is_empty() {
        Property::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| {
                Property::from_name(n).ok_or_else(|| {
                    let known: Vec<_> = Property::ALL.iter().map(|p| p.name()).collect();
                    fail(2, format!("unknown property `{n}`; known: {}", known.join(", ")))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let report = run_campaign(&CampaignConfig { seed, cases, gen, properties });
    print!("{report}");
    for cx in &report.counterexamples {
        println!("\ncounterexample for {} (case {}): {}", cx.property.name(), cx.index, cx.message);
        for (name, text) in cx.case.files() {
            println!("--- {name}\n{text}");
            if let Some(dir) = out {
                let dir = dir.join(format!("{}-{}", cx.property.name(), cx.index));
                fs::create_dir_all(&dir).map_err(|e| fail(2, format!("{}: {e}", dir.display())))?;
                let path = dir.join(&name);
                fs::write(&path, text).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Check { file, kind } => check(&file, kind),
        Command::Normalize { system, extended } => {
            let s = wellformed(&load_system(&system)?)?;
            let shape = if extended { Shape::Extended } else { Shape::Strict };
            let nf = normal_form_with(&s, shape).map_err(|e| fail(1, e.to_string()))?;
            print!("{}", serialize_system(&nf));
            Ok(0)
        }
        Command::ToBra { system, dot } => {
            let a = translate_system(&system)?;
            print!("{}", if dot { to_dot(&a) } else { serialize_bra(&a) });
            Ok(0)
        }
        Command::FromBra { automaton, preprocess } => {
            let mut a = load_bra(&automaton)?;
            if preprocess {
                a = totalize(&eliminate_epsilon(&a));
            }
            let s = from_bra(&a).map_err(|e| fail(1, e.to_string()))?;
            print!("{}", serialize_system(&s));
            Ok(0)
        }
        Command::EpsElim { automaton } => {
            print!("{}", serialize_bra(&eliminate_epsilon(&load_bra(&automaton)?)));
            Ok(0)
        }
        Command::Totalize { automaton } => {
            print!("{}", serialize_bra(&totalize(&load_bra(&automaton)?)));
            Ok(0)
        }
        Command::Run { automaton, word, limit } => {
            let a = load_bra(&automaton)?;
            let w = load_word(&word, &a.atoms)?;
            match run(&a, &w, limit) {
                Ok(out) if out.accepted => {
                    println!("accept");
                    if let Some(witness) = &out.witness {
                        println!("witness: {}", witness.display(&a));
                    }
                    Ok(0)
                }
                Ok(_) => {
                    println!("reject");
                    Ok(1)
                }
                Err(e @ EngineError::TooManyConfigs { .. }) => Err(fail(3, e.to_string())),
            }
        }
        Command::SatOracle { system, word, window } => {
            let s = wellformed(&load_system(&system)?)?;
            let w = load_word(&word, &s.atoms)?;
            let choice = window.map_or(WindowChoice::Auto, WindowChoice::Fixed);
            let out = satisfies(&s, &w, choice).map_err(|e| fail(1, e.to_string()))?;
            match out.verdict {
                Verdict::Sat => {
                    println!("sat (window {}, {} rounds)", out.window, out.rounds);
                    Ok(0)
                }
                Verdict::Unsat => {
                    println!("unsat (window {}, {} rounds)", out.window, out.rounds);
                    Ok(1)
                }
                Verdict::Inconclusive { suggested_window } => {
                    println!("inconclusive at window {}; try --window {suggested_window}", out.window);
                    Ok(3)
                }
            }
        }
        Command::Fixpoint { system, word, rounds, window } => fixpoint(&system, &word, rounds, window),
        Command::Difftest {
            seed,
            cases,
            max_states,
            max_regs,
            max_atoms,
            max_prefix,
            max_period,
            properties,
            out,
        } => {
            let gen = GenConfig {
                max_states,
                max_regs,
                max_atoms,
                max_prefix,
                max_period,
                ..GenConfig::default()
            };
            difftest(seed, cases, gen, &properties, out.as_deref())
        }
        Command::Dot { automaton } => {
            print!("{}", to_dot(&load_bra(&automaton)?));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
