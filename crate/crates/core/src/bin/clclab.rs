use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use clclab::clcs::SEngine;
use clclab::harness::{run_suite, sgraph_to_dot, SuiteConfig};
use clclab::labelled::LTerm;
use clclab::simulation::{extract_reduction_to_f, lift_from_f1};
use clclab::systems::{ConversionSequence, EqVerdict, EqWitness, Fuel, Oracle, SystemId, Trace};
use clclab::term::{Const, Term};

#[derive(Parser)]
#[command(name = "clclab", about = "Conditional combinatory logic workbench")]
struct Cli {
    #[arg(long, global = true, default_value = "CLC")]
    system: SystemId,
    #[arg(long, global = true, default_value_t = 10_000)]
    fuel_steps: usize,
    #[arg(long, global = true, default_value_t = 60)]
    fuel_size: usize,
    #[arg(long, global = true, default_value_t = 8)]
    fuel_level: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Up to N leftmost-outermost steps, one term per line.
    Reduce {
        term: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Normal form by leftmost-outermost reduction.
    Normalize { term: String },
    /// Common reduct of two terms.
    Join { left: String, right: String },
    /// Equality verdict with witness.
    Eq { left: String, right: String },
    /// Lifts a CLC0 conversion ending at F to labelled terms starting at F1.
    /// Reads the conversion as JSON lines from FILE or stdin.
    LabelSimulate { file: Option<String> },
    /// CLC reduction to F from a CLC0 conversion ending at F (JSON lines).
    ExtractToF { file: Option<String> },
    /// Standardness of a labelled term.
    CheckStandard { term: String },
    /// Runs a property suite.
    Suite {
        name: String,
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// s-reduct graph of a labelled term in DOT.
    Graph { term: String },
}

enum Fail {
    Usage(String),
    Hard(String),
}

fn usage<E: std::fmt::Display>(e: E) -> Fail {
    Fail::Usage(e.to_string())
}

fn term(s: &str) -> Result<Term, Fail> {
    Term::parse(s).map_err(usage)
}

fn read_input(file: &Option<String>) -> Result<String, Fail> {
    match file.as_deref() {
        Some("-") | None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(usage)?;
            Ok(s)
        }
        Some(path) => std::fs::read_to_string(path).map_err(usage),
    }
}

fn print_trace(tr: &Trace, as_json: bool) {
    if as_json {
        print!("{}", tr.to_jsonl());
    } else {
        println!("{}", tr.start);
        for s in &tr.steps {
            println!("-> {}    [{}]", s.to, s.step);
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    if cli.fuel_steps == 0 || cli.fuel_size == 0 || cli.fuel_level == 0 {
        return Err(Fail::Usage("fuel values must be positive".into()));
    }
    let fuel = Fuel::new(cli.fuel_steps, cli.fuel_size, cli.fuel_level);
    let oracle = Oracle::new(fuel.clone());
    let sys = cli.system;
    match cli.cmd {
        Cmd::Reduce { term: t, steps } => {
            let mut tr = Trace::empty(term(&t)?);
            for _ in 0..steps {
                let scan = oracle.redexes(sys, tr.end());
                let Some(r) = scan.redexes.first() else { break };
                let (st, next) = oracle.step(sys, tr.end(), &r.position, r.rule).map_err(|e| Fail::Hard(e.to_string()))?;
                tr.push(st, next);
            }
            print_trace(&tr, cli.json);
        }
        Cmd::Normalize { term: t } => {
            let n = oracle.normalize(sys, &term(&t)?);
            if cli.json {
                print!("{}", n.trace.to_jsonl());
            } else {
                println!("{}", n.term);
                if !n.complete {
                    println!("(incomplete: fuel exhausted or a condition was undecided)");
                }
            }
        }
        Cmd::Join { left, right } => {
            let (a, b) = (term(&left)?, term(&right)?);
            match oracle.joinable(sys, &a, &b) {
                Some(j) if cli.json => println!(
                    "{}",
                    json!({"common": j.common, "left": j.left.to_jsonl(), "right": j.right.to_jsonl()})
                ),
                Some(j) => {
                    println!("common reduct: {}", j.common);
                    print_trace(&j.left, false);
                    print_trace(&j.right, false);
                }
                None => println!("no common reduct found within the fuel"),
            }
        }
        Cmd::Eq { left, right } => {
            let (a, b) = (term(&left)?, term(&right)?);
            let v = oracle.eq(sys, &a, &b);
            if cli.json {
                let witness = match &v {
                    EqVerdict::Yes(EqWitness::Identical(t)) => json!({"identical": t}),
                    EqVerdict::Yes(EqWitness::Join(j)) => {
                        json!({"join": {"common": j.common, "left": j.left.to_jsonl(), "right": j.right.to_jsonl()}})
                    }
                    EqVerdict::Yes(EqWitness::Conversion(c)) => json!({"conversion": c.to_jsonl()}),
                    EqVerdict::No(r) => json!({"reason": format!("{:?}", r)}),
                    EqVerdict::Unknown => json!(null),
                };
                println!("{}", json!({"verdict": v.label(), "witness": witness}));
            } else {
                println!("{}", v.label());
                if let EqVerdict::No(_) = v {
                    println!("(distinct complete normal forms; relies on unique normal forms)");
                }
            }
        }
        Cmd::LabelSimulate { file } => {
            let conv = ConversionSequence::from_jsonl(&read_input(&file)?).map_err(usage)?;
            if conv.end() != &Term::Const(Const::F) {
                return Err(Fail::Usage(format!("conversion ends at {}, not F", conv.end())));
            }
            let from_f = conv.reversed();
            let eng = SEngine::new(fuel);
            let ts = lift_from_f1(&eng, &from_f).map_err(|e| Fail::Hard(e.to_string()))?;
            let qs = from_f.terms();
            if cli.json {
                for (t, q) in ts.iter().zip(&qs) {
                    println!("{}", json!({"labelled": t, "term": q}));
                }
            } else {
                for (t, q) in ts.iter().zip(&qs) {
                    println!("{}    refines {}", t, q);
                }
            }
        }
        Cmd::ExtractToF { file } => {
            let conv = ConversionSequence::from_jsonl(&read_input(&file)?).map_err(usage)?;
            let eng = SEngine::new(fuel);
            let tr = extract_reduction_to_f(&eng, &conv).map_err(|e| Fail::Hard(e.to_string()))?;
            print_trace(&tr, cli.json);
        }
        Cmd::CheckStandard { term: t } => {
            let t = LTerm::parse(&t).map_err(usage)?;
            let eng = SEngine::new(fuel);
            let show = |r: Result<bool, clclab::clcs::EngineError>| match r {
                Ok(b) => json!(b),
                Err(e) => json!(format!("unknown ({})", e)),
            };
            let report = json!({
                "standard": show(eng.is_standard(&t)),
                "strongly_standard": show(eng.is_strongly_standard(&t)),
                "leads_to_F1": show(eng.leadsto_f1(&t)),
            });
            if cli.json {
                println!("{}", report);
            } else {
                for k in ["standard", "strongly_standard", "leads_to_F1"] {
                    println!("{:<18} {}", k, report[k]);
                }
            }
        }
        Cmd::Suite { name, cases, size, steps } => {
            let mut cfg = SuiteConfig::for_suite(&name).map_err(usage)?.with_seed(cli.seed);
            if let Some(c) = cases {
                cfg.cases = c;
            }
            if let Some(s) = size {
                cfg.size_bound = s;
            }
            if let Some(s) = steps {
                cfg.steps = s;
            }
            let rep = run_suite(&name, &cfg, &fuel).map_err(usage)?;
            if cli.json {
                println!("{}", serde_json::to_string(&rep).expect("report serializes"));
            } else {
                print!("{}", rep);
            }
            if !rep.passed() {
                return Err(Fail::Hard(format!("{} hard failures", rep.hard_failures())));
            }
        }
        Cmd::Graph { term: t } => {
            let t = LTerm::parse(&t).map_err(usage)?;
            let eng = SEngine::new(fuel);
            print!("{}", sgraph_to_dot(&eng.s_reducts_all(&t)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Hard(m)) => {
            eprintln!("error: {}", m);
            ExitCode::from(1)
        }
        Err(Fail::Usage(m)) => {
            eprintln!("usage error: {}", m);
            ExitCode::from(2)
        }
    }
}
