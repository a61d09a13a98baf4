use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::enumerate::{enumerate_lterms, enumerate_terms};
use super::gen::{gen_convertible_to_f, random_lterm, random_redex_term, random_reduction, GenConfig};
use crate::clcs::{AShape, EngineError, LStep, LTrace, SEngine, StepKind};
use crate::labelled::{classify, leftmost_erase, refines, Kind, LabConst, LTerm};
use crate::simulation::{
    check_un_property, extract_reduction_to_f, lift_from_f1, postpone_i, r_to_clc, un_alphabet,
};
use crate::systems::{Dir, EqVerdict, Fuel, Oracle, SystemId, Trace};
use crate::term::{Const, Term};

pub const SUITES: [&str; 8] = [
    "sn",
    "postpone",
    "equivalence",
    "simulation",
    "pipeline",
    "un",
    "confluence-sample",
    "standardness",
];

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error("unknown suite `{0}` (expected one of: sn, postpone, equivalence, simulation, pipeline, un, confluence-sample, standardness)")]
    UnknownSuite(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: u64,
    pub fail: u64,
    pub unknown: u64,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.pass += o.pass;
        self.fail += o.fail;
        self.unknown += o.unknown;
    }

    pub fn decided(&self) -> u64 {
        self.pass + self.fail
    }
}

/// A hard failure. `case` reruns it through [`run_case`]; `witness` is a
/// JSON-lines trace or a JSON object with the offending terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Failure {
    pub case: u64,
    pub property: String,
    pub message: String,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub properties: BTreeMap<String, Tally>,
    /// Undecided checks: fuel exhaustion or Unknown verdicts.
    pub fuel_exhausted: u64,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    pub fn new(suite: &str) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            ..SuiteReport::default()
        }
    }

    fn entry(&mut self, prop: &str) -> &mut Tally {
        self.properties.entry(prop.to_string()).or_default()
    }

    pub fn pass(&mut self, prop: &str) {
        self.entry(prop).pass += 1;
    }

    pub fn unknown(&mut self, prop: &str) {
        self.entry(prop).unknown += 1;
        self.fuel_exhausted += 1;
    }

    pub fn fail(&mut self, prop: &str, case: u64, message: String, witness: String) {
        self.entry(prop).fail += 1;
        self.failures.push(Failure {
            case,
            property: prop.to_string(),
            message,
            witness,
        });
    }

    /// Tallies a checked property; fuel errors are soft.
    fn record(
        &mut self,
        prop: &str,
        case: u64,
        outcome: Result<bool, EngineError>,
        message: impl FnOnce() -> String,
        witness: impl FnOnce() -> String,
    ) {
        match outcome {
            Ok(true) => self.pass(prop),
            Ok(false) => self.fail(prop, case, message(), witness()),
            Err(e) if e.is_fuel() => self.unknown(prop),
            Err(e) => self.fail(prop, case, format!("{}: {}", message(), e), witness()),
        }
    }

    /// Combines two partial reports. Associative and commutative.
    pub fn merge(mut self, other: SuiteReport) -> SuiteReport {
        if self.suite.is_empty() {
            self.suite = other.suite.clone();
        }
        self.cases += other.cases;
        self.fuel_exhausted += other.fuel_exhausted;
        for (k, v) in &other.properties {
            self.entry(k).add(v);
        }
        self.failures.extend(other.failures);
        self.failures.sort();
        self
    }

    pub fn tally(&self, prop: &str) -> Tally {
        self.properties.get(prop).copied().unwrap_or_default()
    }

    pub fn total(&self) -> Tally {
        let mut t = Tally::default();
        for v in self.properties.values() {
            t.add(v);
        }
        t
    }

    pub fn hard_failures(&self) -> usize {
        self.failures.len()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {}: {} cases, {} hard failures, {} undecided",
            self.suite,
            self.cases,
            self.failures.len(),
            self.fuel_exhausted
        )?;
        for (k, v) in &self.properties {
            writeln!(f, "  {:<24} pass {:>8}  fail {:>6}  unknown {:>6}", k, v.pass, v.fail, v.unknown)?;
        }
        for x in self.failures.iter().take(10) {
            writeln!(f, "  case {} [{}]: {}", x.case, x.property, x.message)?;
        }
        if self.failures.len() > 10 {
            writeln!(f, "  ... {} more", self.failures.len() - 10)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub gen: GenConfig,
    /// Number of random cases; exhaustive suites ignore it.
    pub cases: usize,
    /// Node bound for generated or enumerated terms (leaves for `un`).
    pub size_bound: usize,
    /// Steps per conversion, chain, or side of a peak.
    pub steps: usize,
}

impl SuiteConfig {
    /// Default parameters for each suite.
    pub fn for_suite(name: &str) -> Result<SuiteConfig, SuiteError> {
        let (cases, size_bound, steps) = match name {
            "sn" => (2000, 64, 0),
            "postpone" => (3000, 10, 0),
            "equivalence" => (0, 6, 0),
            "simulation" => (500, 25, 5),
            "pipeline" => (1000, 25, 8),
            "un" => (1, 5, 0),
            "confluence-sample" => (500, 15, 4),
            "standardness" => (0, 8, 0),
            _ => return Err(SuiteError::UnknownSuite(name.into())),
        };
        Ok(SuiteConfig {
            gen: GenConfig {
                max_size: size_bound,
                max_expansions: steps,
                ..GenConfig::default()
            },
            cases,
            size_bound,
            steps,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> SuiteConfig {
        self.gen.seed = seed;
        self
    }

    fn case_gen(&self, case: u64) -> GenConfig {
        GenConfig {
            max_size: self.size_bound,
            max_expansions: self.steps,
            ..self.gen.split(case)
        }
    }
}

/// Shared per-run data.
enum Ctx {
    Random(usize),
    Terms(Vec<Term>),
    LTerms(Vec<LTerm>),
}

impl Ctx {
    fn len(&self) -> usize {
        match self {
            Ctx::Random(n) => *n,
            Ctx::Terms(v) => v.len(),
            Ctx::LTerms(v) => v.len(),
        }
    }
}

fn context(name: &str, cfg: &SuiteConfig) -> Result<Ctx, SuiteError> {
    Ok(match name {
        "equivalence" => {
            let consts: Vec<Term> = Const::ALL.iter().map(|&c| Term::Const(c)).collect();
            Ctx::Terms(
                enumerate_terms(cfg.size_bound.div_ceil(2), &consts)
                    .filter(|t| t.size() <= cfg.size_bound)
                    .collect(),
            )
        }
        "standardness" => Ctx::LTerms(enumerate_lterms(cfg.size_bound, &standardness_leaves())),
        "un" => Ctx::Random(1),
        n if SUITES.contains(&n) => Ctx::Random(cfg.cases),
        _ => return Err(SuiteError::UnknownSuite(name.into())),
    })
}

/// Leaves of the exhaustive labelled enumeration.
pub fn standardness_leaves() -> Vec<LTerm> {
    let mut v: Vec<LTerm> = [LabConst::C1, LabConst::C2, LabConst::T1, LabConst::F1, LabConst::K1]
        .into_iter()
        .map(LTerm::Lab)
        .collect();
    v.extend(Const::ALL.iter().map(|&c| LTerm::Const(c)));
    v.push(LTerm::var("x"));
    v
}

/// Runs every case of a suite, sharded across the rayon pool.
pub fn run_suite(name: &str, cfg: &SuiteConfig, fuel: &Fuel) -> Result<SuiteReport, SuiteError> {
    let ctx = context(name, cfg)?;
    let parts: Vec<SuiteReport> = (0..ctx.len() as u64)
        .into_par_iter()
        .map(|case| case_report(name, &ctx, cfg, fuel, case))
        .collect();
    Ok(parts.into_iter().fold(SuiteReport::new(name), SuiteReport::merge))
}

/// Reruns a single case; a failure recorded by [`run_suite`] reappears
/// identically.
pub fn run_case(
    name: &str,
    cfg: &SuiteConfig,
    fuel: &Fuel,
    case: u64,
) -> Result<SuiteReport, SuiteError> {
    let ctx = context(name, cfg)?;
    Ok(case_report(name, &ctx, cfg, fuel, case))
}

fn case_report(name: &str, ctx: &Ctx, cfg: &SuiteConfig, fuel: &Fuel, case: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(name);
    rep.cases = 1;
    match (name, ctx) {
        ("sn", _) => sn_case(cfg, fuel, case, &mut rep),
        ("postpone", _) => postpone_case(cfg, fuel, case, &mut rep),
        ("equivalence", Ctx::Terms(ts)) => equivalence_case(ts, fuel, case, &mut rep),
        ("simulation", _) => simulation_case(cfg, fuel, case, &mut rep),
        ("pipeline", _) => pipeline_case(cfg, fuel, case, &mut rep),
        ("un", _) => un_case(cfg, fuel, &mut rep),
        ("confluence-sample", _) => confluence_case(cfg, fuel, case, &mut rep),
        ("standardness", Ctx::LTerms(ts)) => standardness_case(ts, fuel, case, &mut rep),
        _ => unreachable!("context built for {}", name),
    }
    rep
}

fn step_witness(from: &LTerm, step: &LStep) -> String {
    LTrace {
        start: from.clone(),
        steps: vec![step.clone()],
    }
    .to_jsonl()
}

fn sn_case(cfg: &SuiteConfig, fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let g = cfg.case_gen(case);
    let t = random_lterm(&mut g.rng(), &g, cfg.size_bound);
    let eng = SEngine::new(fuel.clone());
    let graph = eng.s_reducts_all(&t);
    if !graph.is_complete() {
        rep.unknown("graph-complete");
    }
    for (k, (a, b, step)) in graph.edges.iter().enumerate() {
        let (ta, tb) = (&graph.nodes[*a], &graph.nodes[*b]);
        rep.record(
            "sn-measure",
            case,
            Ok(tb.label_count() < ta.label_count()),
            || format!("labels do not decrease: {} -> {}", ta, tb),
            || step_witness(ta, step),
        );
        if k < 8 {
            let (ea, eb) = (leftmost_erase(ta), leftmost_erase(tb));
            let v = eng.oracle().eq(SystemId::Clc, &ea, &eb);
            let outcome = match v {
                EqVerdict::Yes(_) => Ok(true),
                EqVerdict::No(_) => Ok(false),
                EqVerdict::Unknown => Err(EngineError::SearchExhausted("eq".into())),
            };
            rep.record(
                "erasure-stability",
                case,
                outcome,
                || format!("{} and {} are not CLC-equal", ea, eb),
                || step_witness(ta, step),
            );
        }
    }
}

/// CLC expansions of the i-term `q`: `(rule, redex)` with redex contracting
/// to `q` at the root.
fn i_expansions(q: &Term) -> Vec<(u8, Term)> {
    let c = Term::Const;
    let mut out = Vec::new();
    for w in [Term::var("x"), c(Const::T)] {
        out.push((1, Term::apply(c(Const::C), [c(Const::T), q.clone(), w.clone()])));
        out.push((2, Term::apply(c(Const::C), [c(Const::F), w.clone(), q.clone()])));
        out.push((3, Term::apply(c(Const::C), [w.clone(), q.clone(), q.clone()])));
        out.push((4, Term::apply(c(Const::K), [q.clone(), w])));
    }
    if let Term::App(l, r) = q {
        if let (Term::App(a, c1), Term::App(b, c2)) = (&**l, &**r) {
            if c1 == c2 {
                out.push((
                    5,
                    Term::apply(c(Const::S), [(**a).clone(), (**b).clone(), (**c1).clone()]),
                ));
            }
        }
    }
    out
}

/// Pairs `(t, step)` where `step` is a single i-step between `t` and `u`
/// read from `t`.
fn i_neighbours(eng: &SEngine, u: &LTerm, cap: usize) -> Vec<(LTerm, LStep)> {
    let mut out = Vec::new();
    let (reds, _) = eng.i_redexes(u);
    for (pos, rule, _) in reds {
        if let Ok(s) = eng.i_step(u, &pos, rule) {
            let t = s.to.clone();
            out.push((
                t,
                LStep {
                    dir: Dir::Backward,
                    to: u.clone(),
                    ..s
                },
            ));
        }
    }
    for (pos, sub) in u.subterms() {
        let Some(q) = sub.to_term() else { continue };
        for (rule, redex) in i_expansions(&q) {
            let Ok(t) = u.replace_at(&pos, LTerm::from(redex)) else {
                continue;
            };
            if let Ok(s) = eng.i_step(&t, &pos, rule) {
                if &s.to == u {
                    out.push((t, s));
                }
            }
        }
    }
    out.truncate(cap);
    out
}

fn postpone_case(cfg: &SuiteConfig, fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let g = cfg.case_gen(case);
    let u = random_lterm(&mut g.rng(), &g, cfg.size_bound);
    let eng = SEngine::new(fuel.clone());
    let scan = eng.s_redexes(&u);
    if !scan.unknown.is_empty() {
        rep.unknown("s-redex-scan");
    }
    if scan.redexes.is_empty() {
        return;
    }
    for (t, istep) in i_neighbours(&eng, &u, 128) {
        for r in &scan.redexes {
            let sstep = match eng.s_step(&u, &r.position, r.rule) {
                Ok(s) => s,
                Err(e) if e.is_fuel() => {
                    rep.unknown("postpone");
                    continue;
                }
                Err(e) => {
                    rep.fail("s-step", case, e.to_string(), u.to_string());
                    continue;
                }
            };
            let composite = LTrace {
                start: t.clone(),
                steps: vec![istep.clone(), sstep.clone()],
            };
            let outcome = postpone_i(&eng, &t, &istep, &sstep).map(|out| {
                out.start == t
                    && out.end() == &sstep.to
                    && out.steps.first().map(|s| s.kind) == Some(StepKind::S)
                    && out.count(StepKind::S) == 1
                    && out.count(StepKind::I) <= 1
            });
            rep.record(
                "postpone",
                case,
                outcome,
                || format!("no postponement of {}", composite),
                || composite.to_jsonl(),
            );
        }
    }
}

fn verdict_json(v: &EqVerdict) -> &'static str {
    v.label()
}

fn equivalence_case(terms: &[Term], fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let eng = SEngine::new(fuel.clone());
    let o = eng.oracle();
    let i = case as usize;
    let a = &terms[i];
    let systems = [SystemId::Clc0, SystemId::Clc, SystemId::ClcPlus];
    for b in &terms[i + 1..] {
        let vs: Vec<EqVerdict> = systems.iter().map(|&s| o.eq(s, a, b)).collect();
        if vs.iter().any(EqVerdict::is_unknown) {
            rep.unknown("oracle-agreement");
        } else {
            let agree = vs.iter().all(|v| v.is_yes() == vs[0].is_yes());
            rep.record(
                "oracle-agreement",
                case,
                Ok(agree),
                || format!("eq verdicts differ on {} and {}", a, b),
                || {
                    json!({
                        "left": a.to_string(),
                        "right": b.to_string(),
                        "verdicts": vs.iter().map(verdict_json).collect::<Vec<_>>(),
                    })
                    .to_string()
                },
            );
        }
        for (s, v) in systems.iter().zip(&vs) {
            if let EqVerdict::Yes(w) = v {
                let r = o.replay_witness(a, b, w);
                rep.record(
                    "witness-replay",
                    case,
                    Ok(r.is_ok()),
                    || format!("{} witness for {} = {} does not replay: {:?}", s, a, b, r),
                    || json!({"left": a.to_string(), "right": b.to_string(), "system": s.to_string()}).to_string(),
                );
            }
        }
    }
    // every CLC0 step is an R step
    let r_scan = o.redexes(SystemId::R, a);
    for r in o.redexes(SystemId::Clc0, a).redexes {
        let Ok(q2) = o.contract(SystemId::Clc0, a, &r.position, r.rule) else {
            continue;
        };
        let found = r_scan.redexes.iter().any(|x| {
            x.position == r.position
                && o.contract(SystemId::R, a, &x.position, x.rule).as_ref() == Ok(&q2)
        });
        rep.record(
            "clc0-in-r",
            case,
            Ok(found),
            || format!("CLC0 step of {} at {} is not an R step", a, r.position),
            || a.to_string(),
        );
    }
    // every R step is simulated by a CLC reduction
    for r in &r_scan.redexes {
        let Ok((st, q2)) = o.step(SystemId::R, a, &r.position, r.rule) else {
            continue;
        };
        let mut tr = Trace::empty(a.clone());
        tr.push(st, q2.clone());
        let outcome = match r_to_clc(&eng, &tr) {
            Ok(c) => Ok(o.replay_trace(&c).is_ok() && &c.start == a && c.end() == &q2),
            Err(e) => Err(e.source),
        };
        rep.record(
            "r-simulation",
            case,
            outcome,
            || format!("R step {} -> {} has no CLC reduction", a, q2),
            || tr.to_jsonl(),
        );
    }
    if i == 0 {
        t_ne_f(fuel, case, rep);
    }
}

/// `T` and `F` are never found equal, at a range of fuels.
fn t_ne_f(fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let t = Term::Const(Const::T);
    let f = Term::Const(Const::F);
    let fuels = [
        fuel.clone(),
        fuel.with_level(1),
        fuel.with_level(2),
        Fuel::new(200, 20, 3),
        Fuel::new(fuel.max_steps * 2, fuel.max_term_size, fuel.max_level + 2),
    ];
    for fu in fuels {
        let o = Oracle::new(fu.clone());
        for sys in [SystemId::Clc0, SystemId::Clc, SystemId::ClcPlus] {
            let v = o.eq(sys, &t, &f);
            rep.record(
                "t-ne-f",
                case,
                Ok(!v.is_yes()),
                || format!("eq({}, T, F) = yes at {:?}", sys, fu),
                || json!({"fuel": fu, "system": sys.to_string()}).to_string(),
            );
        }
        let c = o.conversion_search_clc0(&t, &f);
        rep.record(
            "t-ne-f",
            case,
            Ok(c.is_none()),
            || format!("conversion between T and F at {:?}", fu),
            || c.as_ref().map(|c| c.to_jsonl()).unwrap_or_default(),
        );
    }
}

fn simulation_case(cfg: &SuiteConfig, fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let conv = gen_convertible_to_f(&cfg.case_gen(case)).reversed();
    let eng = SEngine::new(fuel.clone());
    match lift_from_f1(&eng, &conv) {
        Ok(ts) => {
            rep.pass("lift");
            for (k, (t, q)) in ts.iter().zip(conv.terms()).enumerate() {
                rep.record(
                    "refines",
                    case,
                    Ok(refines(t, &q)),
                    || format!("stage {}: {} does not refine {}", k, t, q),
                    || conv.to_jsonl(),
                );
                rep.record(
                    "leadsto",
                    case,
                    eng.leadsto_f1(t),
                    || format!("stage {}: {} does not lead to F1", k, t),
                    || conv.to_jsonl(),
                );
            }
        }
        Err(e) if e.is_fuel() => rep.unknown("lift"),
        Err(e) => rep.fail("lift", case, e.to_string(), conv.to_jsonl()),
    }
}

fn pipeline_case(cfg: &SuiteConfig, fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let conv = gen_convertible_to_f(&cfg.case_gen(case));
    let eng = SEngine::new(fuel.clone());
    match extract_reduction_to_f(&eng, &conv) {
        Ok(tr) => {
            rep.pass("extract");
            let check = Oracle::new(fuel.clone());
            let replay = check.replay_trace(&tr);
            let ok = replay.is_ok()
                && tr.start == conv.start
                && tr.end() == &Term::Const(Const::F)
                && tr.steps.iter().all(|s| s.step.system == SystemId::Clc);
            rep.record(
                "replay",
                case,
                Ok(ok),
                || format!("output does not replay as a CLC reduction to F: {:?}", replay),
                || tr.to_jsonl(),
            );
        }
        Err(e) if e.is_fuel() => rep.unknown("extract"),
        Err(e) => rep.fail("extract", case, e.to_string(), conv.to_jsonl()),
    }
}

fn un_case(cfg: &SuiteConfig, fuel: &Fuel, rep: &mut SuiteReport) {
    let r = check_un_property(cfg.size_bound, &un_alphabet(), fuel);
    let nf = rep.entry("nf-uniqueness");
    nf.pass += (r.normal_forms - r.nf_violations.len()) as u64;
    let tr = rep.entry("redex-transfer");
    tr.pass += r.transfer_checked as u64;
    tr.unknown += r.unknown as u64;
    rep.fuel_exhausted += r.unknown as u64;
    for v in &r.nf_violations {
        rep.fail(
            "nf-uniqueness",
            0,
            format!("distinct CLC0-normal forms {} and {} are convertible", v.left, v.right),
            v.conversion.to_jsonl(),
        );
    }
    for t in &r.redex_transfer_violations {
        rep.fail(
            "redex-transfer",
            0,
            format!("{} has a CLC redex but no CLC0 redex", t),
            t.to_string(),
        );
    }
}

fn complete_nf(o: &Oracle, t: &Term) -> bool {
    let s = o.redexes(SystemId::Clc, t);
    s.redexes.is_empty() && s.unknown.is_empty()
}

fn confluence_case(cfg: &SuiteConfig, fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let g = cfg.case_gen(case);
    let mut rng = g.rng();
    let o = Oracle::new(fuel.clone());
    let mut s = random_redex_term(&mut rng, &g, cfg.size_bound);
    for _ in 0..32 {
        if o.redexes(SystemId::Clc, &s).redexes.len() >= 2 {
            break;
        }
        s = random_redex_term(&mut rng, &g, cfg.size_bound);
    }
    let (nl, nr) = (rng.gen_range(1..=cfg.steps.max(1)), rng.gen_range(1..=cfg.steps.max(1)));
    // the two sides start with different redexes when there are two
    let scan = o.redexes(SystemId::Clc, &s);
    let first = rng.gen_range(0..scan.redexes.len().max(1));
    let mut side = |k: usize, n: usize| {
        let mut tr = Trace::empty(s.clone());
        if let Some(r) = scan.redexes.get(k % scan.redexes.len().max(1)) {
            if let Ok((st, next)) = o.step(SystemId::Clc, &s, &r.position, r.rule) {
                tr.push(st, next);
            }
        }
        let rest = random_reduction(&mut rng, &o, SystemId::Clc, tr.end(), n - 1);
        tr.extend(rest);
        tr
    };
    let left = side(first, nl);
    let right = side(first + 1, nr);
    let (a, b) = (left.end(), right.end());
    if a != b {
        rep.pass("distinct-ends");
    }
    let witness = || json!({"left": left.to_jsonl(), "right": right.to_jsonl()}).to_string();
    match o.joinable(SystemId::Clc, a, b) {
        Some(j) => {
            let r = o.replay_join(a, b, &j);
            rep.record(
                "join",
                case,
                Ok(r.is_ok()),
                || format!("join of {} and {} does not replay: {:?}", a, b, r),
                witness,
            );
        }
        None if a != b && complete_nf(&o, a) && complete_nf(&o, b) => rep.fail(
            "join",
            case,
            format!("distinct normal forms {} and {} from {}", a, b, s),
            witness(),
        ),
        None => rep.unknown("join"),
    }
}

/// a-redexes with contractum `sub`: one per shape, with `q = x`.
fn a_shapes(eng: &SEngine, sub: &LTerm) -> Vec<AShape> {
    let q = Term::var("x");
    let mut shapes = vec![
        AShape::C1T1 { q: q.clone() },
        AShape::C1F1 { q: q.clone() },
        AShape::K1 { q: q.clone() },
        AShape::S,
    ];
    let g = eng.s_reducts_all(sub);
    let near: Vec<&LTerm> = g.nodes.iter().take(3).collect();
    for a in &near {
        for b in &near {
            shapes.push(AShape::C2 {
                q: q.clone(),
                t1: (*a).clone(),
                t2: (*b).clone(),
            });
        }
    }
    shapes
}

fn standardness_case(terms: &[LTerm], fuel: &Fuel, case: u64, rep: &mut SuiteReport) {
    let t = &terms[case as usize];
    let eng = SEngine::new(fuel.clone());
    match eng.is_strongly_standard(t) {
        Ok(true) => {}
        Ok(false) => return,
        Err(_) => {
            rep.unknown("premise");
            return;
        }
    }
    let t_leads = eng.leadsto_f1(t);
    for (pos, sub) in t.subterms() {
        if classify(sub) != Kind::STerm {
            continue;
        }
        for shape in a_shapes(&eng, sub) {
            let redex = match eng.a_expand(sub, &shape) {
                Ok(r) => r,
                Err(e) if e.is_fuel() => {
                    rep.unknown("a-expand");
                    continue;
                }
                Err(_) => continue,
            };
            let tp = t.replace_at(&pos, redex.clone()).expect("position of t");
            let a_step = LTrace {
                start: tp.clone(),
                steps: vec![LStep {
                    dir: Dir::Forward,
                    kind: StepKind::A,
                    position: pos.clone(),
                    rule: shape.id(),
                    level: 0,
                    to: t.clone(),
                }],
            };
            let witness = || a_step.to_jsonl();
            rep.record(
                "a-redex-check",
                case,
                eng.a_root(&redex, sub)
                    .and_then(|r| Ok(r == Some(shape.id()) && eng.a_redex_check(&tp, t)?)),
                || format!("{} -> {} is not recognised as an a-step", tp, t),
                witness,
            );
            rep.record(
                "transport",
                case,
                eng.is_standard(&tp),
                || format!("{} is not standard although {} is strongly standard", tp, t),
                witness,
            );
            rep.record(
                "s-term-preservation",
                case,
                Ok(classify(&redex) == Kind::STerm
                    && (classify(t) != Kind::STerm || classify(&tp) == Kind::STerm)),
                || format!("a-expansion {} of {} is not an s-term", tp, t),
                witness,
            );
            let scan = eng.s_redexes(&tp);
            let outcome = if scan.redexes.iter().any(|r| r.position == pos) {
                Ok(true)
            } else if scan.unknown.iter().any(|(p, _)| p == &pos) {
                Err(EngineError::ConditionUnknown { position: pos.clone() })
            } else {
                Ok(false)
            };
            rep.record(
                "a-redex-is-s-redex",
                case,
                outcome,
                || format!("a-redex at {} in {} is not an s-redex", pos, tp),
                witness,
            );
            // t' ->s t'' <-*s t, and the commutation square for every s-step of t'
            let t_graph = eng.s_reducts_all(t);
            let mut soundness: Result<bool, EngineError> = Ok(false);
            for r in &scan.redexes {
                let t1p = match eng.s_step(&tp, &r.position, r.rule) {
                    Ok(s) => s.to,
                    Err(e) => {
                        rep.record("commutation", case, Err(e), String::new, witness);
                        continue;
                    }
                };
                if t_graph.contains(&t1p) {
                    soundness = Ok(true);
                }
                let mut found: Result<bool, EngineError> = Ok(false);
                for n in &t_graph.nodes {
                    if n == &t1p {
                        found = Ok(true);
                        break;
                    }
                    match eng.a_redex_check(&t1p, n) {
                        Ok(true) => {
                            found = Ok(true);
                            break;
                        }
                        Ok(false) => {}
                        Err(e) => found = Err(e),
                    }
                }
                if found == Ok(false) && !t_graph.is_complete() {
                    found = Err(EngineError::GraphTooLarge(t_graph.nodes.len()));
                }
                rep.record(
                    "commutation",
                    case,
                    found,
                    || format!("no s-reduct of {} closes the square at {}", t, t1p),
                    witness,
                );
            }
            if soundness == Ok(false) && !t_graph.is_complete() {
                soundness = Err(EngineError::GraphTooLarge(t_graph.nodes.len()));
            }
            rep.record(
                "a-step-soundness",
                case,
                soundness,
                || format!("no common s-reduct for {} ->a {}", tp, t),
                witness,
            );
            if let Ok(true) = t_leads {
                rep.record(
                    "expand-leadsto",
                    case,
                    eng.leadsto_f1(&tp),
                    || format!("{} leads to F1 but {} does not", t, tp),
                    witness,
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, cases: usize) -> SuiteConfig {
        let mut c = SuiteConfig::for_suite(name).unwrap();
        c.cases = cases;
        c
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(
            run_suite("nope", &small("sn", 1), &Fuel::default()),
            Err(SuiteError::UnknownSuite(_))
        ));
    }

    #[test]
    fn merge_is_associative() {
        let fuel = Fuel::default();
        let cfg = small("sn", 6);
        let parts: Vec<SuiteReport> = (0..6)
            .map(|i| run_case("sn", &cfg, &fuel, i).unwrap())
            .collect();
        let left = parts.iter().cloned().fold(SuiteReport::new("sn"), SuiteReport::merge);
        let right = parts
            .iter()
            .cloned()
            .rev()
            .fold(SuiteReport::new("sn"), |acc, p| p.merge(acc));
        assert_eq!(left, right);
        assert_eq!(left, run_suite("sn", &cfg, &fuel).unwrap());
    }

    #[test]
    fn small_runs_are_deterministic_and_clean() {
        let fuel = Fuel::default();
        for name in ["sn", "simulation", "pipeline", "confluence-sample"] {
            let cfg = small(name, 12);
            let a = run_suite(name, &cfg, &fuel).unwrap();
            assert_eq!(a, run_suite(name, &cfg, &fuel).unwrap(), "{}", name);
            assert!(a.passed(), "{}", a);
            assert!(a.total().pass > 0, "{}", a);
        }
    }

    #[test]
    fn failures_rerun_identically() {
        let fuel = Fuel::default();
        let cfg = small("postpone", 40);
        let rep = run_suite("postpone", &cfg, &fuel).unwrap();
        for f in rep.failures.iter().take(3) {
            let again = run_case("postpone", &cfg, &fuel, f.case).unwrap();
            assert!(again.failures.contains(f));
        }
    }
}
