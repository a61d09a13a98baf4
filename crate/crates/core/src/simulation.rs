//! Constructive content of the confluence proof: labelled simulation of
//! CLC0 contractions and expansions, postponement of i-steps, tuple-free
//! reductions, and extraction of CLC reductions to `F`.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::clcs::{AShape, EngineError, LStep, LTrace, SEngine, SRule, StepKind};
use crate::harness::enumerate_terms;
use crate::labelled::{leftmost_erase, refines, LabConst, LTerm};
use crate::systems::{
    ContractError, ConversionSequence, Dir, EqVerdict, EqWitness, Fuel, Oracle, Step, SystemId,
    Trace,
};
use crate::term::{Const, Position, Term};

/// A failure of the extraction pipeline, tagged with the obligation that
/// could not be met.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: String,
    #[source]
    pub source: EngineError,
}

impl PipelineError {
    fn new(stage: impl Into<String>, source: EngineError) -> PipelineError {
        PipelineError {
            stage: stage.into(),
            source,
        }
    }

    /// Fuel exhaustion rather than a logical failure.
    pub fn is_fuel(&self) -> bool {
        self.source.is_fuel()
    }
}

fn contract_err(e: ContractError) -> EngineError {
    match e {
        ContractError::ConditionUnknown { position, .. } => EngineError::ConditionUnknown { position },
        other => EngineError::Invariant(other.to_string()),
    }
}

fn root() -> Position {
    Position::root()
}

fn at(i: usize) -> Position {
    Position::root().child(i)
}

fn single(t: &LTerm, step: LStep) -> (LTerm, LTrace) {
    let mut tr = LTrace::empty(t.clone());
    let to = step.to.clone();
    tr.push(step);
    (to, tr)
}

/// Runs `f` on every tuple element in turn; `f` returns the new element and
/// a trace from the old element to it.
fn forward_in_tuple(
    t: &LTerm,
    es: &[LTerm],
    mut f: impl FnMut(&LTerm) -> Result<(LTerm, LTrace), EngineError>,
) -> Result<(LTerm, LTrace), EngineError> {
    let mut cur = t.clone();
    let mut trace = LTrace::empty(t.clone());
    for (i, e) in es.iter().enumerate() {
        let (e2, tr) = f(e)?;
        trace.extend(tr.lift(&cur, &at(i))?);
        cur = cur.replace_at(&at(i), e2)?;
    }
    Ok((cur, trace))
}

/// Like [`forward_in_tuple`], but `f` returns the new element and a trace
/// from the new element to the old one.
fn backward_in_tuple(
    t: &LTerm,
    es: &[LTerm],
    mut f: impl FnMut(&LTerm) -> Result<(LTerm, LTrace), EngineError>,
) -> Result<(LTerm, LTrace), EngineError> {
    let mut parts = Vec::with_capacity(es.len());
    for e in es {
        parts.push(f(e)?);
    }
    let start = LTerm::Tuple(parts.iter().map(|(e, _)| e.clone()).collect());
    let mut cur = start.clone();
    let mut trace = LTrace::empty(start);
    for (i, (_, tr)) in parts.into_iter().enumerate() {
        trace.extend(tr.lift(&cur, &at(i))?);
        cur = cur.replace_at(&at(i), es[i].clone())?;
    }
    debug_assert_eq!(&cur, t);
    Ok((trace.start.clone(), trace))
}

fn check_clc0(step: &Step) -> Result<(), EngineError> {
    if step.system != SystemId::Clc0 {
        return Err(EngineError::Precondition(format!(
            "expected a CLC0 step, got {}",
            step.system
        )));
    }
    Ok(())
}

/// Simulates `q ->CLC0 q'` on a strongly standard `t` refining `q`. Returns
/// `t'` refining `q'` and a trace `t ->*{i,s} t'`.
pub fn simulate_contraction(
    eng: &SEngine,
    t: &LTerm,
    q: &Term,
    step: &Step,
) -> Result<(LTerm, LTrace), EngineError> {
    check_clc0(step)?;
    if !refines(t, q) {
        return Err(EngineError::Precondition(format!("{} does not refine {}", t, q)));
    }
    let q2 = eng
        .oracle()
        .contract(SystemId::Clc0, q, &step.position, step.rule)
        .map_err(|e| EngineError::Precondition(e.to_string()))?;
    if !eng.is_strongly_standard(t)? {
        return Err(EngineError::Precondition(format!("{} is not strongly standard", t)));
    }
    let (t2, tr) = contr_rec(eng, t, q, step.position.as_slice(), step.rule)?;
    if !refines(&t2, &q2) {
        return Err(EngineError::Invariant(format!("{} does not refine {}", t2, q2)));
    }
    eng.replay(&tr)?;
    Ok((t2, tr))
}

fn contr_rec(
    eng: &SEngine,
    t: &LTerm,
    q: &Term,
    p: &[usize],
    rule: u8,
) -> Result<(LTerm, LTrace), EngineError> {
    if t.is_iterm() {
        let s = eng.i_step(t, &Position::from_slice(p), rule)?;
        return Ok(single(t, s));
    }
    if let LTerm::Tuple(es) = t {
        return forward_in_tuple(t, es, |e| contr_rec(eng, e, q, p, rule));
    }
    if let [i, rest @ ..] = p {
        let (LTerm::App(tl, tr), Term::App(ql, qr)) = (t, q) else {
            return Err(EngineError::Precondition(format!("{} does not match {}", t, q)));
        };
        let (child, qc) = if *i == 0 { (tl, ql) } else { (tr, qr) };
        let (c2, trace) = contr_rec(eng, child, qc, rest, rule)?;
        return Ok((t.replace_at(&at(*i), c2)?, trace.lift(t, &at(*i))?));
    }
    contr_root(eng, t, q, rule)
}

fn contr_root(
    eng: &SEngine,
    t: &LTerm,
    q: &Term,
    rule: u8,
) -> Result<(LTerm, LTrace), EngineError> {
    let q2 = eng
        .oracle()
        .contract(SystemId::Clc0, q, &root(), rule)
        .map_err(|e| EngineError::Precondition(e.to_string()))?;
    let mut fuel_err = None;
    let candidates: &[SRule] = match rule {
        1 => &[SRule::C1T1, SRule::C2T, SRule::C2T1, SRule::C2Eq],
        2 => &[SRule::C1F1, SRule::C2F, SRule::C2F1, SRule::C2Eq],
        3 => &[SRule::C2Eq],
        4 => &[SRule::K1],
        _ => &[SRule::S],
    };
    for &r in candidates {
        match eng.s_step(t, &root(), r) {
            Ok(s) if refines(&s.to, &q2) => return Ok(single(t, s)),
            Ok(_) => {}
            Err(e) if e.is_fuel() => fuel_err = Some(e),
            Err(_) => {}
        }
    }
    let (head, args) = t.spine();
    if rule == 3 && head.is_lab(&LabConst::C1) && args.len() == 3 {
        // Reduce the condition to T1 or F1 first.
        let g = eng.s_reducts_all(args[0]);
        for (target, r) in [(LabConst::T1, SRule::C1T1), (LabConst::F1, SRule::C1F1)] {
            if let Some(i) = g.index_of(&LTerm::Lab(target)) {
                let cond = Position::from_slice(&[0, 0, 1]);
                let mut trace = g.path_to(i).lift(t, &cond)?;
                let s = eng.s_step(trace.end(), &root(), r)?;
                let to = s.to.clone();
                trace.push(s);
                return Ok((to, trace));
            }
        }
        g.check_complete()?;
    }
    if let Some(e) = fuel_err {
        return Err(e);
    }
    Err(EngineError::Stuck(format!(
        "no simulation of CLC0 rule {} at the root of {}",
        rule, t
    )))
}

/// Simulates the expansion `q <-CLC0 q'` (the step contracts `q'` to `q`) on
/// a standard `t` refining `q`. Returns `t'` refining `q'` and a trace
/// `t' ->*{i,a} t`.
pub fn simulate_expansion(
    eng: &SEngine,
    t: &LTerm,
    q: &Term,
    q_prime: &Term,
    step: &Step,
) -> Result<(LTerm, LTrace), EngineError> {
    check_clc0(step)?;
    if !refines(t, q) {
        return Err(EngineError::Precondition(format!("{} does not refine {}", t, q)));
    }
    let back = eng
        .oracle()
        .contract(SystemId::Clc0, q_prime, &step.position, step.rule)
        .map_err(|e| EngineError::Precondition(e.to_string()))?;
    if &back != q {
        return Err(EngineError::Precondition(format!(
            "{} does not contract to {}",
            q_prime, q
        )));
    }
    if !eng.is_standard(t)? {
        return Err(EngineError::Precondition(format!("{} is not standard", t)));
    }
    let redex = q_prime.subterm_at(&step.position)?;
    let (t2, tr) = exp_rec(eng, t, redex, step.position.as_slice(), step.rule)?;
    if !refines(&t2, q_prime) {
        return Err(EngineError::Invariant(format!(
            "{} does not refine {}",
            t2, q_prime
        )));
    }
    eng.replay(&tr)?;
    if tr.start != t2 || tr.end() != t {
        return Err(EngineError::Invariant("expansion trace endpoints".into()));
    }
    Ok((t2, tr))
}

fn exp_rec(
    eng: &SEngine,
    t: &LTerm,
    redex: &Term,
    p: &[usize],
    rule: u8,
) -> Result<(LTerm, LTrace), EngineError> {
    if t.is_iterm() {
        let pos = Position::from_slice(p);
        let t2 = t.replace_at(&pos, LTerm::from(redex))?;
        let s = eng.i_step(&t2, &pos, rule)?;
        if &s.to != t {
            return Err(EngineError::Invariant(format!("i-expansion of {} misses", t)));
        }
        return Ok((t2.clone(), single(&t2, s).1));
    }
    if let LTerm::Tuple(es) = t {
        return backward_in_tuple(t, es, |e| exp_rec(eng, e, redex, p, rule));
    }
    if let [i, rest @ ..] = p {
        let LTerm::App(tl, tr) = t else {
            return Err(EngineError::Precondition(format!("{} has no position {}", t, i)));
        };
        let child = if *i == 0 { tl } else { tr };
        let (c2, trace) = exp_rec(eng, child, redex, rest, rule)?;
        let t2 = t.replace_at(&at(*i), c2)?;
        return Ok((t2.clone(), trace.lift(&t2, &at(*i))?));
    }
    let (_, args) = redex.spine();
    let shape = match rule {
        1 => AShape::C1T1 { q: args[2].clone() },
        2 => AShape::C1F1 { q: args[1].clone() },
        3 => AShape::C2 {
            q: args[0].clone(),
            t1: t.clone(),
            t2: t.clone(),
        },
        4 => AShape::K1 { q: args[1].clone() },
        _ => AShape::S,
    };
    let t2 = eng.a_expand(t, &shape)?;
    let s = LStep {
        dir: Dir::Forward,
        kind: StepKind::A,
        position: root(),
        rule: shape.id(),
        level: 0,
        to: t.clone(),
    };
    Ok((t2.clone(), single(&t2, s).1))
}

/// Reorders `t <->i u ->s t'` into `t ->s v <->i= t'`.
pub fn postpone_i(
    eng: &SEngine,
    t: &LTerm,
    i_step: &LStep,
    s_step: &LStep,
) -> Result<LTrace, EngineError> {
    if i_step.kind != StepKind::I || s_step.kind != StepKind::S || s_step.dir != Dir::Forward {
        return Err(EngineError::Precondition("expected an i-step then an s-step".into()));
    }
    let composite = LTrace {
        start: t.clone(),
        steps: vec![i_step.clone(), s_step.clone()],
    };
    eng.replay(&composite)
        .map_err(|e| EngineError::Precondition(e.to_string()))?;
    let target = &s_step.to;
    let rule = SRule::from_id(s_step.rule).expect("replayed");
    let mut candidates = vec![(s_step.position.clone(), rule)];
    let scan = eng.s_redexes(t);
    candidates.extend(scan.redexes.into_iter().map(|r| (r.position, r.rule)));
    let mut fuel_err = scan
        .unknown
        .first()
        .map(|(p, _)| EngineError::ConditionUnknown { position: p.clone() });
    for (pos, r) in candidates {
        let s = match eng.s_step(t, &pos, r) {
            Ok(s) => s,
            Err(e) => {
                if e.is_fuel() {
                    fuel_err = Some(e);
                }
                continue;
            }
        };
        let v = s.to.clone();
        let mut out = LTrace::empty(t.clone());
        out.push(s);
        if &v == target {
            return Ok(out);
        }
        if let Some(back) = i_link(eng, &v, target)? {
            out.push(back);
            return Ok(out);
        }
    }
    if let Some(e) = fuel_err {
        return Err(e);
    }
    Err(EngineError::Stuck(format!(
        "no s-step of {} followed by at most one i-step reaches {}",
        t, target
    )))
}

/// A single i-step (either direction) from `a` to `b`.
fn i_link(eng: &SEngine, a: &LTerm, b: &LTerm) -> Result<Option<LStep>, EngineError> {
    for (p, r, _) in eng.i_redexes(a).0 {
        let s = eng.i_step(a, &p, r)?;
        if &s.to == b {
            return Ok(Some(s));
        }
    }
    for (p, r, _) in eng.i_redexes(b).0 {
        let s = eng.i_step(b, &p, r)?;
        if &s.to == a {
            return Ok(Some(LStep {
                dir: Dir::Backward,
                to: b.clone(),
                ..s
            }));
        }
    }
    Ok(None)
}

/// Where a subterm at `rel` inside a redex contracted by `rule` ends up,
/// relative to the redex position. `Ok(None)`: erased. `Err(())`: `rel` is
/// not below a variable of the rule.
fn descendant(redex: &LTerm, rule: SRule, rel: &[usize]) -> Result<Option<Vec<usize>>, ()> {
    let strip = |prefix: &[usize]| rel.strip_prefix(prefix).map(|r| r.to_vec());
    match rule {
        SRule::C1T1 | SRule::C2T | SRule::C2T1 | SRule::C2Eq | SRule::K1 => {
            if let Some(r) = strip(&[0, 1]) {
                Ok(Some(r))
            } else if strip(&[1]).is_some() || (rule == SRule::C2Eq && strip(&[0, 0, 1]).is_some())
            {
                Ok(None)
            } else {
                Err(())
            }
        }
        SRule::C1F1 | SRule::C2F | SRule::C2F1 => {
            if let Some(r) = strip(&[1]) {
                Ok(Some(r))
            } else if strip(&[0, 1]).is_some() {
                Ok(None)
            } else {
                Err(())
            }
        }
        SRule::S => {
            let (head, _) = redex.spine();
            let LTerm::Lab(LabConst::S(ns)) = head else {
                return Err(());
            };
            let k = ns.len() - 1;
            let item = |i: usize| if k == 1 { vec![1] } else { vec![1, i] };
            if let Some(r) = strip(&[0, 0, 1]) {
                return Ok(Some([vec![0, 0], r].concat()));
            }
            if k == 1 {
                if let Some(r) = strip(&[0, 1]) {
                    return Ok(Some([item(0), vec![0], r].concat()));
                }
            }
            if let [0, 1, i, r @ ..] = rel {
                if k > 1 && *i < k {
                    return Ok(Some([item(*i), vec![0], r.to_vec()].concat()));
                }
            }
            if let [1, j, r @ ..] = rel {
                let mut j = *j;
                for (g, &n) in ns.iter().enumerate() {
                    let n = n as usize;
                    if j < n {
                        let inner = if n == 1 { vec![] } else { vec![j] };
                        let base = if g == 0 {
                            vec![0, 1]
                        } else {
                            [item(g - 1), vec![1]].concat()
                        };
                        return Ok(Some([base, inner, r.to_vec()].concat()));
                    }
                    j -= n;
                }
            }
            Err(())
        }
    }
}

/// Rewrites an s-reduction to `F1` so that no step lies inside a tuple.
pub fn detuple_reduction(eng: &SEngine, trace: &LTrace) -> Result<LTrace, EngineError> {
    if trace.steps.iter().any(|s| s.kind != StepKind::S || s.dir != Dir::Forward) {
        return Err(EngineError::Precondition("expected an s-reduction".into()));
    }
    eng.replay(trace)
        .map_err(|e| EngineError::Precondition(e.to_string()))?;
    if trace.end() != &LTerm::Lab(LabConst::F1) {
        return Err(EngineError::Precondition(format!("{} is not F1", trace.end())));
    }
    let mut cur = trace.clone();
    // Each pass removes the innermost-last in-tuple step; overlapping
    // redexes can reintroduce one, so passes repeat.
    for _ in 0..=4 * trace.len() + 4 {
        match detuple_pass(eng, &cur)? {
            None => {
                eng.replay(&cur)?;
                return Ok(cur);
            }
            Some(next) => cur = next,
        }
    }
    Err(EngineError::Stuck("tuple removal does not terminate".into()))
}

fn in_tuple_steps(tr: &LTrace) -> Vec<usize> {
    let terms = tr.terms();
    (0..tr.len())
        .filter(|&k| terms[k].inside_tuple(&tr.steps[k].position))
        .collect()
}

/// Moves the last in-tuple step; `None` if there is none.
fn detuple_pass(eng: &SEngine, tr: &LTrace) -> Result<Option<LTrace>, EngineError> {
    let Some(&i) = in_tuple_steps(tr).last() else {
        return Ok(None);
    };
    let terms = tr.terms();
    let step = &tr.steps[i];
    let rule = SRule::from_id(step.rule).expect("s-rule");
    let mut out = LTrace::empty(tr.start.clone());
    for s in &tr.steps[..i] {
        out.push(s.clone());
    }
    let mut cur = terms[i].clone();
    let mut d = Some(step.position.clone());
    let apply = |out: &mut LTrace, cur: &mut LTerm, pos: &Position, r: SRule| {
        let s = eng.s_step(cur, pos, r)?;
        *cur = s.to.clone();
        out.push(s);
        Ok::<(), EngineError>(())
    };
    let mut k = i + 1;
    while k < tr.len() {
        let s = &tr.steps[k];
        let r = SRule::from_id(s.rule).expect("s-rule");
        let Some(dp) = d.clone() else {
            apply(&mut out, &mut cur, &s.position, r)?;
            k += 1;
            continue;
        };
        if s.position.disjoint(&dp) {
            apply(&mut out, &mut cur, &s.position, r)?;
            k += 1;
            continue;
        }
        let below = s.position.is_prefix_of(&dp) && s.position != dp;
        if below {
            let rel = s.position.strip_from(&dp).expect("prefix");
            let redex = cur.subterm_at(&s.position)?.clone();
            if let Ok(nd) = descendant(&redex, r, rel.as_slice()) {
                apply(&mut out, &mut cur, &s.position, r)?;
                d = nd.map(|nd| s.position.join(&Position::from(nd)));
                k += 1;
                continue;
            }
        }
        // The step touches the descendant: contract the postponed redex here.
        apply(&mut out, &mut cur, &dp, rule)?;
        d = None;
        if cur != terms[k] {
            return Err(EngineError::Invariant(format!(
                "hoisted step gives {}, expected {}",
                cur, terms[k]
            )));
        }
    }
    if let Some(dp) = d {
        apply(&mut out, &mut cur, &dp, rule)?;
    }
    if &cur != tr.end() {
        return Err(EngineError::Invariant(format!(
            "rearranged reduction ends at {}, expected {}",
            cur,
            tr.end()
        )));
    }
    Ok(Some(out))
}

/// Erases a tuple-free s-reduction from a term refining its erasure into a
/// CLC reduction.
pub fn erase_reduction(eng: &SEngine, tr: &LTrace) -> Result<Trace, EngineError> {
    let terms = tr.terms();
    let mut out = Trace::empty(leftmost_erase(&tr.start));
    for (k, s) in tr.steps.iter().enumerate() {
        if terms[k].inside_tuple(&s.position) {
            return Err(EngineError::Precondition(format!(
                "step {} lies inside a tuple",
                k
            )));
        }
        let rule = SRule::from_id(s.rule)
            .ok_or_else(|| EngineError::Precondition("not an s-step".into()))?
            .erased_rule();
        let (st, next) = eng
            .oracle()
            .step(SystemId::Clc, out.end(), &s.position, rule)
            .map_err(contract_err)?;
        let expected = leftmost_erase(&s.to);
        if next != expected {
            return Err(EngineError::Invariant(format!(
                "erased step {} gives {}, expected {}",
                k, next, expected
            )));
        }
        out.push(st, next);
    }
    Ok(out)
}

/// Threads a labelled term through a CLC0 conversion starting at `F`,
/// beginning with `F1`. Returns one labelled term per term of the
/// conversion; each refines its term and leads to `F1`.
pub fn lift_from_f1(
    eng: &SEngine,
    conv: &ConversionSequence,
) -> Result<Vec<LTerm>, PipelineError> {
    if conv.start != Term::Const(Const::F) {
        return Err(PipelineError::new(
            "lift",
            EngineError::Precondition(format!("conversion starts at {}", conv.start)),
        ));
    }
    let terms = conv.terms();
    let mut out = vec![LTerm::Lab(LabConst::F1)];
    for (k, s) in conv.steps.iter().enumerate() {
        let stage = format!("step {}", k);
        let t = out.last().expect("nonempty");
        let (next, _) = match s.dir {
            Dir::Forward => simulate_contraction(eng, t, &terms[k], &s.step),
            Dir::Backward => simulate_expansion(eng, t, &terms[k], &terms[k + 1], &s.step),
        }
        .map_err(|e| PipelineError::new(stage.clone(), e))?;
        match eng.leadsto_f1(&next) {
            Ok(true) => {}
            Ok(false) => {
                return Err(PipelineError::new(
                    stage,
                    EngineError::Invariant(format!("{} does not lead to F1", next)),
                ))
            }
            Err(e) => return Err(PipelineError::new(stage, e)),
        }
        out.push(next);
    }
    Ok(out)
}

/// An s-reduction from `t` to `F1`: shortest path in the reduct graph, or
/// outermost reduction when the graph is too large.
pub fn reduction_to_f1(eng: &SEngine, t: &LTerm) -> Result<LTrace, EngineError> {
    let f1 = LTerm::Lab(LabConst::F1);
    let g = eng.s_reducts_all(t);
    if let Some(i) = g.index_of(&f1) {
        return Ok(g.path_to(i));
    }
    if g.is_complete() {
        return Err(EngineError::Invariant(format!("{} does not reduce to F1", t)));
    }
    let mut tr = LTrace::empty(t.clone());
    loop {
        let cur = tr.end().clone();
        if cur == f1 {
            return Ok(tr);
        }
        if tr.len() > cur.label_count() + eng.fuel().max_steps {
            return Err(EngineError::SearchExhausted("outermost s-reduction".into()));
        }
        let scan = eng.s_redexes(&cur);
        let Some(r) = scan.redexes.first() else {
            if let Some((p, _)) = scan.unknown.first() {
                return Err(EngineError::ConditionUnknown { position: p.clone() });
            }
            return Err(EngineError::Invariant(format!("{} is an s-normal form", cur)));
        };
        tr.push(eng.s_step(&cur, &r.position, r.rule)?);
    }
}

/// Turns a CLC0 conversion from `q` to `F` into a CLC reduction `q ->* F`.
pub fn extract_reduction_to_f(
    eng: &SEngine,
    conv: &ConversionSequence,
) -> Result<Trace, PipelineError> {
    let f = Term::Const(Const::F);
    let pre = |m: String| PipelineError::new("precondition", EngineError::Precondition(m));
    if conv.end() != &f {
        return Err(pre(format!("conversion ends at {}", conv.end())));
    }
    if conv.steps.iter().any(|s| s.step.system != SystemId::Clc0) {
        return Err(pre("conversion is not over CLC0".into()));
    }
    eng.oracle()
        .replay_conversion(conv)
        .map_err(|e| pre(e.to_string()))?;
    let lifted = lift_from_f1(eng, &conv.reversed())?;
    let t = lifted.last().expect("nonempty");
    let path = reduction_to_f1(eng, t).map_err(|e| PipelineError::new("extract", e))?;
    let good = detuple_reduction(eng, &path).map_err(|e| PipelineError::new("detuple", e))?;
    let trace = erase_reduction(eng, &good).map_err(|e| PipelineError::new("erase", e))?;
    let replay = |m: String| PipelineError::new("replay", EngineError::Invariant(m));
    if trace.start != conv.start || trace.end() != &f {
        return Err(replay(format!("trace runs from {} to {}", trace.start, trace.end())));
    }
    eng.oracle()
        .replay_trace(&trace)
        .map_err(|e| replay(e.to_string()))?;
    Ok(trace)
}

/// A CLC reduction `z ->* F` for `z =CLC F`.
fn reduce_to_f(eng: &SEngine, z: &Term) -> Result<Trace, PipelineError> {
    let f = Term::Const(Const::F);
    if z == &f {
        return Ok(Trace::empty(f));
    }
    match eng.oracle().eq(SystemId::Clc, z, &f) {
        EqVerdict::Yes(EqWitness::Identical(_)) => Ok(Trace::empty(f)),
        EqVerdict::Yes(EqWitness::Join(j)) if j.common == f => Ok(j.left),
        EqVerdict::Yes(EqWitness::Conversion(c)) => extract_reduction_to_f(eng, &c),
        EqVerdict::Yes(EqWitness::Join(j)) => {
            let c = j.left.to_conversion();
            let mut c2 = c.clone();
            c2.extend(j.right.to_conversion().reversed());
            Err(PipelineError::new(
                "condition",
                EngineError::Invariant(format!("{} joins F at {}", z, c2.end())),
            ))
        }
        EqVerdict::No(_) => Err(PipelineError::new(
            "condition",
            EngineError::Invariant(format!("{} is not CLC-equal to F", z)),
        )),
        EqVerdict::Unknown => Err(PipelineError::new(
            "condition",
            EngineError::ConditionUnknown { position: root() },
        )),
    }
}

/// Maps an R-reduction onto a CLC reduction between the same terms.
pub fn r_to_clc(eng: &SEngine, tr: &Trace) -> Result<Trace, PipelineError> {
    let mut out = Trace::empty(tr.start.clone());
    for (k, s) in tr.steps.iter().enumerate() {
        let stage = format!("R step {}", k);
        let wrap = |e: ContractError| PipelineError::new(stage.clone(), contract_err(e));
        let pos = &s.step.position;
        if s.step.rule == 2 {
            let zp = pos.join(&Position::from_slice(&[0, 0, 1]));
            let z = out.end().subterm_at(&zp).map_err(|e| PipelineError::new(stage.clone(), e.into()))?.clone();
            let prefix = reduce_to_f(eng, &z)?
                .lift(out.end(), &zp)
                .map_err(|e| PipelineError::new(stage.clone(), e.into()))?;
            out.extend(prefix);
        }
        let (st, next) = eng
            .oracle()
            .step(SystemId::Clc, out.end(), pos, s.step.rule)
            .map_err(wrap)?;
        if next != s.to {
            return Err(PipelineError::new(
                stage,
                EngineError::Invariant(format!("CLC step gives {}, R gives {}", next, s.to)),
            ));
        }
        out.push(st, next);
    }
    Ok(out)
}

/// A common CLC reduct of two CLC0-convertible terms, found by joining in R
/// and translating the R-reductions.
pub fn join_in_clc(
    eng: &SEngine,
    q1: &Term,
    q2: &Term,
    conv: &ConversionSequence,
) -> Result<(Term, Trace, Trace), PipelineError> {
    let pre = |m: String| PipelineError::new("precondition", EngineError::Precondition(m));
    if &conv.start != q1 || conv.end() != q2 {
        return Err(pre("conversion endpoints".into()));
    }
    eng.oracle()
        .replay_conversion(conv)
        .map_err(|e| pre(e.to_string()))?;
    let j = eng.oracle().joinable(SystemId::R, q1, q2).ok_or_else(|| {
        PipelineError::new(
            "join",
            EngineError::SearchExhausted(format!("no R-join of {} and {}", q1, q2)),
        )
    })?;
    let left = r_to_clc(eng, &j.left)?;
    let right = r_to_clc(eng, &j.right)?;
    for tr in [&left, &right] {
        eng.oracle().replay_trace(tr).map_err(|e| {
            PipelineError::new("replay", EngineError::Invariant(e.to_string()))
        })?;
    }
    Ok((j.common, left, right))
}

/// Two distinct CLC0-normal forms connected by CLC0 steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NfViolation {
    pub left: Term,
    pub right: Term,
    pub conversion: ConversionSequence,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UnReport {
    pub size_bound: usize,
    pub terms: usize,
    /// Enumerated terms plus their one-step reducts.
    pub nodes: usize,
    pub normal_forms: usize,
    /// Terms with both a CLC-redex and a CLC0-redex.
    pub transfer_checked: usize,
    #[serde(skip)]
    pub nf_violations: Vec<NfViolation>,
    pub redex_transfer_violations: Vec<Term>,
    /// Terms whose CLC redex scan left a condition undecided.
    pub unknown: usize,
}

impl UnReport {
    pub fn violations(&self) -> usize {
        self.nf_violations.len() + self.redex_transfer_violations.len()
    }
}

/// The default alphabet for [`check_un_property`]: the five constants and
/// one variable.
pub fn un_alphabet() -> Vec<Term> {
    Const::ALL
        .iter()
        .map(|&c| Term::Const(c))
        .chain([Term::var("x")])
        .collect()
}

struct UnLocal {
    steps: Vec<(Step, Term)>,
    clc_redex: bool,
    unknown: bool,
}

/// Checks uniqueness of CLC0-normal forms and the redex-transfer claim over
/// all terms of at most `size_bound` leaves.
pub fn check_un_property(size_bound: usize, alphabet: &[Term], fuel: &Fuel) -> UnReport {
    let terms: Vec<Term> = enumerate_terms(size_bound, alphabet).collect();
    let locals: Vec<UnLocal> = terms
        .par_iter()
        .map_init(
            || Oracle::new(fuel.clone()),
            |o, t| {
                let steps = clc0_steps(o, t);
                let scan = o.redexes(SystemId::Clc, t);
                UnLocal {
                    steps,
                    clc_redex: !scan.redexes.is_empty(),
                    unknown: !scan.unknown.is_empty(),
                }
            },
        )
        .collect();

    let mut report = UnReport {
        size_bound,
        terms: terms.len(),
        ..UnReport::default()
    };
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut nodes: Vec<Term> = Vec::new();
    let mut intern = |t: &Term, nodes: &mut Vec<Term>| -> usize {
        *index.entry(t.clone()).or_insert_with(|| {
            nodes.push(t.clone());
            nodes.len() - 1
        })
    };
    let mut edges: Vec<(usize, usize, Step)> = Vec::new();
    for (t, l) in terms.iter().zip(&locals) {
        let a = intern(t, &mut nodes);
        for (s, to) in &l.steps {
            let b = intern(to, &mut nodes);
            edges.push((a, b, s.clone()));
        }
        if l.unknown {
            report.unknown += 1;
        }
        if l.clc_redex {
            if l.steps.is_empty() {
                report.redex_transfer_violations.push(t.clone());
            } else {
                report.transfer_checked += 1;
            }
        }
    }
    report.nodes = nodes.len();

    let mut uf = UnionFind::new(nodes.len());
    for (a, b, _) in &edges {
        uf.union(*a, *b);
    }
    let oracle = Oracle::new(fuel.clone());
    let mut nf_by_class: HashMap<usize, usize> = HashMap::new();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (e, (a, b, _)) in edges.iter().enumerate() {
        adjacency[*a].push(e);
        adjacency[*b].push(e);
    }
    for (i, n) in nodes.iter().enumerate() {
        let is_nf = if i < terms.len() && index.get(&terms[i]) == Some(&i) {
            locals[i].steps.is_empty()
        } else {
            oracle.redexes(SystemId::Clc0, n).redexes.is_empty()
        };
        if !is_nf {
            continue;
        }
        report.normal_forms += 1;
        let class = uf.find(i);
        match nf_by_class.get(&class) {
            None => {
                nf_by_class.insert(class, i);
            }
            Some(&j) => report.nf_violations.push(NfViolation {
                left: nodes[j].clone(),
                right: n.clone(),
                conversion: connect(&nodes, &edges, &adjacency, j, i),
            }),
        }
    }
    report
}

fn clc0_steps(o: &Oracle, t: &Term) -> Vec<(Step, Term)> {
    o.redexes(SystemId::Clc0, t)
        .redexes
        .into_iter()
        .filter_map(|r| o.step(SystemId::Clc0, t, &r.position, r.rule).ok())
        .collect()
}

/// Breadth-first path between two nodes of the step graph.
fn connect(
    nodes: &[Term],
    edges: &[(usize, usize, Step)],
    adjacency: &[Vec<usize>],
    from: usize,
    to: usize,
) -> ConversionSequence {
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    prev.insert(from, usize::MAX);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &e in &adjacency[u] {
            let (a, b, _) = &edges[e];
            let v = if *a == u { *b } else { *a };
            if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(v) {
                slot.insert(e);
                queue.push_back(v);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        let e = prev[&cur];
        path.push(e);
        let (a, b, _) = &edges[e];
        cur = if *a == cur { *b } else { *a };
    }
    let mut conv = ConversionSequence::empty(nodes[from].clone());
    let mut cur = from;
    for e in path.into_iter().rev() {
        let (a, b, s) = &edges[e];
        if *a == cur {
            conv.push(Dir::Forward, s.clone(), nodes[*b].clone());
            cur = *b;
        } else {
            conv.push(Dir::Backward, s.clone(), nodes[*a].clone());
            cur = *a;
        }
    }
    conv
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> LTerm {
        LTerm::parse(s).unwrap()
    }

    fn q(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    fn eng() -> SEngine {
        SEngine::new(Fuel::default())
    }

    fn clc0(rule: u8, pos: &[usize]) -> Step {
        Step::new(SystemId::Clc0, rule, Position::from_slice(pos), 0)
    }

    #[test]
    fn contraction_examples() {
        let e = eng();
        let (t2, tr) = simulate_contraction(&e, &l("C2 F b F1"), &q("C F b F"), &clc0(2, &[])).unwrap();
        assert_eq!(t2, l("F1"));
        assert_eq!((tr.len(), tr.steps[0].kind, tr.steps[0].rule), (1, StepKind::S, 5));

        let (t2, _) =
            simulate_contraction(&e, &l("S^{1,1} K1 K <F1,F>"), &q("S K K F"), &clc0(5, &[])).unwrap();
        assert_eq!(t2, l("K1 F1 (K F)"));

        let (t2, tr) = simulate_contraction(&e, &l("K a b"), &q("K a b"), &clc0(4, &[])).unwrap();
        assert_eq!(t2, l("a"));
        assert_eq!(tr.steps[0].kind, StepKind::I);
    }

    #[test]
    fn contraction_reduces_c1_condition() {
        let e = eng();
        let t = l("C1 (C1 T1 T1 z) F1 F1");
        let (t2, tr) = simulate_contraction(&e, &t, &q("C (C T T z) F F"), &clc0(3, &[])).unwrap();
        assert_eq!(t2, l("F1"));
        assert_eq!(tr.len(), 2);
    }

    #[test]
    fn contraction_in_tuples() {
        let e = eng();
        let t = l("S^{1,1} K1 K <K1 F1 b, K F b>");
        let (t2, tr) =
            simulate_contraction(&e, &t, &q("S K K (K F b)"), &clc0(4, &[1])).unwrap();
        assert_eq!(t2, l("S^{1,1} K1 K <F1, F>"));
        assert_eq!(tr.len(), 2);
    }

    #[test]
    fn expansion_examples() {
        let e = eng();
        let f1 = l("F1");
        let f = q("F");
        let (t2, _) = simulate_expansion(&e, &f1, &f, &q("C T F w"), &clc0(1, &[])).unwrap();
        assert_eq!(t2, l("C1 T1 F1 w"));
        let (t2, _) = simulate_expansion(&e, &f1, &f, &q("C z F F"), &clc0(3, &[])).unwrap();
        assert_eq!(t2, l("C2 z F1 F1"));
        let t = l("a c (b c)");
        let (t2, tr) = simulate_expansion(&e, &t, &q("a c (b c)"), &q("S a b c"), &clc0(5, &[])).unwrap();
        assert_eq!(t2, l("S a b c"));
        assert_eq!(tr.steps[0].kind, StepKind::I);
        let t = l("K1 F1 (b F)");
        let (t2, _) = simulate_expansion(&e, &t, &q("K F (b F)"), &q("S K b F"), &clc0(5, &[])).unwrap();
        assert_eq!(t2, l("S^{1,1} K1 b <F1,F>"));
        assert!(e.a_redex_check(&t2, &t).unwrap());
    }

    #[test]
    fn postpone_examples() {
        let e = eng();
        let t = l("K1 a (K b c)");
        let i = e.i_step(&t, &Position::from_slice(&[1]), 4).unwrap();
        let s = e.s_step(&i.to, &root(), SRule::K1).unwrap();
        let out = postpone_i(&e, &t, &i, &s).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.end(), &l("a"));

        let t = l("C1 T1 (K a b) q");
        let i = e.i_step(&t, &Position::from_slice(&[0, 1]), 4).unwrap();
        let s = e.s_step(&i.to, &root(), SRule::C1T1).unwrap();
        let out = postpone_i(&e, &t, &i, &s).unwrap();
        assert_eq!(out.terms(), vec![t.clone(), l("K a b"), l("a")]);
        assert_eq!(out.steps[1].kind, StepKind::I);
    }

    #[test]
    fn postpone_fails_when_the_i_step_builds_the_pattern_constant() {
        let e = eng();
        let t = l("C2 (K F a) T F");
        let i = e.i_step(&t, &Position::from_slice(&[0, 0, 1]), 4).unwrap();
        let s = e.s_step(&i.to, &root(), SRule::C2F).unwrap();
        assert_eq!(s.to, l("F"));
        assert!(matches!(postpone_i(&e, &t, &i, &s), Err(EngineError::Stuck(_))));
    }

    #[test]
    fn detuple_moves_steps_out_of_tuples() {
        let e = eng();
        let t = l("S^{1,1} K1 K <C1 T1 F1 w, C1 T1 F1 w>");
        let f1 = LTerm::Lab(LabConst::F1);
        let mut tr = LTrace::empty(t.clone());
        tr.push(e.s_step(&t, &Position::from_slice(&[1, 0]), SRule::C1T1).unwrap());
        for (pos, r) in [(vec![], SRule::S), (vec![], SRule::K1)] {
            let s = e.s_step(tr.end(), &Position::from(pos), r).unwrap();
            tr.push(s);
        }
        assert_eq!(tr.end(), &f1);
        let out = detuple_reduction(&e, &tr).unwrap();
        assert!(in_tuple_steps(&out).is_empty());
        assert_eq!(out.end(), &f1);
        assert_eq!(out.len(), 3);
        let out = detuple_reduction(&e, &reduction_to_f1(&e, &t).unwrap()).unwrap();
        assert!(in_tuple_steps(&out).is_empty());
    }

    #[test]
    fn detuple_drops_erased_work() {
        let e = eng();
        let t = l("S^{1,1} K1 K <F1, K1 F1 w>");
        let mut tr = LTrace::empty(t.clone());
        tr.push(e.s_step(&t, &Position::from_slice(&[1, 1]), SRule::K1).unwrap());
        tr.push(e.s_step(tr.end(), &root(), SRule::S).unwrap());
        tr.push(e.s_step(tr.end(), &root(), SRule::K1).unwrap());
        let out = detuple_reduction(&e, &tr).unwrap();
        assert!(in_tuple_steps(&out).is_empty());
        assert_eq!(out.len(), 2);
    }

    fn conv(start: &str, steps: &[(Dir, u8, &[usize], &str)]) -> ConversionSequence {
        let mut c = ConversionSequence::empty(q(start));
        for (d, r, p, to) in steps {
            c.push(*d, clc0(*r, p), q(to));
        }
        c
    }

    #[test]
    fn extraction_examples() {
        let e = eng();
        let c = conv("K F T", &[(Dir::Forward, 4, &[], "F")]);
        let tr = extract_reduction_to_f(&e, &c).unwrap();
        assert_eq!(tr.len(), 1);
        let c = conv("C x F F", &[(Dir::Forward, 3, &[], "F")]);
        let tr = extract_reduction_to_f(&e, &c).unwrap();
        assert_eq!((tr.len(), tr.steps[0].step.rule), (1, 3));
        let c = conv(
            "C z (K F T) F",
            &[(Dir::Forward, 4, &[0, 1], "C z F F"), (Dir::Forward, 3, &[], "F")],
        );
        let tr = extract_reduction_to_f(&e, &c).unwrap();
        assert!(tr.len() <= 3);
        assert_eq!(tr.end(), &q("F"));
    }

    #[test]
    fn join_examples() {
        let e = eng();
        let c = conv("K a b", &[(Dir::Forward, 4, &[], "a")]);
        assert_eq!(join_in_clc(&e, &q("K a b"), &q("a"), &c).unwrap().0, q("a"));
        let c = conv(
            "C (K F T) a b",
            &[(Dir::Forward, 4, &[0, 0, 1], "C F a b"), (Dir::Forward, 2, &[], "b")],
        );
        let (common, left, right) = join_in_clc(&e, &q("C (K F T) a b"), &q("b"), &c).unwrap();
        assert_eq!(common, q("b"));
        assert!(right.is_empty());
        assert_eq!(left.end(), &q("b"));
        let c = ConversionSequence::empty(q("S a"));
        let (common, left, right) = join_in_clc(&e, &q("S a"), &q("S a"), &c).unwrap();
        assert_eq!((common, left.len(), right.len()), (q("S a"), 0, 0));
    }

    #[test]
    fn un_small() {
        let r = check_un_property(3, &un_alphabet(), &Fuel::new(500, 30, 4));
        assert_eq!(r.violations(), 0);
        assert!(r.normal_forms > 0);
    }
}
