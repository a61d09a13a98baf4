//! Redex search, contraction, normalization and the bounded equality oracle.
//!
//! A conditional step at level `n + 1` has its condition established by a
//! witness of level `n`. Level 0 admits only unconditional steps, so a
//! condition met at level 0 is reported as undecided rather than false.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};

use super::rules::{EqualityOf, Rule, SystemId};
use super::trace::{ConversionSequence, Dir, Step, Trace};
use super::Fuel;
use crate::term::{match_pattern, Const, Position, Substitution, Term, TermError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub position: Position,
    pub rule: u8,
    /// Level of the contraction: 0 for unconditional rules.
    pub level: u32,
}

/// Result of a full redex scan. Positions whose condition could not be
/// decided are listed separately and are not redexes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RedexScan {
    pub redexes: Vec<Redex>,
    pub unknown: Vec<(Position, u8)>,
}

/// Two reductions ending in the same term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Join {
    pub common: Term,
    pub left: Trace,
    pub right: Trace,
}

impl Join {
    pub fn level(&self) -> u32 {
        self.left.level().max(self.right.level())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqWitness {
    Identical(Term),
    Join(Join),
    /// A CLC0 conversion.
    Conversion(ConversionSequence),
}

impl EqWitness {
    /// Level of the witness read as a conversion in `sys`.
    pub fn level(&self, sys: SystemId) -> u32 {
        match self {
            EqWitness::Identical(_) => 0,
            EqWitness::Join(j) => j.level(),
            EqWitness::Conversion(c) => {
                let uses_rule3 = c.steps.iter().any(|s| s.step.rule == 3);
                if sys != SystemId::Clc0 && uses_rule3 {
                    1
                } else {
                    0
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoReason {
    /// Both sides have complete normal forms and these differ. Sound only
    /// given unique normal forms for the system.
    DistinctNormalForms { left: Term, right: Term },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqVerdict {
    Yes(EqWitness),
    No(NoReason),
    Unknown,
}

impl EqVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, EqVerdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, EqVerdict::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, EqVerdict::Unknown)
    }

    pub fn label(&self) -> &'static str {
        match self {
            EqVerdict::Yes(_) => "yes",
            EqVerdict::No(_) => "no",
            EqVerdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub term: Term,
    pub trace: Trace,
    /// The result has no redex and no condition was undecided in the final scan.
    pub complete: bool,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ContractError {
    #[error("{system} has no rule {rule}")]
    NoSuchRule { system: SystemId, rule: u8 },
    #[error("rule {rule} of {system} does not apply at {position}")]
    NotARedex {
        system: SystemId,
        rule: u8,
        position: Position,
    },
    #[error("condition of rule {rule} at {position} is undecided")]
    ConditionUnknown { rule: u8, position: Position },
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {index}: {source}")]
    Step { index: usize, source: ContractError },
    #[error("step {index}: contraction gives {got}, trace says {expected}")]
    Mismatch {
        index: usize,
        expected: Term,
        got: Term,
    },
    #[error("trace ends at {got}, expected {expected}")]
    End { expected: Term, got: Term },
}

enum Cond {
    Holds(u32),
    Fails,
    Unknown,
}

type Key = (SystemId, Term, Term, u32, bool);

/// Memoizing evaluator for one fuel setting. Not shareable across threads;
/// give each worker its own.
pub struct Oracle {
    fuel: Fuel,
    eq_cache: RefCell<HashMap<Key, EqVerdict>>,
    nf_cache: RefCell<HashMap<(SystemId, Term, u32), Normalized>>,
}

impl Oracle {
    pub fn new(fuel: Fuel) -> Oracle {
        Oracle {
            fuel,
            eq_cache: RefCell::new(HashMap::new()),
            nf_cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn fuel(&self) -> &Fuel {
        &self.fuel
    }

    pub fn clear(&self) {
        self.eq_cache.borrow_mut().clear();
        self.nf_cache.borrow_mut().clear();
    }

    fn nested_budget(&self) -> usize {
        (self.fuel.max_steps / 20).max(50)
    }

    fn eval_condition(&self, sys: SystemId, rule: &Rule, sigma: &Substitution, level: u32) -> Cond {
        if rule.condition.is_empty() {
            return Cond::Holds(0);
        }
        if level == 0 {
            return Cond::Unknown;
        }
        let mut witness = 0;
        let mut unknown = false;
        for atom in &rule.condition {
            let a = sigma.apply(&atom.left);
            let b = sigma.apply(&atom.right);
            let target = match atom.equality {
                EqualityOf::Own => sys,
                EqualityOf::Clc => SystemId::Clc,
            };
            match (self.eq_at(target, &a, &b, level - 1, false), atom.negated) {
                (EqVerdict::Yes(w), false) => witness = witness.max(w.level(target)),
                (EqVerdict::No(_), true) => {}
                (EqVerdict::Yes(_), true) | (EqVerdict::No(_), false) => return Cond::Fails,
                (EqVerdict::Unknown, _) => unknown = true,
            }
        }
        if unknown {
            Cond::Unknown
        } else {
            Cond::Holds(witness + 1)
        }
    }

    /// Tries `rule` on `sub`; `Ok(Some)` carries the contractum and step level.
    fn try_rule(
        &self,
        sys: SystemId,
        rule: &Rule,
        sub: &Term,
        level: u32,
    ) -> Result<Option<(Term, u32)>, ()> {
        let Some(sigma) = match_pattern(&rule.lhs, sub) else {
            return Ok(None);
        };
        match self.eval_condition(sys, rule, &sigma, level) {
            Cond::Holds(l) => Ok(Some((sigma.apply(&rule.rhs), l))),
            Cond::Fails => Ok(None),
            Cond::Unknown => Err(()),
        }
    }

    /// All redexes of `t` for contraction levels up to `level`.
    pub fn scan(&self, sys: SystemId, t: &Term, level: u32) -> RedexScan {
        let mut out = RedexScan::default();
        for (pos, sub) in t.subterms() {
            if !matches!(sub, Term::App(..)) {
                continue;
            }
            for rule in sys.rules() {
                match self.try_rule(sys, rule, sub, level) {
                    Ok(Some((_, l))) => out.redexes.push(Redex {
                        position: pos.clone(),
                        rule: rule.id,
                        level: l,
                    }),
                    Ok(None) => {}
                    Err(()) => out.unknown.push((pos.clone(), rule.id)),
                }
            }
        }
        out
    }

    pub fn redexes(&self, sys: SystemId, t: &Term) -> RedexScan {
        self.scan(sys, t, self.fuel.max_level)
    }

    /// Leftmost-outermost redex, smaller rule id first; the flag reports
    /// whether an undecided condition was passed over.
    fn first_redex(&self, sys: SystemId, t: &Term, level: u32) -> (Option<(Redex, Term)>, bool) {
        let mut unknown = false;
        for (pos, sub) in t.subterms() {
            if !matches!(sub, Term::App(..)) {
                continue;
            }
            for rule in sys.rules() {
                match self.try_rule(sys, rule, sub, level) {
                    Ok(Some((rhs, l))) => {
                        let next = t.replace_at(&pos, rhs).expect("position from subterms");
                        let r = Redex {
                            position: pos,
                            rule: rule.id,
                            level: l,
                        };
                        return (Some((r, next)), unknown);
                    }
                    Ok(None) => {}
                    Err(()) => unknown = true,
                }
            }
        }
        (None, unknown)
    }

    /// Contracts with contraction level at most `level`; returns the result
    /// and the level of the step.
    pub fn contract_at(
        &self,
        sys: SystemId,
        t: &Term,
        pos: &Position,
        rule_id: u8,
        level: u32,
    ) -> Result<(Term, u32), ContractError> {
        let rule = sys.rule(rule_id).ok_or(ContractError::NoSuchRule {
            system: sys,
            rule: rule_id,
        })?;
        let sub = t.subterm_at(pos)?;
        match self.try_rule(sys, rule, sub, level) {
            Ok(Some((rhs, l))) => Ok((t.replace_at(pos, rhs)?, l)),
            Ok(None) => Err(ContractError::NotARedex {
                system: sys,
                rule: rule_id,
                position: pos.clone(),
            }),
            Err(()) => Err(ContractError::ConditionUnknown {
                rule: rule_id,
                position: pos.clone(),
            }),
        }
    }

    pub fn contract(
        &self,
        sys: SystemId,
        t: &Term,
        pos: &Position,
        rule_id: u8,
    ) -> Result<Term, ContractError> {
        self.contract_at(sys, t, pos, rule_id, self.fuel.max_level)
            .map(|(t, _)| t)
    }

    /// Contracts and packages the step.
    pub fn step(
        &self,
        sys: SystemId,
        t: &Term,
        pos: &Position,
        rule_id: u8,
    ) -> Result<(Step, Term), ContractError> {
        let (next, level) = self.contract_at(sys, t, pos, rule_id, self.fuel.max_level)?;
        Ok((Step::new(sys, rule_id, pos.clone(), level), next))
    }

    pub fn normalize(&self, sys: SystemId, t: &Term) -> Normalized {
        self.normalize_at(sys, t, self.fuel.max_level)
    }

    /// Leftmost-outermost normalization using contractions of level at most `level`.
    pub fn normalize_at(&self, sys: SystemId, t: &Term, level: u32) -> Normalized {
        let key = (sys, t.clone(), level);
        if let Some(n) = self.nf_cache.borrow().get(&key) {
            return n.clone();
        }
        let mut trace = Trace::empty(t.clone());
        let mut cur = t.clone();
        let mut complete = false;
        loop {
            if cur.size() > self.fuel.max_term_size {
                break;
            }
            let (found, unknown) = self.first_redex(sys, &cur, level);
            match found {
                None => {
                    complete = !unknown;
                    break;
                }
                Some(_) if trace.len() >= self.fuel.max_steps => break,
                Some((r, next)) => {
                    trace.push(Step::new(sys, r.rule, r.position, r.level), next.clone());
                    cur = next;
                }
            }
        }
        let n = Normalized {
            term: cur,
            trace,
            complete,
        };
        self.nf_cache.borrow_mut().insert(key, n.clone());
        n
    }

    /// Equality in `sys`, trying every level up to the fuel bound, then a
    /// CLC0 conversion search.
    pub fn eq(&self, sys: SystemId, a: &Term, b: &Term) -> EqVerdict {
        match self.eq_at(sys, a, b, self.fuel.max_level, true) {
            EqVerdict::Unknown => match self.conversion_search_clc0(a, b) {
                Some(c) => EqVerdict::Yes(EqWitness::Conversion(c)),
                None => EqVerdict::Unknown,
            },
            v => v,
        }
    }

    /// Equality established with witnesses of level at most `level`.
    /// `top` selects the full search budget; condition evaluation uses a
    /// smaller one.
    pub fn eq_at(&self, sys: SystemId, a: &Term, b: &Term, level: u32, top: bool) -> EqVerdict {
        if a == b {
            return EqVerdict::Yes(EqWitness::Identical(a.clone()));
        }
        let key = (sys, a.clone(), b.clone(), level, top);
        if let Some(v) = self.eq_cache.borrow().get(&key) {
            return v.clone();
        }
        let mut verdict = EqVerdict::Unknown;
        for l in 0..=level {
            verdict = self.eq_exact(sys, a, b, l, top);
            if !verdict.is_unknown() {
                break;
            }
        }
        self.eq_cache.borrow_mut().insert(key, verdict.clone());
        verdict
    }

    fn eq_exact(&self, sys: SystemId, a: &Term, b: &Term, level: u32, top: bool) -> EqVerdict {
        let na = self.normalize_at(sys, a, level);
        let nb = self.normalize_at(sys, b, level);
        if na.term == nb.term {
            return EqVerdict::Yes(EqWitness::Join(Join {
                common: na.term.clone(),
                left: na.trace,
                right: nb.trace,
            }));
        }
        if na.complete && nb.complete {
            return EqVerdict::No(NoReason::DistinctNormalForms {
                left: na.term,
                right: nb.term,
            });
        }
        let budget = if top {
            self.fuel.max_steps
        } else {
            self.nested_budget()
        };
        match self.join_search(sys, a, b, level, budget) {
            Some(j) => EqVerdict::Yes(EqWitness::Join(j)),
            None => EqVerdict::Unknown,
        }
    }

    pub fn joinable(&self, sys: SystemId, a: &Term, b: &Term) -> Option<Join> {
        if a == b {
            return Some(Join {
                common: a.clone(),
                left: Trace::empty(a.clone()),
                right: Trace::empty(b.clone()),
            });
        }
        let na = self.normalize(sys, a);
        let nb = self.normalize(sys, b);
        if na.term == nb.term {
            return Some(Join {
                common: na.term,
                left: na.trace,
                right: nb.trace,
            });
        }
        self.join_search(sys, a, b, self.fuel.max_level, self.fuel.max_steps)
    }

    /// Breadth-first search from both ends for a common reduct.
    fn join_search(
        &self,
        sys: SystemId,
        a: &Term,
        b: &Term,
        level: u32,
        budget: usize,
    ) -> Option<Join> {
        type Parents = HashMap<Term, Option<(Term, Step)>>;
        let mut pa: Parents = HashMap::new();
        let mut pb: Parents = HashMap::new();
        pa.insert(a.clone(), None);
        pb.insert(b.clone(), None);
        let mut qa = VecDeque::from([a.clone()]);
        let mut qb = VecDeque::from([b.clone()]);
        if a == b {
            return Some(self.build_join(a, &pa, &pb));
        }
        let mut turn = false;
        while pa.len() + pb.len() < budget && !(qa.is_empty() && qb.is_empty()) {
            turn = !turn;
            let (queue, mine, other) = if (turn && !qa.is_empty()) || qb.is_empty() {
                (&mut qa, &mut pa, &pb)
            } else {
                (&mut qb, &mut pb, &pa)
            };
            let Some(u) = queue.pop_front() else { continue };
            for r in self.scan(sys, &u, level).redexes {
                let Ok((v, l)) = self.contract_at(sys, &u, &r.position, r.rule, level) else {
                    continue;
                };
                if v.size() > self.fuel.max_term_size || mine.contains_key(&v) {
                    continue;
                }
                mine.insert(v.clone(), Some((u.clone(), Step::new(sys, r.rule, r.position, l))));
                if other.contains_key(&v) {
                    return Some(self.build_join(&v, &pa, &pb));
                }
                queue.push_back(v);
            }
        }
        None
    }

    fn build_join(
        &self,
        meet: &Term,
        pa: &HashMap<Term, Option<(Term, Step)>>,
        pb: &HashMap<Term, Option<(Term, Step)>>,
    ) -> Join {
        fn path(meet: &Term, parents: &HashMap<Term, Option<(Term, Step)>>) -> Trace {
            let mut rev = Vec::new();
            let mut cur = meet.clone();
            while let Some(Some((prev, step))) = parents.get(&cur) {
                rev.push((step.clone(), cur.clone()));
                cur = prev.clone();
            }
            let mut t = Trace::empty(cur);
            for (s, to) in rev.into_iter().rev() {
                t.push(s, to);
            }
            t
        }
        Join {
            common: meet.clone(),
            left: path(meet, pa),
            right: path(meet, pb),
        }
    }

    /// One-step CLC0 neighbours of `u` in both directions. Expansion
    /// arguments are drawn from `pool`.
    fn clc0_neighbours(&self, u: &Term, pool: &[Term]) -> Vec<(Term, Dir, Step)> {
        let mut out = Vec::new();
        for r in self.scan(SystemId::Clc0, u, 0).redexes {
            if let Ok((v, _)) = self.contract_at(SystemId::Clc0, u, &r.position, r.rule, 0) {
                out.push((v, Dir::Forward, Step::new(SystemId::Clc0, r.rule, r.position, 0)));
            }
        }
        let c = |k: Const| Term::Const(k);
        for (pos, s) in u.subterms() {
            let mut push = |rule: u8, redex: Term| {
                let v = u.replace_at(&pos, redex).expect("position from subterms");
                out.push((v, Dir::Backward, Step::new(SystemId::Clc0, rule, pos.clone(), 0)));
            };
            for y in pool {
                push(1, Term::apply(c(Const::C), [c(Const::T), s.clone(), y.clone()]));
                push(2, Term::apply(c(Const::C), [c(Const::F), y.clone(), s.clone()]));
                push(3, Term::apply(c(Const::C), [y.clone(), s.clone(), s.clone()]));
                push(4, Term::apply(c(Const::K), [s.clone(), y.clone()]));
            }
            if let Term::App(l, r) = s {
                if let (Term::App(x, z), Term::App(y, z2)) = (&**l, &**r) {
                    if z == z2 {
                        push(
                            5,
                            Term::apply(c(Const::S), [(**x).clone(), (**y).clone(), (**z).clone()]),
                        );
                    }
                }
            }
        }
        out
    }

    /// Bidirectional breadth-first search over CLC0 contractions and
    /// expansions. Expansions only introduce leaves already present in
    /// `a` or `b`.
    pub fn conversion_search_clc0(&self, a: &Term, b: &Term) -> Option<ConversionSequence> {
        if a == b {
            return Some(ConversionSequence::empty(a.clone()));
        }
        let mut pool: Vec<Term> = Vec::new();
        for t in [a, b] {
            for (_, s) in t.subterms() {
                if !matches!(s, Term::App(..)) && !pool.contains(s) {
                    pool.push(s.clone());
                }
            }
        }
        pool.sort();
        type Parents = HashMap<Term, Option<(Term, Dir, Step)>>;
        let mut pa: Parents = HashMap::new();
        let mut pb: Parents = HashMap::new();
        pa.insert(a.clone(), None);
        pb.insert(b.clone(), None);
        let mut qa = VecDeque::from([a.clone()]);
        let mut qb = VecDeque::from([b.clone()]);
        let mut turn = false;
        while pa.len() + pb.len() < self.fuel.max_steps && !(qa.is_empty() && qb.is_empty()) {
            turn = !turn;
            let from_a = (turn && !qa.is_empty()) || qb.is_empty();
            let (queue, mine, other) = if from_a {
                (&mut qa, &mut pa, &pb)
            } else {
                (&mut qb, &mut pb, &pa)
            };
            let Some(u) = queue.pop_front() else { continue };
            for (v, dir, step) in self.clc0_neighbours(&u, &pool) {
                if v.size() > self.fuel.max_term_size || mine.contains_key(&v) {
                    continue;
                }
                mine.insert(v.clone(), Some((u.clone(), dir, step)));
                if other.contains_key(&v) {
                    return Some(build_conversion(&v, &pa, &pb));
                }
                queue.push_back(v);
            }
        }
        None
    }

    pub fn replay_trace(&self, trace: &Trace) -> Result<(), ReplayError> {
        let mut cur = trace.start.clone();
        for (index, s) in trace.steps.iter().enumerate() {
            let (got, _) = self
                .contract_at(s.step.system, &cur, &s.step.position, s.step.rule, s.step.level)
                .map_err(|source| ReplayError::Step { index, source })?;
            if got != s.to {
                return Err(ReplayError::Mismatch {
                    index,
                    expected: s.to.clone(),
                    got,
                });
            }
            cur = got;
        }
        Ok(())
    }

    pub fn replay_conversion(&self, conv: &ConversionSequence) -> Result<(), ReplayError> {
        let mut cur = conv.start.clone();
        for (index, s) in conv.steps.iter().enumerate() {
            let (from, expected) = match s.dir {
                Dir::Forward => (&cur, &s.to),
                Dir::Backward => (&s.to, &cur),
            };
            let (got, _) = self
                .contract_at(s.step.system, from, &s.step.position, s.step.rule, s.step.level)
                .map_err(|source| ReplayError::Step { index, source })?;
            if &got != expected {
                return Err(ReplayError::Mismatch {
                    index,
                    expected: expected.clone(),
                    got,
                });
            }
            cur = s.to.clone();
        }
        Ok(())
    }

    /// Replays a join: both traces replay and end at the common term.
    pub fn replay_join(&self, a: &Term, b: &Term, j: &Join) -> Result<(), ReplayError> {
        for (start, t) in [(a, &j.left), (b, &j.right)] {
            if &t.start != start {
                return Err(ReplayError::End {
                    expected: start.clone(),
                    got: t.start.clone(),
                });
            }
            self.replay_trace(t)?;
            if t.end() != &j.common {
                return Err(ReplayError::End {
                    expected: j.common.clone(),
                    got: t.end().clone(),
                });
            }
        }
        Ok(())
    }

    /// Checks that a Yes witness really connects `a` and `b`.
    pub fn replay_witness(&self, a: &Term, b: &Term, w: &EqWitness) -> Result<(), ReplayError> {
        match w {
            EqWitness::Identical(t) => {
                if a == t && b == t {
                    Ok(())
                } else {
                    Err(ReplayError::End {
                        expected: a.clone(),
                        got: b.clone(),
                    })
                }
            }
            EqWitness::Join(j) => self.replay_join(a, b, j),
            EqWitness::Conversion(c) => {
                self.replay_conversion(c)?;
                if &c.start != a || c.end() != b {
                    return Err(ReplayError::End {
                        expected: b.clone(),
                        got: c.end().clone(),
                    });
                }
                Ok(())
            }
        }
    }
}

fn build_conversion(
    meet: &Term,
    pa: &HashMap<Term, Option<(Term, Dir, Step)>>,
    pb: &HashMap<Term, Option<(Term, Dir, Step)>>,
) -> ConversionSequence {
    let mut rev = Vec::new();
    let mut cur = meet.clone();
    while let Some(Some((prev, dir, step))) = pa.get(&cur) {
        rev.push((*dir, step.clone(), cur.clone()));
        cur = prev.clone();
    }
    let mut conv = ConversionSequence::empty(cur);
    for (dir, step, to) in rev.into_iter().rev() {
        conv.push(dir, step, to);
    }
    let mut cur = meet.clone();
    while let Some(Some((prev, dir, step))) = pb.get(&cur) {
        conv.push(dir.flip(), step.clone(), prev.clone());
        cur = prev.clone();
    }
    conv
}

pub fn redexes(sys: SystemId, t: &Term, fuel: &Fuel) -> RedexScan {
    Oracle::new(fuel.clone()).redexes(sys, t)
}

pub fn contract(
    sys: SystemId,
    t: &Term,
    pos: &Position,
    rule: u8,
    fuel: &Fuel,
) -> Result<Term, ContractError> {
    Oracle::new(fuel.clone()).contract(sys, t, pos, rule)
}

pub fn eq(sys: SystemId, a: &Term, b: &Term, fuel: &Fuel) -> EqVerdict {
    Oracle::new(fuel.clone()).eq(sys, a, b)
}

pub fn joinable(sys: SystemId, a: &Term, b: &Term, fuel: &Fuel) -> Option<Join> {
    Oracle::new(fuel.clone()).joinable(sys, a, b)
}

pub fn conversion_search_clc0(a: &Term, b: &Term, fuel: &Fuel) -> Option<ConversionSequence> {
    Oracle::new(fuel.clone()).conversion_search_clc0(a, b)
}

pub fn normalize(sys: SystemId, t: &Term, fuel: &Fuel) -> Normalized {
    Oracle::new(fuel.clone()).normalize(sys, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn oracle() -> Oracle {
        Oracle::new(Fuel::default())
    }

    #[test]
    fn redex_examples() {
        let o = oracle();
        let s = o.redexes(SystemId::Clc0, &t("C F a b"));
        assert_eq!(
            s.redexes,
            vec![Redex {
                position: Position::root(),
                rule: 2,
                level: 0
            }]
        );
        let s = o.redexes(SystemId::Clc, &t("C q a a"));
        assert!(s.redexes.iter().any(|r| r.position.is_root() && r.rule == 3));
        let s = o.redexes(SystemId::R, &t("C (K F T) a b"));
        assert!(s.redexes.iter().any(|r| r.position.is_root() && r.rule == 2));
        assert!(s.redexes.iter().all(|r| !(r.position.is_root() && r.rule == 3)));
    }

    #[test]
    fn contraction_examples() {
        let o = oracle();
        let root = Position::root();
        assert_eq!(o.contract(SystemId::Clc, &t("S a b c"), &root, 5).unwrap(), t("a c (b c)"));
        assert_eq!(o.contract(SystemId::Clc, &t("K x y"), &root, 4).unwrap(), t("x"));
        assert_eq!(o.contract(SystemId::Clc, &t("C T a b"), &root, 1).unwrap(), t("a"));
        assert!(matches!(
            o.contract(SystemId::Clc, &t("C T a b"), &root, 2),
            Err(ContractError::NotARedex { .. })
        ));
    }

    #[test]
    fn level_zero_leaves_conditions_undecided() {
        let o = oracle();
        let r = o.contract_at(SystemId::Clc, &t("C T F F"), &Position::root(), 3, 0);
        assert!(matches!(r, Err(ContractError::ConditionUnknown { .. })));
        let (v, l) = o
            .contract_at(SystemId::Clc, &t("C K (K F T) F"), &Position::root(), 3, 8)
            .unwrap();
        assert_eq!(v, t("K F T"));
        assert_eq!(l, 1);
    }

    #[test]
    fn eq_examples() {
        let o = oracle();
        assert!(o.eq(SystemId::Clc, &t("F"), &t("F")).is_yes());
        match o.eq(SystemId::Clc, &t("S K K T"), &t("T")) {
            EqVerdict::Yes(w) => o.replay_witness(&t("S K K T"), &t("T"), &w).unwrap(),
            v => panic!("{:?}", v),
        }
        assert!(!o.eq(SystemId::Clc, &t("T"), &t("F")).is_yes());
    }

    #[test]
    fn joinable_examples() {
        let o = oracle();
        for (sys, a, b, c) in [
            (SystemId::Clc, "K a b", "a", "a"),
            (SystemId::R, "C (K F T) a b", "b", "b"),
            (SystemId::Clc, "S K K F", "F", "F"),
        ] {
            let j = o.joinable(sys, &t(a), &t(b)).unwrap();
            assert_eq!(j.common, t(c));
            o.replay_join(&t(a), &t(b), &j).unwrap();
        }
    }

    #[test]
    fn conversion_examples() {
        let o = Oracle::new(Fuel::new(2000, 20, 4));
        let c = o.conversion_search_clc0(&t("F"), &t("K F T")).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.steps[0].dir, Dir::Backward);
        o.replay_conversion(&c).unwrap();
        let c = o.conversion_search_clc0(&t("C x a a"), &t("a")).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.steps[0].dir, Dir::Forward);
        assert_eq!(c.steps[0].step.rule, 3);
        assert!(o.conversion_search_clc0(&t("T"), &t("F")).is_none());
    }

    #[test]
    fn normalize_examples() {
        let o = oracle();
        let n = o.normalize(SystemId::Clc, &t("K F T"));
        assert_eq!((n.term, n.trace.len(), n.complete), (t("F"), 1, true));
        let n = o.normalize(SystemId::Clc, &t("S K K F"));
        assert_eq!((n.term.clone(), n.trace.len(), n.complete), (t("F"), 2, true));
        o.replay_trace(&n.trace).unwrap();
        let n = o.normalize(SystemId::Clc, &t("S S S"));
        assert_eq!((n.term, n.trace.len(), n.complete), (t("S S S"), 0, true));
    }
}
