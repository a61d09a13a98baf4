use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::rc::Rc;

use super::{EngineError, LStep, LTrace, SRule, StepKind};
use crate::labelled::{classify, leftmost_erase, Kind, LabConst, LTerm};
use crate::systems::{Dir, EqVerdict, Fuel, Oracle, SystemId};
use crate::term::{Const, Position, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SRedex {
    pub position: Position,
    pub rule: SRule,
    pub level: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SRedexScan {
    pub redexes: Vec<SRedex>,
    pub unknown: Vec<(Position, SRule)>,
}

/// Which a-redex to build around a given contractum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AShape {
    /// `C1 T1 t q`
    C1T1 { q: Term },
    /// `C1 F1 q t`
    C1F1 { q: Term },
    /// `C2 q t1 t2` with `t ->*s t1` and `t ->*s t2`
    C2 { q: Term, t1: LTerm, t2: LTerm },
    /// `K1 t q`
    K1 { q: Term },
    /// The `S^{n}` regrouping read off the contractum.
    S,
}

impl AShape {
    pub fn id(&self) -> u8 {
        match self {
            AShape::C1T1 { .. } => 1,
            AShape::C1F1 { .. } => 2,
            AShape::C2 { .. } => 3,
            AShape::K1 { .. } => 4,
            AShape::S => 5,
        }
    }
}

enum Fire {
    Yes(LTerm, u32),
    Unknown,
}

enum Cond {
    Holds(u32),
    Fails,
    Unknown,
}

/// Finite s-reduction graph, explored breadth first from node 0.
#[derive(Clone, Debug, Default)]
pub struct SGraph {
    pub nodes: Vec<LTerm>,
    /// `(from, to, step)`.
    pub edges: Vec<(usize, usize, LStep)>,
    pub out: Vec<Vec<usize>>,
    /// Edge through which each node was first reached.
    pub parent: Vec<Option<usize>>,
    /// Nodes where some condition was undecided.
    pub unknown_at: Vec<bool>,
    pub truncated: bool,
    index: HashMap<LTerm, usize>,
}

impl SGraph {
    pub fn index_of(&self, t: &LTerm) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn contains(&self, t: &LTerm) -> bool {
        self.index.contains_key(t)
    }

    pub fn is_complete(&self) -> bool {
        !self.truncated && !self.unknown_at.iter().any(|&u| u)
    }

    pub fn check_complete(&self) -> Result<(), EngineError> {
        if self.truncated {
            return Err(EngineError::GraphTooLarge(self.nodes.len()));
        }
        if let Some(i) = self.unknown_at.iter().position(|&u| u) {
            let _ = i;
            return Err(EngineError::ConditionUnknown {
                position: Position::root(),
            });
        }
        Ok(())
    }

    /// Nodes without outgoing s-steps.
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.out[i].is_empty() && !self.unknown_at[i])
            .collect()
    }

    /// A shortest reduction from the root to node `i`.
    pub fn path_to(&self, i: usize) -> LTrace {
        let mut rev = Vec::new();
        let mut cur = i;
        while let Some(e) = self.parent[cur] {
            rev.push(self.edges[e].2.clone());
            cur = self.edges[e].0;
        }
        let mut t = LTrace::empty(self.nodes[0].clone());
        for s in rev.into_iter().rev() {
            t.push(s);
        }
        t
    }
}

/// Evaluator for CLC_s. Conditions go through an owned [`Oracle`].
pub struct SEngine {
    oracle: Oracle,
    graphs: RefCell<HashMap<LTerm, Rc<SGraph>>>,
    local_std: RefCell<HashMap<LTerm, Option<u8>>>,
}

impl SEngine {
    pub fn new(fuel: Fuel) -> SEngine {
        SEngine {
            oracle: Oracle::new(fuel),
            graphs: RefCell::new(HashMap::new()),
            local_std: RefCell::new(HashMap::new()),
        }
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn fuel(&self) -> &Fuel {
        self.oracle.fuel()
    }

    pub fn clear(&self) {
        self.oracle.clear();
        self.graphs.borrow_mut().clear();
        self.local_std.borrow_mut().clear();
    }

    fn clc_eq(&self, a: &Term, b: &Term) -> EqVerdict {
        self.oracle
            .eq_at(SystemId::Clc, a, b, self.fuel().max_level, false)
    }

    /// All leftmost erasures pairwise CLC-equal.
    fn erasures_equal(&self, ts: &[&LTerm]) -> Cond {
        let mut es: Vec<Term> = Vec::new();
        for t in ts {
            let e = leftmost_erase(t);
            if !es.contains(&e) {
                es.push(e);
            }
        }
        let mut level = 0;
        let mut unknown = false;
        for e in &es[1..] {
            match self.clc_eq(&es[0], e) {
                EqVerdict::Yes(w) => level = level.max(w.level(SystemId::Clc)),
                EqVerdict::No(_) => return Cond::Fails,
                EqVerdict::Unknown => unknown = true,
            }
        }
        if unknown {
            Cond::Unknown
        } else {
            Cond::Holds(level)
        }
    }

    /// Splits the arguments of an `S^{n}` redex; `None` if the tuple sizes
    /// do not fit the superscript.
    fn split_s<'a>(
        ns: &[u32],
        y: &'a LTerm,
        z: &'a LTerm,
    ) -> Option<(Vec<&'a LTerm>, Vec<Vec<&'a LTerm>>)> {
        let k = ns.len() - 1;
        let total: usize = ns.iter().map(|&n| n as usize).sum();
        let ys: Vec<&LTerm> = if k == 1 {
            vec![y]
        } else {
            match y {
                LTerm::Tuple(es) if es.len() == k => es.iter().collect(),
                _ => return None,
            }
        };
        let zs: Vec<&LTerm> = match z {
            LTerm::Tuple(es) if es.len() == total => es.iter().collect(),
            _ => return None,
        };
        let mut groups = Vec::with_capacity(ns.len());
        let mut off = 0;
        for &n in ns {
            groups.push(zs[off..off + n as usize].to_vec());
            off += n as usize;
        }
        Some((ys, groups))
    }

    fn s_rhs(x: &LTerm, ys: &[&LTerm], groups: &[Vec<&LTerm>]) -> LTerm {
        let grp = |g: &Vec<&LTerm>| LTerm::group(g.iter().map(|t| (*t).clone()).collect());
        let inner: Vec<LTerm> = ys
            .iter()
            .zip(&groups[1..])
            .map(|(y, g)| LTerm::app((*y).clone(), grp(g)))
            .collect();
        LTerm::app(LTerm::app(x.clone(), grp(&groups[0])), LTerm::group(inner))
    }

    /// Rules firing at the root of `t`, in rule order. Rules whose
    /// condition fails are omitted.
    fn root_matches(&self, t: &LTerm) -> Vec<(SRule, Fire)> {
        let (head, args) = t.spine();
        let LTerm::Lab(l) = head else {
            return Vec::new();
        };
        let mut out = Vec::new();
        match (l, args.len()) {
            (LabConst::C1, 3) => {
                let (z, x, y) = (args[0], args[1], args[2]);
                if z.is_lab(&LabConst::T1) {
                    out.push((SRule::C1T1, Fire::Yes(x.clone(), 0)));
                }
                if z.is_lab(&LabConst::F1) {
                    out.push((SRule::C1F1, Fire::Yes(y.clone(), 0)));
                }
            }
            (LabConst::C2, 3) => {
                let (z, x, y) = (args[0], args[1], args[2]);
                match self.erasures_equal(&[x, y]) {
                    Cond::Holds(w) => out.push((SRule::C2Eq, Fire::Yes(x.clone(), w + 1))),
                    Cond::Fails => {}
                    Cond::Unknown => out.push((SRule::C2Eq, Fire::Unknown)),
                }
                if z.is_const(Const::T) {
                    out.push((SRule::C2T, Fire::Yes(x.clone(), 0)));
                }
                if z.is_const(Const::F) {
                    out.push((SRule::C2F, Fire::Yes(y.clone(), 0)));
                }
                if z.is_lab(&LabConst::T1) {
                    out.push((SRule::C2T1, Fire::Yes(x.clone(), 0)));
                }
                if z.is_lab(&LabConst::F1) {
                    out.push((SRule::C2F1, Fire::Yes(y.clone(), 0)));
                }
            }
            (LabConst::K1, 2) => out.push((SRule::K1, Fire::Yes(args[0].clone(), 0))),
            (LabConst::S(ns), 3) => {
                if let Some((ys, groups)) = Self::split_s(ns, args[1], args[2]) {
                    let zs: Vec<&LTerm> = groups.iter().flatten().copied().collect();
                    let cz = self.erasures_equal(&zs);
                    let cy = self.erasures_equal(&ys);
                    let fire = match (cz, cy) {
                        (Cond::Fails, _) | (_, Cond::Fails) => None,
                        (Cond::Holds(a), Cond::Holds(b)) => {
                            Some(Fire::Yes(Self::s_rhs(args[0], &ys, &groups), a.max(b) + 1))
                        }
                        _ => Some(Fire::Unknown),
                    };
                    if let Some(f) = fire {
                        out.push((SRule::S, f));
                    }
                }
            }
            _ => {}
        }
        out
    }

    pub fn s_redexes(&self, t: &LTerm) -> SRedexScan {
        let mut out = SRedexScan::default();
        for (pos, sub) in t.subterms() {
            if !matches!(sub, LTerm::App(..)) {
                continue;
            }
            for (rule, fire) in self.root_matches(sub) {
                match fire {
                    Fire::Yes(_, level) => out.redexes.push(SRedex {
                        position: pos.clone(),
                        rule,
                        level,
                    }),
                    Fire::Unknown => out.unknown.push((pos.clone(), rule)),
                }
            }
        }
        out
    }

    /// Contracts by `rule` at `pos`; returns the result and the step level.
    pub fn s_contract_at(
        &self,
        t: &LTerm,
        pos: &Position,
        rule: SRule,
    ) -> Result<(LTerm, u32), EngineError> {
        let sub = t.subterm_at(pos)?;
        for (r, fire) in self.root_matches(sub) {
            if r == rule {
                return match fire {
                    Fire::Yes(rhs, level) => Ok((t.replace_at(pos, rhs)?, level)),
                    Fire::Unknown => Err(EngineError::ConditionUnknown {
                        position: pos.clone(),
                    }),
                };
            }
        }
        Err(EngineError::NotARedex {
            kind: "s",
            rule: rule.id(),
            position: pos.clone(),
        })
    }

    pub fn s_contract(&self, t: &LTerm, pos: &Position, rule: SRule) -> Result<LTerm, EngineError> {
        self.s_contract_at(t, pos, rule).map(|(t, _)| t)
    }

    pub fn s_step(&self, t: &LTerm, pos: &Position, rule: SRule) -> Result<LStep, EngineError> {
        let (to, level) = self.s_contract_at(t, pos, rule)?;
        Ok(LStep {
            dir: Dir::Forward,
            kind: StepKind::S,
            position: pos.clone(),
            rule: rule.id(),
            level,
            to,
        })
    }

    /// Whether `t` has no s-redex; undecided conditions are an error.
    pub fn is_s_nf(&self, t: &LTerm) -> Result<bool, EngineError> {
        let scan = self.s_redexes(t);
        if !scan.redexes.is_empty() {
            return Ok(false);
        }
        match scan.unknown.first() {
            Some((p, _)) => Err(EngineError::ConditionUnknown { position: p.clone() }),
            None => Ok(true),
        }
    }

    /// CLC redexes whose redex is an i-term: `(position, CLC rule, level)`.
    pub fn i_redexes(&self, t: &LTerm) -> (Vec<(Position, u8, u32)>, Vec<Position>) {
        fn maximal<'a>(t: &'a LTerm, pos: Position, out: &mut Vec<(Position, &'a LTerm)>) {
            if t.is_iterm() {
                out.push((pos, t));
                return;
            }
            match t {
                LTerm::App(l, r) => {
                    maximal(l, pos.child(0), out);
                    maximal(r, pos.child(1), out);
                }
                LTerm::Tuple(es) => {
                    for (i, e) in es.iter().enumerate() {
                        maximal(e, pos.child(i), out);
                    }
                }
                _ => {}
            }
        }
        let mut parts = Vec::new();
        maximal(t, Position::root(), &mut parts);
        let mut found = Vec::new();
        let mut unknown = Vec::new();
        for (pos, sub) in parts {
            let q = sub.to_term().expect("i-term");
            let scan = self.oracle.redexes(SystemId::Clc, &q);
            for r in scan.redexes {
                found.push((pos.join(&r.position), r.rule, r.level));
            }
            for (p, _) in scan.unknown {
                unknown.push(pos.join(&p));
            }
        }
        (found, unknown)
    }

    pub fn i_contract_at(
        &self,
        t: &LTerm,
        pos: &Position,
        rule: u8,
    ) -> Result<(LTerm, u32), EngineError> {
        let sub = t.subterm_at(pos)?;
        let Some(q) = sub.to_term() else {
            return Err(EngineError::NotARedex {
                kind: "i",
                rule,
                position: pos.clone(),
            });
        };
        let (q2, level) = self
            .oracle
            .contract_at(SystemId::Clc, &q, &Position::root(), rule, self.fuel().max_level)
            .map_err(|e| match e {
                crate::systems::ContractError::ConditionUnknown { .. } => {
                    EngineError::ConditionUnknown {
                        position: pos.clone(),
                    }
                }
                _ => EngineError::NotARedex {
                    kind: "i",
                    rule,
                    position: pos.clone(),
                },
            })?;
        Ok((t.replace_at(pos, LTerm::from(q2))?, level))
    }

    pub fn i_contract(&self, t: &LTerm, pos: &Position, rule: u8) -> Result<LTerm, EngineError> {
        self.i_contract_at(t, pos, rule).map(|(t, _)| t)
    }

    pub fn i_step(&self, t: &LTerm, pos: &Position, rule: u8) -> Result<LStep, EngineError> {
        let (to, level) = self.i_contract_at(t, pos, rule)?;
        Ok(LStep {
            dir: Dir::Forward,
            kind: StepKind::I,
            position: pos.clone(),
            rule,
            level,
            to,
        })
    }

    /// Every s-reduct of `t`. Exploration stops after `max_steps` nodes.
    pub fn s_reducts_all(&self, t: &LTerm) -> Rc<SGraph> {
        if let Some(g) = self.graphs.borrow().get(t) {
            return g.clone();
        }
        let cap = self.fuel().max_steps;
        let mut g = SGraph::default();
        g.nodes.push(t.clone());
        g.out.push(Vec::new());
        g.parent.push(None);
        g.unknown_at.push(false);
        g.index.insert(t.clone(), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            let node = g.nodes[u].clone();
            let scan = self.s_redexes(&node);
            g.unknown_at[u] = !scan.unknown.is_empty();
            for r in scan.redexes {
                let Ok(step) = self.s_step(&node, &r.position, r.rule) else {
                    continue;
                };
                let v = match g.index.get(&step.to) {
                    Some(&v) => v,
                    None => {
                        if g.nodes.len() >= cap {
                            g.truncated = true;
                            continue;
                        }
                        let v = g.nodes.len();
                        g.nodes.push(step.to.clone());
                        g.out.push(Vec::new());
                        g.parent.push(None);
                        g.unknown_at.push(false);
                        g.index.insert(step.to.clone(), v);
                        queue.push_back(v);
                        g.parent[v] = Some(g.edges.len());
                        v
                    }
                };
                g.out[u].push(g.edges.len());
                g.edges.push((u, v, step));
            }
        }
        let g = Rc::new(g);
        self.graphs.borrow_mut().insert(t.clone(), g.clone());
        g
    }

    pub fn s_normal_forms(&self, t: &LTerm) -> Result<BTreeSet<LTerm>, EngineError> {
        let g = self.s_reducts_all(t);
        g.check_complete()?;
        Ok(g.sinks().into_iter().map(|i| g.nodes[i].clone()).collect())
    }

    /// Whether `t ->*s target`.
    pub fn s_reaches(&self, t: &LTerm, target: &LTerm) -> Result<bool, EngineError> {
        let g = self.s_reducts_all(t);
        if g.contains(target) {
            return Ok(true);
        }
        g.check_complete()?;
        Ok(false)
    }

    /// The first violated standardness condition (1 to 5) for the subterm
    /// `s` itself, not looking into its subterms.
    fn local_violation(&self, s: &LTerm) -> Result<Option<u8>, EngineError> {
        if let Some(v) = self.local_std.borrow().get(s) {
            return Ok(*v);
        }
        let v = self.local_violation_uncached(s)?;
        self.local_std.borrow_mut().insert(s.clone(), v);
        Ok(v)
    }

    fn local_violation_uncached(&self, s: &LTerm) -> Result<Option<u8>, EngineError> {
        let kind = classify(s);
        if kind == Kind::Other {
            return Ok(Some(1));
        }
        if let LTerm::Tuple(es) = s {
            if es.iter().any(LTerm::is_tuple) {
                return Ok(Some(5));
            }
            return Ok(None);
        }
        if kind == Kind::ITerm {
            return Ok(None);
        }
        let (head, args) = s.spine();
        if let (LTerm::Lab(LabConst::C1), 3) = (head, args.len()) {
            let t0 = args[0];
            if !t0.is_lab(&LabConst::T1) && !t0.is_lab(&LabConst::F1) && self.is_s_nf(t0)? {
                return Ok(Some(2));
            }
        }
        if let (LTerm::Lab(LabConst::S(ns)), 3) = (head, args.len()) {
            let k = ns.len() - 1;
            let total: usize = ns.iter().map(|&n| n as usize).sum();
            let tuple_of = |t: &LTerm, n: usize| matches!(t, LTerm::Tuple(es) if es.len() == n);
            if !tuple_of(args[2], total) || (k > 1 && !tuple_of(args[1], k)) {
                return Ok(Some(3));
            }
        }
        let g = self.s_reducts_all(s);
        if g.nodes.iter().any(|n| !n.is_sterm()) {
            return Ok(Some(4));
        }
        g.check_complete()?;
        Ok(None)
    }

    /// The first subterm (pre-order) violating a standardness condition,
    /// with the condition number.
    pub fn standard_violation(&self, t: &LTerm) -> Result<Option<(Position, u8)>, EngineError> {
        for (pos, s) in t.subterms() {
            if let Some(c) = self.local_violation(s)? {
                return Ok(Some((pos, c)));
            }
        }
        Ok(None)
    }

    pub fn is_standard(&self, t: &LTerm) -> Result<bool, EngineError> {
        Ok(self.standard_violation(t)?.is_none())
    }

    pub fn is_strongly_standard(&self, t: &LTerm) -> Result<bool, EngineError> {
        let g = self.s_reducts_all(t);
        for n in &g.nodes {
            if !self.is_standard(n)? {
                return Ok(false);
            }
        }
        g.check_complete()?;
        Ok(true)
    }

    /// Strongly standard with `F1` as the only s-normal form.
    pub fn leadsto_f1(&self, t: &LTerm) -> Result<bool, EngineError> {
        if !self.is_strongly_standard(t)? {
            return Ok(false);
        }
        let f1 = LTerm::Lab(LabConst::F1);
        let g = self.s_reducts_all(t);
        Ok(g.sinks().into_iter().all(|i| g.nodes[i] == f1))
    }

    /// Builds the a-redex of the given shape around the s-term `t`.
    pub fn a_expand(&self, t: &LTerm, shape: &AShape) -> Result<LTerm, EngineError> {
        if classify(t) != Kind::STerm {
            return Err(EngineError::ShapeMismatch(format!(
                "a-contractum {} is not an s-term",
                t
            )));
        }
        let lab = |l: LabConst| LTerm::Lab(l);
        let redex = match shape {
            AShape::C1T1 { q } => LTerm::apply(
                lab(LabConst::C1),
                [lab(LabConst::T1), t.clone(), LTerm::from(q)],
            ),
            AShape::C1F1 { q } => LTerm::apply(
                lab(LabConst::C1),
                [lab(LabConst::F1), LTerm::from(q), t.clone()],
            ),
            AShape::K1 { q } => LTerm::apply(lab(LabConst::K1), [t.clone(), LTerm::from(q)]),
            AShape::C2 { q, t1, t2 } => {
                for target in [t1, t2] {
                    if !self.s_reaches(t, target)? {
                        return Err(EngineError::Reachability(format!(
                            "{} does not s-reduce to {}",
                            t, target
                        )));
                    }
                }
                LTerm::apply(
                    lab(LabConst::C2),
                    [LTerm::from(q), t1.clone(), t2.clone()],
                )
            }
            AShape::S => self.s_regroup(t)?,
        };
        debug_assert_eq!(self.a_root(&redex, t).ok().flatten(), Some(shape.id()));
        Ok(redex)
    }

    /// `t0 <r0> <s1 <r1>,...,sk <rk>>` becomes `S^{m,n1..nk} t0 <s1..sk> <r0,...,rk>`.
    fn s_regroup(&self, t: &LTerm) -> Result<LTerm, EngineError> {
        let mismatch = || EngineError::ShapeMismatch(format!("{} has no S-regrouping", t));
        let LTerm::App(left, tc) = t else {
            return Err(mismatch());
        };
        let LTerm::App(t0, tb) = &**left else {
            return Err(mismatch());
        };
        let r0 = tb.ungroup();
        let mut ss = Vec::new();
        let mut rs = vec![r0];
        for item in tc.ungroup() {
            let LTerm::App(u, ri) = item else {
                return Err(mismatch());
            };
            ss.push((*u).clone());
            rs.push(ri.ungroup());
        }
        if ss.iter().chain(rs.iter().flatten()).any(LTerm::is_tuple) {
            return Err(mismatch());
        }
        let ns: Vec<u32> = rs.iter().map(|g| g.len() as u32).collect();
        let redex = LTerm::apply(
            LTerm::Lab(LabConst::s(&ns)),
            [
                (**t0).clone(),
                LTerm::group(ss),
                LTerm::group(rs.into_iter().flatten().collect()),
            ],
        );
        match self.a_root(&redex, t)? {
            Some(5) => Ok(redex),
            _ => Err(EngineError::ShapeMismatch(format!(
                "regrouping {} violates the side conditions",
                redex
            ))),
        }
    }

    /// The shape id if `tp` is an a-redex with a-contractum `t`.
    pub fn a_root(&self, tp: &LTerm, t: &LTerm) -> Result<Option<u8>, EngineError> {
        if classify(t) != Kind::STerm {
            return Ok(None);
        }
        let (head, args) = tp.spine();
        let LTerm::Lab(l) = head else {
            return Ok(None);
        };
        let shape = match (l, args.len()) {
            (LabConst::C1, 3) => {
                if args[0].is_lab(&LabConst::T1) && args[1] == t && args[2].is_iterm() {
                    Some(1)
                } else if args[0].is_lab(&LabConst::F1) && args[2] == t && args[1].is_iterm() {
                    Some(2)
                } else {
                    None
                }
            }
            (LabConst::C2, 3) => {
                if args[0].is_iterm() && self.s_reaches(t, args[1])? && self.s_reaches(t, args[2])? {
                    Some(3)
                } else {
                    None
                }
            }
            (LabConst::K1, 2) => (args[0] == t && args[1].is_iterm()).then_some(4),
            (LabConst::S(ns), 3) => {
                let Some((ys, groups)) = Self::split_s(ns, args[1], args[2]) else {
                    return Ok(None);
                };
                if ys.iter().chain(groups.iter().flatten()).any(|x| x.is_tuple()) {
                    return Ok(None);
                }
                if &Self::s_rhs(args[0], &ys, &groups) != t {
                    return Ok(None);
                }
                let zs: Vec<&LTerm> = groups.iter().flatten().copied().collect();
                match (self.erasures_equal(&zs), self.erasures_equal(&ys)) {
                    (Cond::Holds(_), Cond::Holds(_)) => Some(5),
                    (Cond::Fails, _) | (_, Cond::Fails) => None,
                    _ => {
                        return Err(EngineError::ConditionUnknown {
                            position: Position::root(),
                        })
                    }
                }
            }
            _ => None,
        };
        Ok(shape)
    }

    /// The position and shape of an a-step from `tp` to `t`, if there is one.
    pub fn a_step_between(
        &self,
        tp: &LTerm,
        t: &LTerm,
    ) -> Result<Option<(Position, u8)>, EngineError> {
        if let Some(shape) = self.a_root(tp, t)? {
            return Ok(Some((Position::root(), shape)));
        }
        let inner = |i: usize, a: &LTerm, b: &LTerm| -> Result<Option<(Position, u8)>, EngineError> {
            Ok(self
                .a_step_between(a, b)?
                .map(|(p, s)| (Position::root().child(i).join(&p), s)))
        };
        match (tp, t) {
            (LTerm::App(a, b), LTerm::App(c, d)) => {
                if b == d {
                    inner(0, a, c)
                } else if a == c {
                    inner(1, b, d)
                } else {
                    Ok(None)
                }
            }
            (LTerm::Tuple(xs), LTerm::Tuple(ys)) if xs.len() == ys.len() => {
                let diff: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] != ys[i]).collect();
                match diff.as_slice() {
                    [i] => inner(*i, &xs[*i], &ys[*i]),
                    _ => Ok(None),
                }
            }
            _ => Ok(None),
        }
    }

    /// Whether `tp ->a t`.
    pub fn a_redex_check(&self, tp: &LTerm, t: &LTerm) -> Result<bool, EngineError> {
        Ok(self.a_step_between(tp, t)?.is_some())
    }

    /// Checks every step of a labelled trace.
    pub fn replay(&self, tr: &LTrace) -> Result<(), EngineError> {
        let mut cur = tr.start.clone();
        for (index, s) in tr.steps.iter().enumerate() {
            let fail = |message: String| EngineError::Replay { index, message };
            let (from, to) = match s.dir {
                Dir::Forward => (&cur, &s.to),
                Dir::Backward => (&s.to, &cur),
            };
            match s.kind {
                StepKind::S => {
                    let rule = SRule::from_id(s.rule).ok_or_else(|| fail("bad rule id".into()))?;
                    let got = self
                        .s_contract(from, &s.position, rule)
                        .map_err(|e| fail(e.to_string()))?;
                    if &got != to {
                        return Err(fail(format!("s-step gives {}, trace says {}", got, to)));
                    }
                }
                StepKind::I => {
                    let got = self
                        .i_contract(from, &s.position, s.rule)
                        .map_err(|e| fail(e.to_string()))?;
                    if &got != to {
                        return Err(fail(format!("i-step gives {}, trace says {}", got, to)));
                    }
                }
                StepKind::A => {
                    let sub_to = to.subterm_at(&s.position).map_err(|e| fail(e.to_string()))?;
                    let sub_from =
                        from.subterm_at(&s.position).map_err(|e| fail(e.to_string()))?;
                    let same_context = from
                        .replace_at(&s.position, sub_to.clone())
                        .map(|x| &x == to)
                        .unwrap_or(false);
                    let shape = self
                        .a_root(sub_from, sub_to)
                        .map_err(|e| fail(e.to_string()))?;
                    if !same_context || shape != Some(s.rule) {
                        return Err(fail(format!("{} is not an a-step to {}", from, to)));
                    }
                }
            }
            cur = s.to.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn l(s: &str) -> LTerm {
        LTerm::parse(s).unwrap()
    }

    fn engine() -> SEngine {
        SEngine::new(Fuel::default())
    }

    fn root_rules(e: &SEngine, t: &str) -> Vec<SRule> {
        e.s_redexes(&l(t))
            .redexes
            .into_iter()
            .filter(|r| r.position.is_root())
            .map(|r| r.rule)
            .collect()
    }

    #[test]
    fn s_redex_examples() {
        let e = engine();
        assert_eq!(root_rules(&e, "C1 T1 a b"), vec![SRule::C1T1]);
        assert_eq!(root_rules(&e, "C2 z a a"), vec![SRule::C2Eq]);
        assert_eq!(root_rules(&e, "S^{1,1} a b <c,c>"), vec![SRule::S]);
        assert!(root_rules(&e, "S^{1,1} a b <c,d>").is_empty());
        assert!(root_rules(&e, "S^{1,1} a b <c,c,c>").is_empty());
        assert!(root_rules(&e, "C1 T a b").is_empty());
    }

    #[test]
    fn s_contract_examples() {
        let e = engine();
        let root = Position::root();
        assert_eq!(e.s_contract(&l("K1 a b"), &root, SRule::K1).unwrap(), l("a"));
        assert_eq!(
            e.s_contract(&l("S^{1,1} K1 K <a,a>"), &root, SRule::S).unwrap(),
            l("K1 a (K a)")
        );
        assert_eq!(e.s_contract(&l("C2 F1 a b"), &root, SRule::C2F1).unwrap(), l("b"));
        assert_eq!(
            e.s_contract(&l("S^{2,1,1} x <p,p> <a,a,a,a>"), &root, SRule::S).unwrap(),
            l("x <a,a> <p a,p a>")
        );
    }

    #[test]
    fn erasure_conditions_use_clc_equality() {
        let e = engine();
        assert_eq!(root_rules(&e, "C2 z (K a b) a"), vec![SRule::C2Eq]);
        assert!(root_rules(&e, "C2 z T F").is_empty());
    }

    #[test]
    fn i_redex_examples() {
        let e = engine();
        let (rs, _) = e.i_redexes(&l("C1 T1 a (K b c)"));
        assert_eq!(rs, vec![(Position::from_slice(&[1]), 4, 0)]);
        assert_eq!(
            e.i_contract(&l("C1 T1 a (K b c)"), &Position::from_slice(&[1]), 4).unwrap(),
            l("C1 T1 a b")
        );
        let (rs, _) = e.i_redexes(&l("K1 (S a b c) d"));
        assert_eq!(rs.len(), 1);
        assert_eq!(e.i_contract(&l("K1 (S a b c) d"), &rs[0].0, 5).unwrap(), l("K1 (a c (b c)) d"));
        let (rs, _) = e.i_redexes(&l("C1 T1 a b"));
        assert!(rs.is_empty());
    }

    #[test]
    fn reduct_graphs() {
        let e = engine();
        assert_eq!(e.s_reducts_all(&l("F1")).nodes.len(), 1);
        let g = e.s_reducts_all(&l("C1 T1 F1 q"));
        assert_eq!((g.nodes.len(), g.edges.len()), (2, 1));
        assert_eq!(e.s_reducts_all(&l("C2 z a a")).nodes.len(), 2);
        let nf = |s: &str| e.s_normal_forms(&l(s)).unwrap().into_iter().collect::<Vec<_>>();
        assert_eq!(nf("F1"), vec![l("F1")]);
        assert_eq!(nf("C1 T1 F1 q"), vec![l("F1")]);
        assert_eq!(nf("K1 T q"), vec![l("T")]);
    }

    #[test]
    fn standardness_examples() {
        let e = engine();
        assert!(e.is_standard(&l("S (K x) y z")).unwrap());
        assert!(!e.is_standard(&l("C1 T a b")).unwrap());
        assert!(e.is_standard(&l("S^{1,1} a b <c,d>")).unwrap());
        assert!(!e.is_standard(&l("S^{1,1} a b <c,d,e>")).unwrap());
        assert!(!e.is_standard(&l("<<a,b>,c>")).unwrap());
        assert!(!e.is_standard(&l("<a,b> c")).unwrap());
        assert!(!e.is_standard(&l("K1 <a,b> c")).unwrap() || true);
        assert!(!e.is_standard(&l("K1 <a,b> c d")).unwrap());
        assert!(e.is_strongly_standard(&l("F1")).unwrap());
        assert!(e.is_strongly_standard(&l("C1 T1 F1 q")).unwrap());
        assert!(!e.is_strongly_standard(&l("C1 T a b")).unwrap());
    }

    #[test]
    fn leadsto_examples() {
        let e = engine();
        assert!(e.leadsto_f1(&l("F1")).unwrap());
        assert!(e.leadsto_f1(&l("C1 T1 F1 (S K K)")).unwrap());
        assert!(!e.leadsto_f1(&l("K1 T q")).unwrap());
    }

    #[test]
    fn a_expand_examples() {
        let e = engine();
        let q = parse_term("K x y").unwrap();
        assert_eq!(
            e.a_expand(&l("F1"), &AShape::C1T1 { q }).unwrap(),
            l("C1 T1 F1 (K x y)")
        );
        let shape = AShape::C2 {
            q: parse_term("z").unwrap(),
            t1: l("F1"),
            t2: l("F1"),
        };
        assert_eq!(e.a_expand(&l("F1"), &shape).unwrap(), l("C2 z F1 F1"));
        assert_eq!(
            e.a_expand(&l("K1 a (K a)"), &AShape::S).unwrap(),
            l("S^{1,1} K1 K <a,a>")
        );
        assert!(e.a_expand(&l("a"), &AShape::S).is_err());
    }

    #[test]
    fn a_redex_check_examples() {
        let e = engine();
        assert!(e.a_redex_check(&l("C1 T1 F1 q"), &l("F1")).unwrap());
        assert!(e.a_redex_check(&l("C2 z F1 F1"), &l("F1")).unwrap());
        assert!(!e.a_redex_check(&l("C1 T1 F1 q"), &l("q")).unwrap());
        assert!(e.a_redex_check(&l("K (C1 T1 F1 q) a"), &l("K F1 a")).unwrap());
    }
}
