//! Labelled terms: plain terms extended with labelled constants and tuples.
//!
//! A labelled term whose head constant is labelled is *significant*; a term
//! without labels or tuples is *insignificant*. Tuples `<t1,...,tn>` have at
//! least two elements; a one-element grouping is the element itself.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clcs::{EngineError, SEngine};
use crate::syntax;
use crate::systems::Fuel;
use crate::term::{Const, Position, Term, TermError};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabConst {
    C1,
    C2,
    T1,
    F1,
    K1,
    /// `S^{n0,...,nk}` with `k >= 1` and every entry positive.
    S(Arc<[u32]>),
}

impl LabConst {
    pub fn erase(&self) -> Const {
        match self {
            LabConst::C1 | LabConst::C2 => Const::C,
            LabConst::T1 => Const::T,
            LabConst::F1 => Const::F,
            LabConst::K1 => Const::K,
            LabConst::S(_) => Const::S,
        }
    }

    pub fn s(counts: &[u32]) -> LabConst {
        assert!(counts.len() >= 2 && counts.iter().all(|&n| n >= 1));
        LabConst::S(counts.into())
    }
}

impl fmt::Display for LabConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabConst::C1 => f.write_str("C1"),
            LabConst::C2 => f.write_str("C2"),
            LabConst::T1 => f.write_str("T1"),
            LabConst::F1 => f.write_str("F1"),
            LabConst::K1 => f.write_str("K1"),
            LabConst::S(ns) => {
                f.write_str("S^{")?;
                for (i, n) in ns.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", n)?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Debug for LabConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LTerm {
    Var(Arc<str>),
    Const(Const),
    Lab(LabConst),
    App(Arc<LTerm>, Arc<LTerm>),
    Tuple(Arc<[LTerm]>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    ITerm,
    STerm,
    TupleKind,
    Other,
}

impl LTerm {
    pub fn var(name: &str) -> LTerm {
        LTerm::Var(Arc::from(name))
    }

    pub fn app(l: LTerm, r: LTerm) -> LTerm {
        LTerm::App(Arc::new(l), Arc::new(r))
    }

    pub fn apply<I: IntoIterator<Item = LTerm>>(head: LTerm, args: I) -> LTerm {
        args.into_iter().fold(head, LTerm::app)
    }

    /// `<t1,...,tn>`, collapsing a single element to itself.
    pub fn group(mut elems: Vec<LTerm>) -> LTerm {
        assert!(!elems.is_empty(), "empty grouping");
        if elems.len() == 1 {
            elems.pop().unwrap()
        } else {
            LTerm::Tuple(elems.into())
        }
    }

    /// Elements of a tuple, or the term itself as a single element.
    pub fn ungroup(&self) -> Vec<LTerm> {
        match self {
            LTerm::Tuple(es) => es.to_vec(),
            other => vec![other.clone()],
        }
    }

    pub fn parse(text: &str) -> Result<LTerm, TermError> {
        parse_lterm(text)
    }

    pub fn is_tuple(&self) -> bool {
        matches!(self, LTerm::Tuple(_))
    }

    pub fn is_lab(&self, l: &LabConst) -> bool {
        matches!(self, LTerm::Lab(m) if m == l)
    }

    pub fn is_const(&self, c: Const) -> bool {
        matches!(self, LTerm::Const(d) if *d == c)
    }

    pub fn size(&self) -> usize {
        match self {
            LTerm::Var(_) | LTerm::Const(_) | LTerm::Lab(_) => 1,
            LTerm::App(l, r) => 1 + l.size() + r.size(),
            LTerm::Tuple(es) => 1 + es.iter().map(LTerm::size).sum::<usize>(),
        }
    }

    /// Number of labelled constant occurrences; strictly decreases along
    /// significant contraction.
    pub fn label_count(&self) -> usize {
        match self {
            LTerm::Var(_) | LTerm::Const(_) => 0,
            LTerm::Lab(_) => 1,
            LTerm::App(l, r) => l.label_count() + r.label_count(),
            LTerm::Tuple(es) => es.iter().map(LTerm::label_count).sum(),
        }
    }

    pub fn is_iterm(&self) -> bool {
        match self {
            LTerm::Var(_) | LTerm::Const(_) => true,
            LTerm::Lab(_) | LTerm::Tuple(_) => false,
            LTerm::App(l, r) => l.is_iterm() && r.is_iterm(),
        }
    }

    /// Head of the application spine.
    pub fn head(&self) -> &LTerm {
        let mut cur = self;
        while let LTerm::App(l, _) = cur {
            cur = l;
        }
        cur
    }

    pub fn spine(&self) -> (&LTerm, Vec<&LTerm>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let LTerm::App(l, r) = cur {
            args.push(&**r);
            cur = l;
        }
        args.reverse();
        (cur, args)
    }

    pub fn is_sterm(&self) -> bool {
        matches!(self.head(), LTerm::Lab(_))
    }

    pub fn to_term(&self) -> Option<Term> {
        match self {
            LTerm::Var(v) => Some(Term::Var(v.clone())),
            LTerm::Const(c) => Some(Term::Const(*c)),
            LTerm::Lab(_) | LTerm::Tuple(_) => None,
            LTerm::App(l, r) => Some(Term::app(l.to_term()?, r.to_term()?)),
        }
    }

    pub fn child(&self, i: usize) -> Option<&LTerm> {
        match (self, i) {
            (LTerm::App(l, _), 0) => Some(l),
            (LTerm::App(_, r), 1) => Some(r),
            (LTerm::Tuple(es), i) => es.get(i),
            _ => None,
        }
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&LTerm, TermError> {
        let mut cur = self;
        for &i in pos.as_slice() {
            cur = cur
                .child(i)
                .ok_or_else(|| TermError::InvalidPosition(pos.clone()))?;
        }
        Ok(cur)
    }

    pub fn replace_at(&self, pos: &Position, with: LTerm) -> Result<LTerm, TermError> {
        fn go(t: &LTerm, path: &[usize], with: LTerm, full: &Position) -> Result<LTerm, TermError> {
            let Some((&i, rest)) = path.split_first() else {
                return Ok(with);
            };
            match (t, i) {
                (LTerm::App(l, r), 0) => Ok(LTerm::App(Arc::new(go(l, rest, with, full)?), r.clone())),
                (LTerm::App(l, r), 1) => Ok(LTerm::App(l.clone(), Arc::new(go(r, rest, with, full)?))),
                (LTerm::Tuple(es), i) if i < es.len() => {
                    let mut v = es.to_vec();
                    v[i] = go(&es[i], rest, with, full)?;
                    Ok(LTerm::Tuple(v.into()))
                }
                _ => Err(TermError::InvalidPosition(full.clone())),
            }
        }
        go(self, pos.as_slice(), with, pos)
    }

    /// All subterms with their positions, in pre-order.
    pub fn subterms(&self) -> Vec<(Position, &LTerm)> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Position::root())];
        while let Some((t, p)) = stack.pop() {
            match t {
                LTerm::App(l, r) => {
                    stack.push((r, p.child(1)));
                    stack.push((l, p.child(0)));
                }
                LTerm::Tuple(es) => {
                    for (i, e) in es.iter().enumerate().rev() {
                        stack.push((e, p.child(i)));
                    }
                }
                _ => {}
            }
            out.push((p, t));
        }
        out
    }

    /// Whether `pos` passes through a tuple node strictly above its target.
    pub fn inside_tuple(&self, pos: &Position) -> bool {
        let mut cur = self;
        for &i in pos.as_slice() {
            if cur.is_tuple() {
                return true;
            }
            match cur.child(i) {
                Some(c) => cur = c,
                None => return false,
            }
        }
        false
    }
}

impl From<&Term> for LTerm {
    fn from(t: &Term) -> LTerm {
        match t {
            Term::Var(v) => LTerm::Var(v.clone()),
            Term::Const(c) => LTerm::Const(*c),
            Term::App(l, r) => LTerm::app(LTerm::from(&**l), LTerm::from(&**r)),
        }
    }
}

impl From<Term> for LTerm {
    fn from(t: Term) -> LTerm {
        LTerm::from(&t)
    }
}

impl From<LabConst> for LTerm {
    fn from(l: LabConst) -> LTerm {
        LTerm::Lab(l)
    }
}

impl From<Const> for LTerm {
    fn from(c: Const) -> LTerm {
        LTerm::Const(c)
    }
}

impl fmt::Display for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LTerm::Var(v) => f.write_str(v),
            LTerm::Const(c) => f.write_str(c.symbol()),
            LTerm::Lab(l) => write!(f, "{}", l),
            LTerm::App(l, r) => {
                write!(f, "{} ", l)?;
                if matches!(**r, LTerm::App(..)) {
                    write!(f, "({})", r)
                } else {
                    write!(f, "{}", r)
                }
            }
            LTerm::Tuple(es) => {
                f.write_str("<")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", e)?;
                }
                f.write_str(">")
            }
        }
    }
}

impl fmt::Debug for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self)
    }
}

impl std::str::FromStr for LTerm {
    type Err = TermError;

    fn from_str(s: &str) -> Result<LTerm, TermError> {
        parse_lterm(s)
    }
}

impl Serialize for LTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<LTerm, D::Error> {
        let text = String::deserialize(d)?;
        parse_lterm(&text).map_err(serde::de::Error::custom)
    }
}

pub fn parse_lterm(text: &str) -> Result<LTerm, TermError> {
    syntax::parse(text, true).map_err(|e| TermError::Syntax {
        offset: e.offset,
        message: e.message,
    })
}

pub fn format_lterm(t: &LTerm) -> String {
    t.to_string()
}

pub fn classify(t: &LTerm) -> Kind {
    if t.is_tuple() {
        Kind::TupleKind
    } else if t.is_iterm() {
        Kind::ITerm
    } else if t.is_sterm() {
        Kind::STerm
    } else {
        Kind::Other
    }
}

/// The erasure that picks the first element of every tuple.
pub fn leftmost_erase(t: &LTerm) -> Term {
    match t {
        LTerm::Var(v) => Term::Var(v.clone()),
        LTerm::Const(c) => Term::Const(*c),
        LTerm::Lab(l) => Term::Const(l.erase()),
        LTerm::App(l, r) => Term::app(leftmost_erase(l), leftmost_erase(r)),
        LTerm::Tuple(es) => leftmost_erase(&es[0]),
    }
}

/// `t ⊳ q`: every erasure of `t` is identical with `q`.
pub fn refines(t: &LTerm, q: &Term) -> bool {
    match (t, q) {
        (LTerm::Tuple(es), _) => es.iter().all(|e| refines(e, q)),
        (LTerm::Var(a), Term::Var(b)) => a == b,
        (LTerm::Const(a), Term::Const(b)) => a == b,
        (LTerm::Lab(l), Term::Const(b)) => l.erase() == *b,
        (LTerm::App(tl, tr), Term::App(ql, qr)) => refines(tl, ql) && refines(tr, qr),
        _ => false,
    }
}

pub fn is_standard(t: &LTerm, fuel: &Fuel) -> Result<bool, EngineError> {
    SEngine::new(fuel.clone()).is_standard(t)
}

pub fn is_strongly_standard(t: &LTerm, fuel: &Fuel) -> Result<bool, EngineError> {
    SEngine::new(fuel.clone()).is_strongly_standard(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;
    use std::collections::BTreeSet;

    fn l(s: &str) -> LTerm {
        parse_lterm(s).unwrap()
    }

    fn q(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    /// Every erasure, by brute-force enumeration of tuple choices.
    fn all_erasures(t: &LTerm) -> BTreeSet<Term> {
        match t {
            LTerm::Tuple(es) => es.iter().flat_map(all_erasures).collect(),
            LTerm::App(a, b) => {
                let (xs, ys) = (all_erasures(a), all_erasures(b));
                let mut out = BTreeSet::new();
                for x in &xs {
                    for y in &ys {
                        out.insert(Term::app(x.clone(), y.clone()));
                    }
                }
                out
            }
            other => [leftmost_erase(other)].into_iter().collect(),
        }
    }

    #[test]
    fn parse_and_format_labelled() {
        for s in [
            "C1 T1 a b",
            "S^{1,1} K1 K <a,a>",
            "S^{2,1,3} x <a,b> <c,d,e,f,g,h>",
            "K1 (S a b c) d",
            "<K a,b c>",
        ] {
            assert_eq!(l(s).to_string(), s);
        }
        assert_eq!(l("<a>"), l("a"));
        assert!(parse_lterm("S^{1} a").is_err());
        assert!(parse_lterm("S^{0,1} a").is_err());
        assert!(parse_lterm("C3").is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&l("K x y")), Kind::ITerm);
        assert_eq!(classify(&l("C1 T1 a b")), Kind::STerm);
        assert_eq!(classify(&l("<a,b>")), Kind::TupleKind);
        assert_eq!(classify(&l("<a,b> c")), Kind::Other);
        assert_eq!(classify(&l("K (C1 T1) a")), Kind::Other);
    }

    #[test]
    fn erasures() {
        assert_eq!(leftmost_erase(&l("F1")), q("F"));
        assert_eq!(leftmost_erase(&l("S^{1,1} K1 K <a,b>")), q("S K K a"));
        assert_eq!(leftmost_erase(&l("C2 q a a")), q("C q a a"));
    }

    #[test]
    fn refinement_matches_erasure_enumeration() {
        let cases = [
            ("F1", "F", true),
            ("<a,b>", "a", false),
            ("S^{1,1} K1 K <a,a>", "S K K a", true),
            ("<K1 <a,a> b, K a b>", "K a b", true),
            ("<K1 <a,c> b, K a b>", "K a b", false),
        ];
        for (t, qs, expect) in cases {
            let (t, qq) = (l(t), q(qs));
            let brute = all_erasures(&t);
            assert_eq!(brute.len() == 1 && brute.contains(&qq), expect, "{}", t);
            assert_eq!(refines(&t, &qq), expect, "{}", t);
        }
    }

    #[test]
    fn positions_reach_tuple_elements() {
        let t = l("S^{1,1} a b <c,d>");
        assert_eq!(t.subterm_at(&Position::from_slice(&[1, 1])).unwrap(), &l("d"));
        assert!(t.inside_tuple(&Position::from_slice(&[1, 1])));
        assert!(!t.inside_tuple(&Position::from_slice(&[1])));
        let r = t.replace_at(&Position::from_slice(&[1, 0]), l("K x")).unwrap();
        assert_eq!(r.to_string(), "S^{1,1} a b <K x,d>");
    }

    #[test]
    fn label_count() {
        assert_eq!(l("C1 T1 F1 (K a)").label_count(), 3);
        assert_eq!(l("S^{1,1} K1 K <a,F1>").label_count(), 3);
    }
}
