//! Unlabelled first-order terms over the constants `C`, `T`, `F`, `K`, `S`.
//!
//! Application is binary and associates to the left, so `S x y z` is
//! `((S x) y) z`. Positions address nodes by a path of child indices, where
//! `0` is the function part of an application and `1` the argument.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Const {
    C,
    T,
    F,
    K,
    S,
}

impl Const {
    pub const ALL: [Const; 5] = [Const::C, Const::T, Const::F, Const::K, Const::S];

    pub fn symbol(self) -> &'static str {
        match self {
            Const::C => "C",
            Const::T => "T",
            Const::F => "F",
            Const::K => "K",
            Const::S => "S",
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Arc<str>),
    Const(Const),
    App(Arc<Term>, Arc<Term>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("position {0} does not address a node")]
    InvalidPosition(Position),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn app(left: Term, right: Term) -> Term {
        Term::App(Arc::new(left), Arc::new(right))
    }

    /// Left-nested application of `head` to `args`.
    pub fn apply<I: IntoIterator<Item = Term>>(head: Term, args: I) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn parse(text: &str) -> Result<Term, TermError> {
        parse_term(text)
    }

    pub fn is_const(&self, c: Const) -> bool {
        matches!(self, Term::Const(d) if *d == c)
    }

    /// Number of nodes: leaves count one, applications one plus their children.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Number of leaves (constants and variables).
    pub fn leaves(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(l, r) => l.leaves() + r.leaves(),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(l, r) => l.is_closed() && r.is_closed(),
        }
    }

    /// Splits the application spine into its head and arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(l, r) = cur {
            args.push(&**r);
            cur = l;
        }
        args.reverse();
        (cur, args)
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::App(l, r) => vec![l, r],
            _ => Vec::new(),
        }
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in pos.as_slice() {
            cur = match (cur, i) {
                (Term::App(l, _), 0) => l,
                (Term::App(_, r), 1) => r,
                _ => return Err(TermError::InvalidPosition(pos.clone())),
            };
        }
        Ok(cur)
    }

    pub fn replace_at(&self, pos: &Position, with: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[usize], with: Term, full: &Position) -> Result<Term, TermError> {
            match path.split_first() {
                None => Ok(with),
                Some((&i, rest)) => match (t, i) {
                    (Term::App(l, r), 0) => {
                        Ok(Term::App(Arc::new(go(l, rest, with, full)?), r.clone()))
                    }
                    (Term::App(l, r), 1) => {
                        Ok(Term::App(l.clone(), Arc::new(go(r, rest, with, full)?)))
                    }
                    _ => Err(TermError::InvalidPosition(full.clone())),
                },
            }
        }
        go(self, pos.as_slice(), with, pos)
    }

    /// All positions in pre-order (root first, then left before right).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.size());
        let mut stack = vec![(self, Position::root())];
        while let Some((t, p)) = stack.pop() {
            if let Term::App(l, r) = t {
                stack.push((r, p.child(1)));
                stack.push((l, p.child(0)));
            }
            out.push(p);
        }
        out
    }

    pub fn subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::with_capacity(self.size());
        let mut stack = vec![(self, Position::root())];
        while let Some((t, p)) = stack.pop() {
            if let Term::App(l, r) = t {
                stack.push((r, p.child(1)));
                stack.push((l, p.child(0)));
            }
            out.push((p, t));
        }
        out
    }

    pub fn variables(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Arc<str>>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::Const(_) => {}
            Term::App(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

impl From<Const> for Term {
    fn from(c: Const) -> Term {
        Term::Const(c)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => f.write_str(c.symbol()),
            Term::App(l, r) => {
                write!(f, "{} ", l)?;
                if matches!(**r, Term::App(..)) {
                    write!(f, "({})", r)
                } else {
                    write!(f, "{}", r)
                }
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self)
    }
}

impl std::str::FromStr for Term {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Term, TermError> {
        parse_term(s)
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Term, D::Error> {
        let text = String::deserialize(d)?;
        parse_term(&text).map_err(serde::de::Error::custom)
    }
}

pub fn parse_term(text: &str) -> Result<Term, TermError> {
    let parsed = syntax::parse(text, false).map_err(|e| TermError::Syntax {
        offset: e.offset,
        message: e.message,
    })?;
    Ok(parsed
        .to_term()
        .expect("unlabelled grammar only produces unlabelled terms"))
}

pub fn format_term(t: &Term) -> String {
    t.to_string()
}

/// A path from the root: `0` selects the function part of an application
/// (or the first element of a tuple), `1` the argument, and so on.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn from_slice(path: &[usize]) -> Position {
        Position(path.to_vec())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_root()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn join(&self, rel: &Position) -> Position {
        let mut p = self.0.clone();
        p.extend_from_slice(&rel.0);
        Position(p)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// The remainder of `other` below `self`, if `self` is a prefix of it.
    pub fn strip_from(&self, other: &Position) -> Option<Position> {
        other
            .0
            .strip_prefix(self.0.as_slice())
            .map(|rest| Position(rest.to_vec()))
    }

    pub fn disjoint(&self, other: &Position) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Position {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Substitution {
    bindings: BTreeMap<Arc<str>, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn bind(&mut self, var: &str, t: Term) {
        self.bindings.insert(Arc::from(var), t);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.bindings.iter().map(|(k, v)| (&**k, v))
    }

    pub fn apply(&self, t: &Term) -> Term {
        apply_subst(self, t)
    }
}

impl<'a> FromIterator<(&'a str, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (&'a str, Term)>>(iter: I) -> Substitution {
        let mut s = Substitution::new();
        for (k, v) in iter {
            s.bind(k, v);
        }
        s
    }
}

pub fn apply_subst(sigma: &Substitution, t: &Term) -> Term {
    match t {
        Term::Var(v) => sigma.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::App(l, r) => Term::app(apply_subst(sigma, l), apply_subst(sigma, r)),
    }
}

/// Matches `pattern` against `subject`. Repeated pattern variables must bind
/// to identical subterms; variables in the subject are inert.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    if match_into(pattern, subject, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => match sigma.bindings.get(v) {
            Some(bound) => bound == subject,
            None => {
                sigma.bindings.insert(v.clone(), subject.clone());
                true
            }
        },
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(pl, pr), Term::App(sl, sr)) => {
            match_into(pl, sl, sigma) && match_into(pr, sr, sigma)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn parse_left_associates() {
        assert_eq!(
            t("K x y"),
            Term::app(Term::app(Const::K.into(), Term::var("x")), Term::var("y"))
        );
        assert_eq!(
            t("S x y z"),
            Term::apply(
                Const::S.into(),
                [Term::var("x"), Term::var("y"), Term::var("z")]
            )
        );
        assert_eq!(
            t("C (K F) T"),
            Term::apply(
                Const::C.into(),
                [Term::app(Const::K.into(), Const::F.into()), Const::T.into()]
            )
        );
    }

    #[test]
    fn format_uses_minimal_parentheses() {
        assert_eq!(t("((K x) y)").to_string(), "K x y");
        assert_eq!(t("K (x y)").to_string(), "K (x y)");
        assert_eq!(Term::Const(Const::F).to_string(), "F");
    }

    #[test]
    fn syntax_errors_report_offsets() {
        match parse_term("K (x y") {
            Err(TermError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("unexpected {:?}", other),
        }
        match parse_term("K x )") {
            Err(TermError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {:?}", other),
        }
        assert!(parse_term("").is_err());
        assert!(parse_term("K1 x").is_err());
        assert!(parse_term("<a,b>").is_err());
    }

    #[test]
    fn nonlinear_matching() {
        let s = match_pattern(&t("C z x x"), &t("C T (K a b) (K a b)")).unwrap();
        assert_eq!(s.get("z"), Some(&t("T")));
        assert_eq!(s.get("x"), Some(&t("K a b")));
        assert!(match_pattern(&t("C z x x"), &t("C T a b")).is_none());
        let s = match_pattern(&t("K x y"), &t("K F T")).unwrap();
        assert_eq!(s.get("x"), Some(&t("F")));
        assert_eq!(s.get("y"), Some(&t("T")));
    }

    #[test]
    fn positions_and_replacement() {
        let k = t("K x y");
        assert_eq!(k.subterm_at(&Position::from_slice(&[0, 1])).unwrap(), &t("x"));
        assert_eq!(
            k.replace_at(&Position::from_slice(&[1]), t("F")).unwrap(),
            t("K x F")
        );
        assert!(k.subterm_at(&Position::from_slice(&[1, 0])).is_err());
        assert!(k.replace_at(&Position::from_slice(&[0, 0, 0]), t("F")).is_err());
        let sigma: Substitution = [("x", t("F"))].into_iter().collect();
        assert_eq!(apply_subst(&sigma, &t("K x x")), t("K F F"));
    }

    #[test]
    fn size_counts_nodes() {
        assert_eq!(t("F").size(), 1);
        assert_eq!(t("K x y").size(), 5);
        assert_eq!(t("K x y").leaves(), 3);
    }
}
