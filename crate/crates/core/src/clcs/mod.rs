//! The labelled system CLC_s: significant, insignificant and auxiliary steps.

mod engine;

pub use engine::{AShape, SGraph, SRedex, SRedexScan, SEngine};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::labelled::LTerm;
use crate::systems::Dir;
use crate::term::{Position, TermError};

/// The significant reduction rules, numbered as listed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SRule {
    C1T1 = 1,
    C1F1 = 2,
    C2Eq = 3,
    C2T = 4,
    C2F = 5,
    C2T1 = 6,
    C2F1 = 7,
    K1 = 8,
    S = 9,
}

impl SRule {
    pub const ALL: [SRule; 9] = [
        SRule::C1T1,
        SRule::C1F1,
        SRule::C2Eq,
        SRule::C2T,
        SRule::C2F,
        SRule::C2T1,
        SRule::C2F1,
        SRule::K1,
        SRule::S,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<SRule> {
        SRule::ALL.get((id as usize).wrapping_sub(1)).copied()
    }

    pub fn is_conditional(self) -> bool {
        matches!(self, SRule::C2Eq | SRule::S)
    }

    /// The CLC rule a step by this rule erases to.
    pub fn erased_rule(self) -> u8 {
        match self {
            SRule::C1T1 | SRule::C2T | SRule::C2T1 => 1,
            SRule::C1F1 | SRule::C2F | SRule::C2F1 => 2,
            SRule::C2Eq => 3,
            SRule::K1 => 4,
            SRule::S => 5,
        }
    }

    /// Argument count of a redex by this rule.
    pub fn arity(self) -> usize {
        match self {
            SRule::K1 => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for SRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SRule::C1T1 => "C1 T1 x y -> x",
            SRule::C1F1 => "C1 F1 x y -> y",
            SRule::C2Eq => "C2 z x y -> x <= |x| =_CLC |y|",
            SRule::C2T => "C2 T x y -> x",
            SRule::C2F => "C2 F x y -> y",
            SRule::C2T1 => "C2 T1 x y -> x",
            SRule::C2F1 => "C2 F1 x y -> y",
            SRule::K1 => "K1 x y -> x",
            SRule::S => "S^{n} x <y1..yk> <z0..zk> -> x <z0> <y1 <z1>,...,yk <zk>> <= phi",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    #[serde(rename = "s")]
    S,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "a")]
    A,
}

/// One labelled step. `rule` is an [`SRule`] id for kind S, a CLC rule id
/// for kind I, and an a-redex shape id (see [`AShape::id`]) for kind A.
/// Backward steps are expansions: the step contracts `to` into the
/// previous term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LStep {
    pub dir: Dir,
    pub kind: StepKind,
    pub position: Position,
    pub rule: u8,
    pub level: u32,
    pub to: LTerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LTrace {
    pub start: LTerm,
    pub steps: Vec<LStep>,
}

impl LTrace {
    pub fn empty(start: LTerm) -> LTrace {
        LTrace {
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> &LTerm {
        self.steps.last().map(|s| &s.to).unwrap_or(&self.start)
    }

    pub fn push(&mut self, step: LStep) {
        self.steps.push(step);
    }

    pub fn terms(&self) -> Vec<LTerm> {
        std::iter::once(self.start.clone())
            .chain(self.steps.iter().map(|s| s.to.clone()))
            .collect()
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.steps.iter().filter(|s| s.kind == kind).count()
    }

    pub fn extend(&mut self, other: LTrace) {
        assert_eq!(self.end(), &other.start, "traces do not compose");
        self.steps.extend(other.steps);
    }

    /// The same steps read from the other end.
    pub fn reversed(&self) -> LTrace {
        let terms = self.terms();
        let mut out = LTrace::empty(self.end().clone());
        for (i, s) in self.steps.iter().enumerate().rev() {
            out.push(LStep {
                dir: s.dir.flip(),
                to: terms[i].clone(),
                ..s.clone()
            });
        }
        out
    }

    /// Embeds a trace of the subterm at `prefix` of `context`.
    pub fn lift(&self, context: &LTerm, prefix: &Position) -> Result<LTrace, TermError> {
        let mut out = LTrace::empty(context.replace_at(prefix, self.start.clone())?);
        for s in &self.steps {
            out.push(LStep {
                position: prefix.join(&s.position),
                to: context.replace_at(prefix, s.to.clone())?,
                ..s.clone()
            });
        }
        Ok(out)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&LHeader {
            start: self.start.clone(),
        })
        .unwrap();
        out.push('\n');
        for s in &self.steps {
            let rec = LRecord {
                dir: s.dir,
                kind: s.kind,
                sys: match s.kind {
                    StepKind::I => "CLC".into(),
                    _ => "CLCS".into(),
                },
                rule: s.rule,
                pos: s.position.as_slice().to_vec(),
                level: s.level,
                to: s.to.clone(),
            };
            out.push_str(&serde_json::to_string(&rec).unwrap());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<LTrace, crate::systems::TraceFormatError> {
        use crate::systems::TraceFormatError;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TraceFormatError::Empty)?;
        let header: LHeader = serde_json::from_str(first).map_err(|e| TraceFormatError::Line {
            line: 1,
            message: e.to_string(),
        })?;
        let mut out = LTrace::empty(header.start);
        for (i, line) in lines {
            let rec: LRecord = serde_json::from_str(line).map_err(|e| TraceFormatError::Line {
                line: i + 1,
                message: e.to_string(),
            })?;
            out.push(LStep {
                dir: rec.dir,
                kind: rec.kind,
                position: Position::from(rec.pos),
                rule: rec.rule,
                level: rec.level,
                to: rec.to,
            });
        }
        Ok(out)
    }
}

impl fmt::Display for LTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for s in &self.steps {
            let kind = match s.kind {
                StepKind::S => "s",
                StepKind::I => "i",
                StepKind::A => "a",
            };
            match s.dir {
                Dir::Forward => write!(f, " ->{} {}", kind, s.to)?,
                Dir::Backward => write!(f, " <-{} {}", kind, s.to)?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct LHeader {
    start: LTerm,
}

#[derive(Serialize, Deserialize)]
struct LRecord {
    dir: Dir,
    kind: StepKind,
    sys: String,
    rule: u8,
    pos: Vec<usize>,
    level: u32,
    to: LTerm,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("a condition at {position} is undecided within the fuel")]
    ConditionUnknown { position: Position },
    #[error("no {kind} redex for rule {rule} at {position}")]
    NotARedex {
        kind: &'static str,
        rule: u8,
        position: Position,
    },
    #[error("s-reduct graph exceeds {0} nodes")]
    GraphTooLarge(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("reachability check failed: {0}")]
    Reachability(String),
    #[error("no case applies: {0}")]
    Stuck(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("replay failed at step {index}: {message}")]
    Replay { index: usize, message: String },
    #[error(transparent)]
    Term(#[from] TermError),
}

impl EngineError {
    /// Fuel exhaustion rather than a logical failure.
    pub fn is_fuel(&self) -> bool {
        matches!(
            self,
            EngineError::ConditionUnknown { .. }
                | EngineError::GraphTooLarge(_)
                | EngineError::SearchExhausted(_)
        )
    }
}
