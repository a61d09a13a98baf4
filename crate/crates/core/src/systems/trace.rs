use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::rules::SystemId;
use crate::term::{Position, Term, TermError};

/// One contraction: which rule of which system fired where, and at what level.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub system: SystemId,
    pub rule: u8,
    pub position: Position,
    pub level: u32,
}

impl Step {
    pub fn new(system: SystemId, rule: u8, position: Position, level: u32) -> Step {
        Step {
            system,
            rule,
            position,
            level,
        }
    }

    pub fn under(&self, prefix: &Position) -> Step {
        Step {
            position: prefix.join(&self.position),
            ..self.clone()
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} rule {} at {} (level {})",
            self.system, self.rule, self.position, self.level
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    #[serde(rename = "+")]
    Forward,
    #[serde(rename = "-")]
    Backward,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Forward => Dir::Backward,
            Dir::Backward => Dir::Forward,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub step: Step,
    /// The term after this step.
    pub to: Term,
}

/// A forward reduction sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start: Term,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn empty(start: Term) -> Trace {
        Trace {
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

    pub fn end(&self) -> &Term {
        self.steps.last().map(|s| &s.to).unwrap_or(&self.start)
    }

    pub fn push(&mut self, step: Step, to: Term) {
        self.steps.push(TraceStep { step, to });
    }

    /// Largest step level; zero for the empty trace.
    pub fn level(&self) -> u32 {
        self.steps.iter().map(|s| s.step.level).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.to))
    }

    /// Embeds a trace of a subterm at `prefix` inside `context`.
    pub fn lift(&self, context: &Term, prefix: &Position) -> Result<Trace, TermError> {
        let mut out = Trace::empty(context.replace_at(prefix, self.start.clone())?);
        for s in &self.steps {
            let to = context.replace_at(prefix, s.to.clone())?;
            out.push(s.step.under(prefix), to);
        }
        Ok(out)
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn extend(&mut self, other: Trace) {
        assert_eq!(self.end(), &other.start, "traces do not compose");
        self.steps.extend(other.steps);
    }

    pub fn to_conversion(&self) -> ConversionSequence {
        ConversionSequence {
            start: self.start.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| ConvStep {
                    dir: Dir::Forward,
                    step: s.step.clone(),
                    to: s.to.clone(),
                })
                .collect(),
        }
    }

    pub fn to_jsonl(&self) -> String {
        self.to_conversion().to_jsonl()
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, TraceFormatError> {
        let conv = ConversionSequence::from_jsonl(text)?;
        if let Some(i) = conv.steps.iter().position(|s| s.dir == Dir::Backward) {
            return Err(TraceFormatError::Line {
                line: i + 2,
                message: "reduction traces cannot contain backward steps".into(),
            });
        }
        Ok(Trace {
            start: conv.start,
            steps: conv
                .steps
                .into_iter()
                .map(|s| TraceStep { step: s.step, to: s.to })
                .collect(),
        })
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for s in &self.steps {
            write!(f, " -> {}", s.to)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvStep {
    pub dir: Dir,
    /// For a forward step, the contraction from the previous term to `to`;
    /// for a backward step, the contraction from `to` to the previous term.
    pub step: Step,
    pub to: Term,
}

/// A sequence of contractions and expansions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConversionSequence {
    pub start: Term,
    pub steps: Vec<ConvStep>,
}

impl ConversionSequence {
    pub fn empty(start: Term) -> ConversionSequence {
        ConversionSequence {
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

    pub fn end(&self) -> &Term {
        self.steps.last().map(|s| &s.to).unwrap_or(&self.start)
    }

    pub fn level(&self) -> u32 {
        self.steps.iter().map(|s| s.step.level).max().unwrap_or(0)
    }

    pub fn push(&mut self, dir: Dir, step: Step, to: Term) {
        self.steps.push(ConvStep { dir, step, to });
    }

    /// The terms visited, starting with `start`.
    pub fn terms(&self) -> Vec<Term> {
        std::iter::once(self.start.clone())
            .chain(self.steps.iter().map(|s| s.to.clone()))
            .collect()
    }

    /// The same conversion read from the other end.
    pub fn reversed(&self) -> ConversionSequence {
        let terms = self.terms();
        let mut out = ConversionSequence::empty(self.end().clone());
        for (i, s) in self.steps.iter().enumerate().rev() {
            out.push(s.dir.flip(), s.step.clone(), terms[i].clone());
        }
        out
    }

    pub fn extend(&mut self, other: ConversionSequence) {
        assert_eq!(self.end(), &other.start, "conversions do not compose");
        self.steps.extend(other.steps);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&Header {
            start: self.start.clone(),
        })
        .unwrap();
        out.push('\n');
        for s in &self.steps {
            let rec = StepRecord {
                dir: s.dir,
                sys: s.step.system,
                rule: s.step.rule,
                pos: s.step.position.as_slice().to_vec(),
                level: s.step.level,
                to: s.to.clone(),
            };
            out.push_str(&serde_json::to_string(&rec).unwrap());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<ConversionSequence, TraceFormatError> {
        let mut lines = text
            .as_bytes()
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (_, first) = lines.next().ok_or(TraceFormatError::Empty)?;
        let first = first.map_err(|e| TraceFormatError::Line {
            line: 1,
            message: e.to_string(),
        })?;
        let header: Header = serde_json::from_str(&first).map_err(|e| TraceFormatError::Line {
            line: 1,
            message: e.to_string(),
        })?;
        let mut conv = ConversionSequence::empty(header.start);
        for (i, line) in lines {
            let line = line.map_err(|e| TraceFormatError::Line {
                line: i + 1,
                message: e.to_string(),
            })?;
            let rec: StepRecord =
                serde_json::from_str(&line).map_err(|e| TraceFormatError::Line {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            conv.push(
                rec.dir,
                Step::new(rec.sys, rec.rule, Position::from(rec.pos), rec.level),
                rec.to,
            );
        }
        Ok(conv)
    }
}

impl fmt::Display for ConversionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for s in &self.steps {
            let arrow = match s.dir {
                Dir::Forward => "->",
                Dir::Backward => "<-",
            };
            write!(f, " {} {}", arrow, s.to)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    start: Term,
}

#[derive(Serialize, Deserialize)]
struct StepRecord {
    dir: Dir,
    sys: SystemId,
    rule: u8,
    pos: Vec<usize>,
    level: u32,
    to: Term,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceFormatError {
    #[error("empty trace input")]
    Empty,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn jsonl_layout() {
        let mut c = ConversionSequence::empty(parse_term("F").unwrap());
        c.push(
            Dir::Backward,
            Step::new(SystemId::Clc0, 4, Position::root(), 0),
            parse_term("K F T").unwrap(),
        );
        let text = c.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"start":"F"}"#);
        assert_eq!(
            lines[1],
            r#"{"dir":"-","sys":"CLC0","rule":4,"pos":[],"level":0,"to":"K F T"}"#
        );
        assert_eq!(ConversionSequence::from_jsonl(&text).unwrap(), c);
        assert!(Trace::from_jsonl(&text).is_err());
    }

    #[test]
    fn reversal_flips_directions() {
        let mut c = ConversionSequence::empty(parse_term("K F T").unwrap());
        c.push(
            Dir::Forward,
            Step::new(SystemId::Clc0, 4, Position::root(), 0),
            parse_term("F").unwrap(),
        );
        let r = c.reversed();
        assert_eq!(r.start, parse_term("F").unwrap());
        assert_eq!(r.steps[0].dir, Dir::Backward);
        assert_eq!(r.end(), &parse_term("K F T").unwrap());
        assert_eq!(r.reversed(), c);
    }
}
