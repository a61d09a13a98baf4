//! Shared lexer and recursive-descent parser for plain and labelled terms.
//!
//! Grammar (juxtaposition is left-associative application):
//!
//! ```text
//! term  := atom atom*
//! atom  := var | const | labconst | '(' term ')' | '<' term (',' term)* '>'
//! var   := [a-z][A-Za-z0-9_']*
//! const := C | T | F | K | S
//! labconst := C1 | C2 | T1 | F1 | K1 | S^{n0,...,nk}
//! ```

use std::sync::Arc;

use crate::labelled::{LabConst, LTerm};
use crate::term::Const;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(String),
    Const(Const),
    Lab(LabConst),
    LParen,
    RParen,
    LAngle,
    RAngle,
    Comma,
}

fn lex(text: &str, allow_labels: bool) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'<' | b'>' | b',' if !allow_labels => {
                return err(start, "tuples are not part of the unlabelled grammar")
            }
            b'<' => out.push((start, Tok::LAngle)),
            b'>' => out.push((start, Tok::RAngle)),
            b',' => out.push((start, Tok::Comma)),
            b'a'..=b'z' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric()
                        || bytes[i + 1] == b'_'
                        || bytes[i + 1] == b'\'')
                {
                    i += 1;
                }
                out.push((start, Tok::Var(text[start..=i].to_string())));
            }
            b'A'..=b'Z' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &text[start..=i];
                let tok = match word {
                    "C" => Tok::Const(Const::C),
                    "T" => Tok::Const(Const::T),
                    "F" => Tok::Const(Const::F),
                    "K" => Tok::Const(Const::K),
                    "S" if bytes.get(i + 1) == Some(&b'^') => {
                        if !allow_labels {
                            return err(start, "labelled constants are not allowed here");
                        }
                        let (counts, end) = lex_superscript(text, i + 1)?;
                        i = end;
                        Tok::Lab(LabConst::S(counts.into()))
                    }
                    "S" => Tok::Const(Const::S),
                    "C1" | "C2" | "T1" | "F1" | "K1" => {
                        if !allow_labels {
                            return err(start, "labelled constants are not allowed here");
                        }
                        Tok::Lab(match word {
                            "C1" => LabConst::C1,
                            "C2" => LabConst::C2,
                            "T1" => LabConst::T1,
                            "F1" => LabConst::F1,
                            _ => LabConst::K1,
                        })
                    }
                    _ => return err(start, format!("unknown constant `{}`", word)),
                };
                out.push((start, tok));
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return err(start, format!("unexpected character `{}`", ch));
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Parses `^{n0,...,nk}` starting at the caret; returns the counts and the
/// index of the closing brace.
fn lex_superscript(text: &str, caret: usize) -> Result<(Vec<u32>, usize), SyntaxError> {
    let bytes = text.as_bytes();
    if bytes.get(caret + 1) != Some(&b'{') {
        return err(caret, "expected `{` after `S^`");
    }
    let close = match text[caret..].find('}') {
        Some(off) => caret + off,
        None => return err(caret, "unterminated superscript"),
    };
    let body = &text[caret + 2..close];
    let mut counts = Vec::new();
    for part in body.split(',') {
        match part.trim().parse::<u32>() {
            Ok(n) if n >= 1 => counts.push(n),
            _ => return err(caret + 2, format!("bad superscript entry `{}`", part.trim())),
        }
    }
    if counts.len() < 2 {
        return err(caret, "S superscript needs at least two entries");
    }
    Ok((counts, close))
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn term(&mut self) -> Result<LTerm, SyntaxError> {
        let mut acc = match self.atom()? {
            Some(a) => a,
            None => return err(self.offset(), "expected a term"),
        };
        while let Some(arg) = self.atom()? {
            acc = LTerm::app(acc, arg);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Option<LTerm>, SyntaxError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Ok(None),
        };
        let atom = match tok {
            Tok::Var(v) => {
                self.pos += 1;
                LTerm::Var(Arc::from(v.as_str()))
            }
            Tok::Const(c) => {
                self.pos += 1;
                LTerm::Const(c)
            }
            Tok::Lab(l) => {
                self.pos += 1;
                LTerm::Lab(l)
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.term()?;
                if self.peek() != Some(&Tok::RParen) {
                    return err(self.offset(), "expected `)`");
                }
                self.pos += 1;
                inner
            }
            Tok::LAngle => {
                self.pos += 1;
                let mut elems = vec![self.term()?];
                loop {
                    match self.peek() {
                        Some(Tok::Comma) => {
                            self.pos += 1;
                            elems.push(self.term()?);
                        }
                        Some(Tok::RAngle) => {
                            self.pos += 1;
                            break;
                        }
                        _ => return err(self.offset(), "expected `,` or `>`"),
                    }
                }
                LTerm::group(elems)
            }
            Tok::RParen | Tok::RAngle | Tok::Comma => return Ok(None),
        };
        Ok(Some(atom))
    }
}

pub fn parse(text: &str, allow_labels: bool) -> Result<LTerm, SyntaxError> {
    let toks = lex(text, allow_labels)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return err(p.offset(), "unexpected token");
    }
    Ok(t)
}
