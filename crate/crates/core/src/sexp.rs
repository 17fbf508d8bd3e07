//! Minimal s-expression reader with source positions, shared by the term
//! parser and the problem-file loader.
//!
//! Atoms are whitespace/paren-delimited tokens; `;` starts a line comment.
//! Symbols are case-sensitive and kept verbatim (no upcasing).

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::List(items, _) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SexpError {
    #[error("{pos}: unbalanced `)`")]
    UnexpectedClose { pos: Pos },
    #[error("{pos}: unclosed `(`")]
    UnclosedOpen { pos: Pos },
}

struct Reader<'a> {
    src: &'a str,
    bytes: &'a [u8],
    i: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader {
            src,
            bytes: src.as_bytes(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.bytes[self.i];
        self.i += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn skip_trivia(&mut self) {
        while self.i < self.bytes.len() {
            match self.bytes[self.i] {
                b';' => {
                    while self.i < self.bytes.len() && self.bytes[self.i] != b'\n' {
                        self.bump();
                    }
                }
                b if b.is_ascii_whitespace() => {
                    self.bump();
                }
                _ => break,
            }
        }
    }

    fn read_one(&mut self) -> Result<Option<Sexp>, SexpError> {
        self.skip_trivia();
        if self.i >= self.bytes.len() {
            return Ok(None);
        }
        let pos = self.pos();
        match self.bytes[self.i] {
            b'(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    if self.i >= self.bytes.len() {
                        return Err(SexpError::UnclosedOpen { pos });
                    }
                    if self.bytes[self.i] == b')' {
                        self.bump();
                        return Ok(Some(Sexp::List(items, pos)));
                    }
                    match self.read_one()? {
                        Some(s) => items.push(s),
                        None => return Err(SexpError::UnclosedOpen { pos }),
                    }
                }
            }
            b')' => Err(SexpError::UnexpectedClose { pos }),
            _ => {
                let start = self.i;
                while self.i < self.bytes.len() {
                    let b = self.bytes[self.i];
                    if b.is_ascii_whitespace() || b == b'(' || b == b')' || b == b';' {
                        break;
                    }
                    self.bump();
                }
                Ok(Some(Sexp::Atom(self.src[start..self.i].to_string(), pos)))
            }
        }
    }
}

/// Read every top-level form in `src`.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    while let Some(s) = r.read_one()? {
        out.push(s);
    }
    Ok(out)
}

/// Read exactly one form; trailing content is an error reported as unbalance.
pub fn read_one(src: &str) -> Result<Sexp, SexpError> {
    let forms = read_all(src)?;
    match forms.len() {
        1 => Ok(forms.into_iter().next().unwrap()),
        0 => Err(SexpError::UnclosedOpen {
            pos: Pos { line: 1, col: 1 },
        }),
        _ => Err(SexpError::UnexpectedClose {
            pos: forms[1].pos(),
        }),
    }
}
