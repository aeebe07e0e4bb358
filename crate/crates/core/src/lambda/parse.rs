//! Parser for Krivine-style λ-term syntax.
//!
//! ```text
//! term   ::= lam | app
//! lam    ::= ("\" | "λ") ident "." term
//! app    ::= head { simple } [ tail ]
//! head   ::= simple | "(" term ")"
//! simple ::= ident | "_|_"
//! tail   ::= lam | "(" term ")" { simple } [ tail ]
//! ```
//!
//! `(M)N1 N2` nests on the left; an argument starting with a parenthesis
//! opens a nested application that extends to the end, so `(M1)(M2)N` nests
//! on the right.

use thiserror::Error;

use super::{Hint, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        at: 0,
        len: text.len(),
        scope: Vec::new(),
    };
    let t = p.term()?;
    p.skip_ws();
    if p.at < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() && c != 'λ'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    (c.is_alphanumeric() && c != 'λ') || c == '_' || c == '\''
}

struct Parser {
    chars: Vec<(usize, char)>,
    at: usize,
    len: usize,
    scope: Vec<String>,
}

impl Parser {
    fn offset(&self) -> usize {
        self.chars.get(self.at).map_or(self.len, |(o, _)| *o)
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self
            .chars
            .get(self.at)
            .is_some_and(|(_, c)| c.is_whitespace())
        {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.at).map(|(_, c)| *c)
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn at_bottom(&mut self) -> bool {
        self.peek() == Some('_')
            && self.chars.get(self.at + 1).map(|x| x.1) == Some('|')
            && self.chars.get(self.at + 2).map(|x| x.1) == Some('_')
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if is_ident_start(c) => {
                let start = self.at;
                while self
                    .chars
                    .get(self.at)
                    .is_some_and(|(_, c)| is_ident_char(*c))
                {
                    self.at += 1;
                }
                Ok(self.chars[start..self.at].iter().map(|(_, c)| c).collect())
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn lookup(&self, name: String) -> Term {
        match self.scope.iter().rev().position(|n| *n == name) {
            Some(i) => Term::Var(Var::Bound(i)),
            None => Term::Var(Var::Free(name)),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some('\\') | Some('λ') => self.lam(),
            _ => self.app(),
        }
    }

    fn lam(&mut self) -> Result<Term, ParseError> {
        self.at += 1;
        let name = self.ident()?;
        self.expect('.')?;
        self.scope.push(name.clone());
        let body = self.term();
        self.scope.pop();
        Ok(Term::Abs(Hint(name), Box::new(body?)))
    }

    fn simple(&mut self) -> Result<Option<Term>, ParseError> {
        if self.at_bottom() {
            self.at += 3;
            return Ok(Some(Term::Bottom));
        }
        match self.peek() {
            Some(c) if is_ident_start(c) => {
                let name = self.ident()?;
                Ok(Some(self.lookup(name)))
            }
            _ => Ok(None),
        }
    }

    fn parenthesized(&mut self) -> Result<Term, ParseError> {
        self.expect('(')?;
        let t = self.term()?;
        self.expect(')')?;
        Ok(t)
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let head = match self.simple()? {
            Some(t) => t,
            None if self.peek() == Some('(') => self.parenthesized()?,
            None => return Err(self.error("expected a term")),
        };
        self.args(head)
    }

    fn args(&mut self, mut acc: Term) -> Result<Term, ParseError> {
        loop {
            if let Some(arg) = self.simple()? {
                acc = Term::app(acc, arg);
                continue;
            }
            return match self.peek() {
                Some('\\') | Some('λ') => Ok(Term::app(acc, self.lam()?)),
                Some('(') => {
                    let head = self.parenthesized()?;
                    let tail = self.args(head)?;
                    Ok(Term::app(acc, tail))
                }
                _ => Ok(acc),
            };
        }
    }
}
