//! ```text
//! rterm ::= ("\" | "λ") ident "." rterm | "(" rterm ")" bag { bag } | ident
//! bag   ::= "1" | "[" rterm { "," rterm } "]"
//! ```
//!
//! Repeated bags nest on the left: `(s)[a][b]` is `((s)[a])[b]`.

use thiserror::Error;

use super::{Bag, RTerm};
use crate::lambda::parse::{is_ident_char, is_ident_start};
use crate::lambda::{Hint, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct RParseError {
    pub offset: usize,
    pub message: String,
}

pub fn parse_rterm(text: &str) -> Result<RTerm, RParseError> {
    let mut p = Parser::new(text);
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_bag(text: &str) -> Result<Bag, RParseError> {
    let mut p = Parser::new(text);
    let b = p.bag()?.ok_or_else(|| p.error("expected a bag"))?;
    p.finish()?;
    Ok(b)
}

struct Parser {
    chars: Vec<(usize, char)>,
    at: usize,
    len: usize,
    scope: Vec<String>,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.char_indices().collect(),
            at: 0,
            len: text.len(),
            scope: Vec::new(),
        }
    }

    fn error(&self, message: &str) -> RParseError {
        let offset = self.chars.get(self.at).map_or(self.len, |(o, _)| *o);
        RParseError {
            offset,
            message: message.to_string(),
        }
    }

    fn finish(&mut self) -> Result<(), RParseError> {
        if self.peek().is_some() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(())
    }

    fn peek(&mut self) -> Option<char> {
        while self
            .chars
            .get(self.at)
            .is_some_and(|(_, c)| c.is_whitespace())
        {
            self.at += 1;
        }
        self.chars.get(self.at).map(|(_, c)| *c)
    }

    fn expect(&mut self, c: char) -> Result<(), RParseError> {
        if self.peek() == Some(c) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, RParseError> {
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

    fn term(&mut self) -> Result<RTerm, RParseError> {
        match self.peek() {
            Some('\\') | Some('λ') => {
                self.at += 1;
                let name = self.ident()?;
                self.expect('.')?;
                self.scope.push(name.clone());
                let body = self.term();
                self.scope.pop();
                Ok(RTerm::Abs(Hint(name), Box::new(body?)))
            }
            Some('(') => {
                self.at += 1;
                let mut head = self.term()?;
                self.expect(')')?;
                let mut any = false;
                while let Some(bag) = self.bag()? {
                    head = RTerm::app(head, bag);
                    any = true;
                }
                if !any {
                    return Err(self.error("expected a bag after `)`"));
                }
                Ok(head)
            }
            _ => {
                let name = self.ident()?;
                Ok(match self.scope.iter().rev().position(|n| *n == name) {
                    Some(i) => RTerm::Var(Var::Bound(i)),
                    None => RTerm::Var(Var::Free(name)),
                })
            }
        }
    }

    fn bag(&mut self) -> Result<Option<Bag>, RParseError> {
        match self.peek() {
            Some('1') => {
                self.at += 1;
                Ok(Some(Bag::empty()))
            }
            Some('[') => {
                self.at += 1;
                let mut elems = vec![self.term()?];
                while self.peek() == Some(',') {
                    self.at += 1;
                    elems.push(self.term()?);
                }
                self.expect(']')?;
                Ok(Some(Bag::new(elems)))
            }
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let t = parse_rterm("(\\x.(x)[x])[y,y]").unwrap();
        assert!(t.is_redex());
        assert_eq!(
            parse_rterm("(x)1").unwrap(),
            RTerm::app(RTerm::var("x"), Bag::empty())
        );
        assert_eq!(
            parse_rterm("(f)[a][b]").unwrap(),
            RTerm::app(
                RTerm::app(RTerm::var("f"), Bag::new(vec![RTerm::var("a")])),
                Bag::new(vec![RTerm::var("b")])
            )
        );
        assert_eq!(parse_rterm("λx.x").unwrap(), parse_rterm("\\z.z").unwrap());
    }

    #[test]
    fn errors() {
        assert!(parse_rterm("(x)").is_err());
        assert!(parse_rterm("(x)[").is_err());
        assert!(parse_rterm("(x)[]").is_err());
        assert!(parse_rterm("x y").is_err());
    }
}
