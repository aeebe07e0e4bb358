//! Finite λ-terms in locally-nameless form, positions, and substitution.
//!
//! Bound variables are de Bruijn indices and free variables keep their names,
//! so α-equivalent terms are structurally equal. Binders carry a [`Hint`]
//! that only matters when printing.

pub(crate) mod parse;
pub(crate) mod print;
mod regular;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

pub use parse::{parse_term, ParseError};
pub use print::print_term;
pub use regular::{RegularSystem, SystemError};

/// Surface name of a binder. Ignored by equality, ordering and hashing.
#[derive(Clone, Default)]
pub struct Hint(pub String);

impl Hint {
    pub fn new(name: impl Into<String>) -> Self {
        Hint(name.into())
    }
}

impl fmt::Debug for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq for Hint {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Hint {}
impl PartialOrd for Hint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Hint {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}
impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// A variable occurrence: a de Bruijn index or a free name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Var {
    Bound(usize),
    Free(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Abs(Hint, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// Inert constant whose Taylor expansion is 0.
    Bottom,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl std::str::FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::Free(name.to_string()))
    }

    pub fn bound(index: usize) -> Term {
        Term::Var(Var::Bound(index))
    }

    /// `λname.body`, binding the free occurrences of `name` in `body`.
    pub fn lam(name: &str, body: Term) -> Term {
        Term::Abs(Hint::new(name), Box::new(body.close(name, 0)))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// `(fun) a1 … an`, nesting on the left.
    pub fn apps(fun: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    /// Replaces free occurrences of `name` by the index of a binder `depth`
    /// levels up.
    fn close(self, name: &str, depth: usize) -> Term {
        match self {
            Term::Var(Var::Free(n)) if n == name => Term::Var(Var::Bound(depth)),
            Term::Var(v) => Term::Var(v),
            Term::Abs(h, b) => Term::Abs(h, Box::new(b.close(name, depth + 1))),
            Term::App(f, a) => Term::app(f.close(name, depth), a.close(name, depth)),
            Term::Bottom => Term::Bottom,
        }
    }

    /// Adds `by` to every index at least `cutoff`.
    pub fn shift(&self, by: usize, cutoff: usize) -> Term {
        if by == 0 {
            return self.clone();
        }
        match self {
            Term::Var(Var::Bound(i)) if *i >= cutoff => Term::bound(i + by),
            Term::Var(v) => Term::Var(v.clone()),
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(b.shift(by, cutoff + 1))),
            Term::App(f, a) => Term::app(f.shift(by, cutoff), a.shift(by, cutoff)),
            Term::Bottom => Term::Bottom,
        }
    }

    /// Contracts the body of an abstraction with `arg`: `body[arg/0]`, with
    /// the remaining indices lowered by one.
    pub fn instantiate(&self, arg: &Term) -> Term {
        fn go(t: &Term, arg: &Term, depth: usize) -> Term {
            match t {
                Term::Var(Var::Bound(i)) => match (*i).cmp(&depth) {
                    std::cmp::Ordering::Equal => arg.shift(depth, 0),
                    std::cmp::Ordering::Greater => Term::bound(i - 1),
                    std::cmp::Ordering::Less => Term::bound(*i),
                },
                Term::Var(v) => Term::Var(v.clone()),
                Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(go(b, arg, depth + 1))),
                Term::App(f, a) => Term::app(go(f, arg, depth), go(a, arg, depth)),
                Term::Bottom => Term::Bottom,
            }
        }
        go(self, arg, 0)
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Term::Abs(..))
    }

    pub fn is_redex(&self) -> bool {
        matches!(self, Term::App(f, _) if f.is_abs())
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Bottom => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// Largest number of argument edges on a path from the root.
    pub fn applicative_height(&self) -> usize {
        match self {
            Term::Var(_) | Term::Bottom => 0,
            Term::Abs(_, b) => b.applicative_height(),
            Term::App(f, a) => f.applicative_height().max(1 + a.applicative_height()),
        }
    }

    pub fn contains_bottom(&self) -> bool {
        match self {
            Term::Bottom => true,
            Term::Var(_) => false,
            Term::Abs(_, b) => b.contains_bottom(),
            Term::App(f, a) => f.contains_bottom() || a.contains_bottom(),
        }
    }

    /// Splits `(h) a1 … an` into its head and arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Term> {
        let mut cur = self;
        for sel in &pos.0 {
            cur = match (sel, cur) {
                (Sel::Body, Term::Abs(_, b)) => b,
                (Sel::Fun, Term::App(f, _)) => f,
                (Sel::Arg, Term::App(_, a)) => a,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Rebuilds the term with the subterm at `pos` replaced by `f(subterm)`.
    pub fn replace_at<E>(
        &self,
        pos: &[Sel],
        f: impl FnOnce(&Term) -> Result<Term, E>,
    ) -> Option<Result<Term, E>> {
        match pos.split_first() {
            None => Some(f(self)),
            Some((sel, rest)) => match (sel, self) {
                (Sel::Body, Term::Abs(h, b)) => b
                    .replace_at(rest, f)
                    .map(|r| r.map(|nb| Term::Abs(h.clone(), Box::new(nb)))),
                (Sel::Fun, Term::App(fun, a)) => fun
                    .replace_at(rest, f)
                    .map(|r| r.map(|nf| Term::App(Box::new(nf), a.clone()))),
                (Sel::Arg, Term::App(fun, a)) => a
                    .replace_at(rest, f)
                    .map(|r| r.map(|na| Term::App(fun.clone(), Box::new(na)))),
                _ => None,
            },
        }
    }

    /// Replaces every argument subterm lying below `depth` argument edges by
    /// ⊥; arguments at depth at most `depth` are kept.
    pub fn truncate(&self, depth: usize) -> Term {
        match self {
            Term::Var(_) | Term::Bottom => self.clone(),
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(b.truncate(depth))),
            Term::App(f, a) => {
                let arg = if depth == 0 {
                    Term::Bottom
                } else {
                    a.truncate(depth - 1)
                };
                Term::app(f.truncate(depth), arg)
            }
        }
    }
}

/// Free variable names of a term.
pub fn free_vars(t: &Term) -> BTreeSet<String> {
    fn go(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(Var::Free(n)) => {
                out.insert(n.clone());
            }
            Term::Var(Var::Bound(_)) | Term::Bottom => {}
            Term::Abs(_, b) => go(b, out),
            Term::App(f, a) => {
                go(f, out);
                go(a, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut out);
    out
}

/// α-equivalence. Terms are kept nameless, so this is structural equality.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    t == u
}

/// Capture-avoiding substitution `m[n/x]` of a free variable.
pub fn substitute(m: &Term, x: &str, n: &Term) -> Term {
    fn go(t: &Term, x: &str, n: &Term, depth: usize) -> Term {
        match t {
            Term::Var(Var::Free(name)) if name == x => n.shift(depth, 0),
            Term::Var(v) => Term::Var(v.clone()),
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(go(b, x, n, depth + 1))),
            Term::App(f, a) => Term::app(go(f, x, n, depth), go(a, x, n, depth)),
            Term::Bottom => Term::Bottom,
        }
    }
    go(m, x, n, 0)
}

/// One step along a path in a λ-term.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sel {
    Body,
    Fun,
    Arg,
}

impl Sel {
    fn letter(self) -> char {
        match self {
            Sel::Body => 'B',
            Sel::Fun => 'F',
            Sel::Arg => 'A',
        }
    }
}

/// Address of a subterm. Prints as `F.A.B`; the root prints as the empty
/// string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct Position(pub Vec<Sel>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    /// Number of `Arg` selectors on the path.
    pub fn depth(&self) -> usize {
        self.0.iter().filter(|s| **s == Sel::Arg).count()
    }

    pub fn child(&self, sel: Sel) -> Position {
        let mut p = self.0.clone();
        p.push(sel);
        Position(p)
    }

    pub fn prefixed(&self, prefix: &[Sel]) -> Position {
        Position(prefix.iter().chain(self.0.iter()).copied().collect())
    }

    pub fn parse(text: &str) -> Option<Position> {
        let text = text.trim();
        if text.is_empty() {
            return Some(Position::root());
        }
        text.split('.')
            .map(|s| match s.trim() {
                "B" => Some(Sel::Body),
                "F" => Some(Sel::Fun),
                "A" => Some(Sel::Arg),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Position)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", s.letter())?;
        }
        Ok(())
    }
}

impl Serialize for Position {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Position {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Position::parse(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("bad position `{text}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(&t("\\x.x"), &t("\\y.y")));
        assert!(!alpha_eq(&t("\\x.\\y.x"), &t("\\x.\\y.y")));
        assert!(alpha_eq(&t("(\\x.(x)x)\\x.(x)x"), &t("(\\a.(a)a)\\b.(b)b")));
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(substitute(&t("x"), "x", &t("y")), t("y"));
        let r = substitute(&t("\\y.x"), "x", &t("y"));
        assert_eq!(r, Term::Abs(Hint::new("y"), Box::new(Term::var("y"))));
        assert_eq!(print_term(&r), "\\y'.y");
        assert_eq!(substitute(&t("(x)x"), "x", &t("\\z.z")), t("(\\z.z)\\z.z"));
    }

    #[test]
    fn free_variable_examples() {
        assert!(free_vars(&t("\\x.x")).is_empty());
        assert_eq!(
            free_vars(&t("(x)y")),
            ["x", "y"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(
            free_vars(&t("\\x.(x)y")),
            ["y"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn truncate_finite_term_at_its_height_is_identity() {
        let m = t("(x)(y)(z)w");
        assert_eq!(m.applicative_height(), 3);
        assert_eq!(m.truncate(3), m);
        assert_eq!(m.truncate(1), t("(x)(y)_|_"));
        assert_eq!(m.truncate(0), t("(x)_|_"));
    }

    #[test]
    fn positions_round_trip() {
        let p = Position(vec![Sel::Fun, Sel::Arg, Sel::Body]);
        assert_eq!(p.to_string(), "F.A.B");
        assert_eq!(Position::parse("F.A.B"), Some(p.clone()));
        assert_eq!(p.depth(), 1);
        assert_eq!(Position::parse(""), Some(Position::root()));
        assert_eq!(Position::parse("X"), None);
    }

    #[test]
    fn subterm_lookup() {
        let m = t("\\z.(z)(\\x.x)y");
        let p = Position::parse("B.A").unwrap();
        assert_eq!(m.subterm(&p), Some(&t("(\\x.x)y").shift(1, 0)));
        assert_eq!(m.subterm(&Position::parse("A").unwrap()), None);
    }
}
