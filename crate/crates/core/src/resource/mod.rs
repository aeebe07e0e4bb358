//! The resource λ-calculus: terms applied to finite multisets of arguments,
//! multilinear substitution and resource reduction over formal sums.

mod parse;
mod print;
mod reduce;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

use crate::lambda::{Hint, Var};
use crate::lincomb::LinComb;

pub use parse::{parse_bag, parse_rterm, RParseError};
pub use print::{print_bag, print_rterm};
pub use reduce::{
    normalize, normalize_sum, normalize_with, reduce_sum_once, resource_step, restrict_below_depth,
    rredexes, Derivation, ResourceError, Strategy, SumReductionWitness,
};
pub use subst::{msubst, msubst_bound, msubst_literal, msubst_monomial};

/// A formal sum of resource terms.
pub type RSum<C> = LinComb<RTerm, C>;
/// A formal sum of monomials.
pub type BagSum<C> = LinComb<Bag, C>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RTerm {
    Var(Var),
    Abs(Hint, Box<RTerm>),
    App(Box<RTerm>, Bag),
}

/// A resource monomial: a finite multiset stored as a sorted sequence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bag(Vec<RTerm>);

impl Bag {
    pub fn empty() -> Self {
        Bag(Vec::new())
    }

    pub fn new(mut elems: Vec<RTerm>) -> Self {
        elems.sort();
        Bag(elems)
    }

    pub fn elems(&self) -> &[RTerm] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiset union.
    pub fn union(&self, other: &Bag) -> Bag {
        Bag::new(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    /// Distinct elements with their multiplicities.
    pub fn multiplicities(&self) -> Vec<(&RTerm, usize)> {
        let mut out: Vec<(&RTerm, usize)> = Vec::new();
        for t in &self.0 {
            match out.last_mut() {
                Some((u, k)) if *u == t => *k += 1,
                _ => out.push((t, 1)),
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.0.iter().map(RTerm::size).sum()
    }

    pub fn depth(&self) -> usize {
        self.0.iter().map(RTerm::depth).max().unwrap_or(0)
    }

    fn shift(&self, by: usize, cutoff: usize) -> Bag {
        Bag(self.0.iter().map(|t| t.shift(by, cutoff)).collect())
    }
}

impl FromIterator<RTerm> for Bag {
    fn from_iter<I: IntoIterator<Item = RTerm>>(iter: I) -> Self {
        Bag::new(iter.into_iter().collect())
    }
}

/// One step along a path in a resource term.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum RSel {
    Body,
    Fun,
    Elem(usize),
}

/// Address of a subterm of a resource term; prints as `F.2.B`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct RPosition(pub Vec<RSel>);

impl RPosition {
    pub fn root() -> Self {
        RPosition(Vec::new())
    }

    /// Number of bag-element selectors on the path.
    pub fn depth(&self) -> usize {
        self.0.iter().filter(|s| matches!(s, RSel::Elem(_))).count()
    }

    pub fn parse(text: &str) -> Option<RPosition> {
        let text = text.trim();
        if text.is_empty() {
            return Some(RPosition::root());
        }
        text.split('.')
            .map(|s| match s.trim() {
                "B" => Some(RSel::Body),
                "F" => Some(RSel::Fun),
                n => n.parse().ok().map(RSel::Elem),
            })
            .collect::<Option<Vec<_>>>()
            .map(RPosition)
    }
}

impl fmt::Display for RPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match s {
                RSel::Body => f.write_str("B")?,
                RSel::Fun => f.write_str("F")?,
                RSel::Elem(k) => write!(f, "{k}")?,
            }
        }
        Ok(())
    }
}

impl RTerm {
    pub fn var(name: &str) -> RTerm {
        RTerm::Var(Var::Free(name.to_string()))
    }

    pub fn bound(index: usize) -> RTerm {
        RTerm::Var(Var::Bound(index))
    }

    /// `λname.body`, binding the free occurrences of `name` in `body`.
    pub fn lam(name: &str, body: RTerm) -> RTerm {
        RTerm::Abs(Hint::new(name), Box::new(body.close(name, 0)))
    }

    pub fn app(head: RTerm, bag: Bag) -> RTerm {
        RTerm::App(Box::new(head), bag)
    }

    fn close(self, name: &str, depth: usize) -> RTerm {
        match self {
            RTerm::Var(Var::Free(n)) if n == name => RTerm::Var(Var::Bound(depth)),
            RTerm::Var(v) => RTerm::Var(v),
            RTerm::Abs(h, b) => RTerm::Abs(h, Box::new(b.close(name, depth + 1))),
            RTerm::App(f, bag) => RTerm::app(
                f.close(name, depth),
                bag.0.into_iter().map(|t| t.close(name, depth)).collect(),
            ),
        }
    }

    /// Adds `by` to every index at least `cutoff`.
    pub fn shift(&self, by: usize, cutoff: usize) -> RTerm {
        if by == 0 {
            return self.clone();
        }
        match self {
            RTerm::Var(Var::Bound(i)) if *i >= cutoff => RTerm::bound(i + by),
            RTerm::Var(v) => RTerm::Var(v.clone()),
            RTerm::Abs(h, b) => RTerm::Abs(h.clone(), Box::new(b.shift(by, cutoff + 1))),
            // shifting is monotone on indices, so the bag stays sorted
            RTerm::App(f, bag) => RTerm::app(f.shift(by, cutoff), bag.shift(by, cutoff)),
        }
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, RTerm::Abs(..))
    }

    pub fn is_redex(&self) -> bool {
        matches!(self, RTerm::App(f, _) if f.is_abs())
    }

    /// Node count: variables, abstractions and applications; bags add
    /// only their elements.
    pub fn size(&self) -> usize {
        match self {
            RTerm::Var(_) => 1,
            RTerm::Abs(_, b) => 1 + b.size(),
            RTerm::App(f, bag) => 1 + f.size() + bag.size(),
        }
    }

    /// Applicative depth; an empty bag has depth 0, so `(s)1` has depth at
    /// least 1.
    pub fn depth(&self) -> usize {
        match self {
            RTerm::Var(_) => 0,
            RTerm::Abs(_, b) => b.depth(),
            RTerm::App(f, bag) => f.depth().max(1 + bag.depth()),
        }
    }

    pub fn metrics(&self) -> (usize, usize) {
        (self.size(), self.depth())
    }

    pub fn subterm(&self, pos: &RPosition) -> Option<&RTerm> {
        let mut cur = self;
        for s in &pos.0 {
            cur = match (cur, s) {
                (RTerm::Abs(_, b), RSel::Body) => b,
                (RTerm::App(f, _), RSel::Fun) => f,
                (RTerm::App(_, bag), RSel::Elem(i)) => bag.0.get(*i)?,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Replaces the subterm at `pos` by each term of `f(subterm)`, extended
    /// linearly into the context. Bags on the path are re-sorted.
    pub fn replace_at_linear<C: crate::semiring::Semiring, E>(
        &self,
        pos: &[RSel],
        f: impl FnOnce(&RTerm) -> Result<RSum<C>, E>,
    ) -> Option<Result<RSum<C>, E>> {
        let Some((first, rest)) = pos.split_first() else {
            return Some(f(self));
        };
        match (self, first) {
            (RTerm::Abs(h, b), RSel::Body) => Some(b.replace_at_linear(rest, f)?.map(|sum| {
                sum.iter()
                    .map(|(t, c)| (RTerm::Abs(h.clone(), Box::new(t.clone())), c.clone()))
                    .collect()
            })),
            (RTerm::App(g, bag), RSel::Fun) => Some(g.replace_at_linear(rest, f)?.map(|sum| {
                sum.iter()
                    .map(|(t, c)| (RTerm::app(t.clone(), bag.clone()), c.clone()))
                    .collect()
            })),
            (RTerm::App(g, bag), RSel::Elem(i)) => {
                let elem = bag.0.get(*i)?;
                Some(elem.replace_at_linear(rest, f)?.map(|sum| {
                    sum.iter()
                        .map(|(t, c)| {
                            let mut elems = bag.0.clone();
                            elems[*i] = t.clone();
                            (RTerm::app((**g).clone(), Bag::new(elems)), c.clone())
                        })
                        .collect()
                }))
            }
            _ => None,
        }
    }
}

pub fn free_rvars(t: &RTerm) -> BTreeSet<String> {
    fn go(t: &RTerm, out: &mut BTreeSet<String>) {
        match t {
            RTerm::Var(Var::Free(n)) => {
                out.insert(n.clone());
            }
            RTerm::Var(Var::Bound(_)) => {}
            RTerm::Abs(_, b) => go(b, out),
            RTerm::App(f, bag) => {
                go(f, out);
                bag.0.iter().for_each(|u| go(u, out));
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut out);
    out
}

impl fmt::Display for RTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_rterm(self))
    }
}

impl fmt::Debug for RTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_rterm(self))
    }
}

impl std::str::FromStr for RTerm {
    type Err = RParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rterm(s)
    }
}

impl fmt::Display for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_bag(self))
    }
}

impl fmt::Debug for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_bag(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> RTerm {
        parse_rterm(s).unwrap()
    }

    #[test]
    fn metrics_examples() {
        assert_eq!(r("x").metrics(), (1, 0));
        assert_eq!(r("(y)[z]").metrics(), (3, 1));
        assert_eq!(r("(y)1").metrics(), (2, 1));
        assert_eq!(r("\\x.(x)[(y)[z]]").depth(), 2);
    }

    #[test]
    fn bags_are_order_independent() {
        assert_eq!(r("(f)[a,b,a]"), r("(f)[b,a,a]"));
        let bag = parse_bag("[a,b,a]").unwrap();
        let ms: Vec<usize> = bag.multiplicities().into_iter().map(|(_, k)| k).collect();
        assert_eq!(ms, vec![2, 1]);
    }

    #[test]
    fn positions() {
        let t = r("(\\x.x)[y,z]");
        assert_eq!(t.subterm(&RPosition::parse("1").unwrap()), Some(&r("z")));
        assert_eq!(
            t.subterm(&RPosition::parse("F.B").unwrap()),
            Some(&RTerm::bound(0))
        );
        assert_eq!(RPosition::parse("F.2.B").unwrap().to_string(), "F.2.B");
        assert_eq!(RPosition::parse("F.2.B").unwrap().depth(), 1);
    }
}
