//! Coherence of resource terms: the relation satisfied by any two
//! approximants of a common λ-term.

use serde_json::{json, Value};

use crate::resource::{Bag, RSum, RTerm};
use crate::semiring::Semiring;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CohItem {
    Term(RTerm),
    Bag(Bag),
}

impl std::fmt::Display for CohItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CohItem::Term(t) => write!(f, "{t}"),
            CohItem::Bag(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CohRule {
    Var,
    Abs(Box<CohDerivation>),
    App(Box<CohDerivation>, Box<CohDerivation>),
    /// One premise per cross pair, row-major.
    Bag(Vec<CohDerivation>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohDerivation {
    pub left: CohItem,
    pub right: CohItem,
    pub rule: CohRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherencePair {
    pub left: CohItem,
    pub right: CohItem,
    pub verdict: bool,
    pub derivation: Option<CohDerivation>,
}

pub fn coh(a: &RTerm, b: &RTerm) -> bool {
    match (a, b) {
        (RTerm::Var(x), RTerm::Var(y)) => x == y,
        (RTerm::Abs(_, s), RTerm::Abs(_, u)) => coh(s, u),
        (RTerm::App(s, t), RTerm::App(u, v)) => coh(s, u) && coh_bags(t, v),
        _ => false,
    }
}

/// Two bags, of any lengths, are coherent iff all cross pairs are.
pub fn coh_bags(a: &Bag, b: &Bag) -> bool {
    a.elems()
        .iter()
        .all(|t| b.elems().iter().all(|u| coh(t, u)))
}

fn derive(a: &CohItem, b: &CohItem) -> Option<CohDerivation> {
    let rule = match (a, b) {
        (CohItem::Term(RTerm::Var(x)), CohItem::Term(RTerm::Var(y))) if x == y => CohRule::Var,
        (CohItem::Term(RTerm::Abs(_, s)), CohItem::Term(RTerm::Abs(_, u))) => {
            CohRule::Abs(Box::new(derive(
                &CohItem::Term((**s).clone()),
                &CohItem::Term((**u).clone()),
            )?))
        }
        (CohItem::Term(RTerm::App(s, t)), CohItem::Term(RTerm::App(u, v))) => CohRule::App(
            Box::new(derive(
                &CohItem::Term((**s).clone()),
                &CohItem::Term((**u).clone()),
            )?),
            Box::new(derive(&CohItem::Bag(t.clone()), &CohItem::Bag(v.clone()))?),
        ),
        (CohItem::Bag(t), CohItem::Bag(v)) => {
            let mut premises = Vec::new();
            for x in t.elems() {
                for y in v.elems() {
                    premises.push(derive(
                        &CohItem::Term(x.clone()),
                        &CohItem::Term(y.clone()),
                    )?);
                }
            }
            CohRule::Bag(premises)
        }
        _ => return None,
    };
    Some(CohDerivation {
        left: a.clone(),
        right: b.clone(),
        rule,
    })
}

pub fn coherent(a: &CohItem, b: &CohItem) -> CoherencePair {
    let derivation = derive(a, b);
    CoherencePair {
        left: a.clone(),
        right: b.clone(),
        verdict: derivation.is_some(),
        derivation,
    }
}

impl CohDerivation {
    /// Checks every rule instance of the tree.
    pub fn check(&self) -> bool {
        let premise =
            |d: &CohDerivation, l: CohItem, r: CohItem| d.left == l && d.right == r && d.check();
        match (&self.left, &self.right, &self.rule) {
            (CohItem::Term(RTerm::Var(x)), CohItem::Term(RTerm::Var(y)), CohRule::Var) => x == y,
            (CohItem::Term(RTerm::Abs(_, s)), CohItem::Term(RTerm::Abs(_, u)), CohRule::Abs(d)) => {
                premise(
                    d,
                    CohItem::Term((**s).clone()),
                    CohItem::Term((**u).clone()),
                )
            }
            (
                CohItem::Term(RTerm::App(s, t)),
                CohItem::Term(RTerm::App(u, v)),
                CohRule::App(d, e),
            ) => {
                premise(
                    d,
                    CohItem::Term((**s).clone()),
                    CohItem::Term((**u).clone()),
                ) && premise(e, CohItem::Bag(t.clone()), CohItem::Bag(v.clone()))
            }
            (CohItem::Bag(t), CohItem::Bag(v), CohRule::Bag(ds)) => {
                let pairs: Vec<(&RTerm, &RTerm)> = t
                    .elems()
                    .iter()
                    .flat_map(|x| v.elems().iter().map(move |y| (x, y)))
                    .collect();
                pairs.len() == ds.len()
                    && pairs.iter().zip(ds).all(|((x, y), d)| {
                        premise(d, CohItem::Term((*x).clone()), CohItem::Term((*y).clone()))
                    })
            }
            _ => false,
        }
    }

    pub fn to_json(&self) -> Value {
        let (rule, premises): (&str, Vec<&CohDerivation>) = match &self.rule {
            CohRule::Var => ("var", vec![]),
            CohRule::Abs(d) => ("abs", vec![d]),
            CohRule::App(d, e) => ("app", vec![d, e]),
            CohRule::Bag(ds) => ("bag", ds.iter().collect()),
        };
        json!({
            "left": self.left.to_string(),
            "right": self.right.to_string(),
            "rule": rule,
            "premises": premises.into_iter().map(CohDerivation::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `S ⌣ S`: every pair of support elements, including each element with
/// itself, is coherent.
pub fn self_coherent<C: Semiring>(s: &RSum<C>) -> bool {
    sums_coherent(s, s)
}

pub fn sums_coherent<C: Semiring>(s: &RSum<C>, t: &RSum<C>) -> bool {
    s.support().all(|a| t.support().all(|b| coh(a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse_term;
    use crate::resource::{parse_bag, parse_rterm};
    use crate::semiring::Rational;
    use crate::taylor::taylor_truncated;

    fn r(s: &str) -> CohItem {
        CohItem::Term(parse_rterm(s).unwrap())
    }

    fn b(s: &str) -> CohItem {
        CohItem::Bag(parse_bag(s).unwrap())
    }

    #[test]
    fn examples() {
        assert!(coherent(&r("x"), &r("x")).verdict);
        let p = coherent(&r("(y)1"), &r("(y)[z,z]"));
        assert!(p.verdict);
        assert!(p.derivation.unwrap().check());
        assert!(!coherent(&b("[x,\\y.y]"), &b("[x]")).verdict);
        assert!(!coherent(&r("x"), &r("y")).verdict);
        assert!(!coherent(&b("[x,y]"), &b("[x,y]")).verdict);
    }

    #[test]
    fn tampered_derivations_fail() {
        let mut d = coherent(&r("(y)[z]"), &r("(y)[z,z]")).derivation.unwrap();
        assert!(d.check());
        d.right = r("(y)[z,w]");
        assert!(!d.check());
    }

    #[test]
    fn expansions_are_self_coherent() {
        let e = taylor_truncated::<Rational>(parse_term("(x)y").unwrap(), 6);
        assert!(self_coherent(&e.sum));
        let s: RSum<Rational> = [
            (parse_rterm("x").unwrap(), Rational::one()),
            (parse_rterm("\\y.y").unwrap(), Rational::one()),
        ]
        .into_iter()
        .collect();
        assert!(!self_coherent(&s));
        assert!(self_coherent(&RSum::<Rational>::zero()));
    }
}
