//! Resource reduction `(λx.s)t̄ ⊸ s⟨t̄/x⟩`, its normal forms, and pointwise
//! reduction of sums.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::subst::msubst_bound;
use super::{RPosition, RSel, RSum, RTerm};
use crate::semiring::Semiring;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResourceError {
    #[error("no resource redex at position `{0}`")]
    NotARedex(RPosition),
    #[error("witness domain differs from the support of the reduced sum")]
    DomainMismatch,
    #[error("derivation for `{0}` does not replay")]
    InvalidDerivation(RTerm),
    #[error("derivation for `{0}` does not produce the recorded sum")]
    WrongTarget(RTerm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    LeftmostInnermost,
}

/// Redex positions in pre-order (leftmost-outermost first).
pub fn rredexes(t: &RTerm) -> Vec<RPosition> {
    fn go(t: &RTerm, path: &mut Vec<RSel>, out: &mut Vec<RPosition>, post: bool) {
        if !post && t.is_redex() {
            out.push(RPosition(path.clone()));
        }
        match t {
            RTerm::Var(_) => {}
            RTerm::Abs(_, b) => {
                path.push(RSel::Body);
                go(b, path, out, post);
                path.pop();
            }
            RTerm::App(f, bag) => {
                path.push(RSel::Fun);
                go(f, path, out, post);
                path.pop();
                for (i, u) in bag.elems().iter().enumerate() {
                    path.push(RSel::Elem(i));
                    go(u, path, out, post);
                    path.pop();
                }
            }
        }
        if post && t.is_redex() {
            out.push(RPosition(path.clone()));
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out, false);
    out
}

fn pick(t: &RTerm, strategy: Strategy) -> Option<RPosition> {
    fn post(t: &RTerm, path: &mut Vec<RSel>) -> Option<RPosition> {
        let found = match t {
            RTerm::Var(_) => None,
            RTerm::Abs(_, b) => {
                path.push(RSel::Body);
                let r = post(b, path);
                path.pop();
                r
            }
            RTerm::App(f, bag) => {
                path.push(RSel::Fun);
                let mut r = post(f, path);
                path.pop();
                for (i, u) in bag.elems().iter().enumerate() {
                    if r.is_some() {
                        break;
                    }
                    path.push(RSel::Elem(i));
                    r = post(u, path);
                    path.pop();
                }
                r
            }
        };
        found.or_else(|| t.is_redex().then(|| RPosition(path.clone())))
    }
    match strategy {
        Strategy::LeftmostOutermost => rredexes(t).into_iter().next(),
        Strategy::LeftmostInnermost => post(t, &mut Vec::new()),
    }
}

/// Fires the redex at `p`; the contractum is extended linearly into the
/// context.
pub fn resource_step<C: Semiring>(t: &RTerm, p: &RPosition) -> Result<RSum<C>, ResourceError> {
    let not_redex = || ResourceError::NotARedex(p.clone());
    t.replace_at_linear(&p.0, |sub| match sub {
        RTerm::App(f, bag) => match &**f {
            RTerm::Abs(_, body) => Ok(msubst_bound(body, bag)),
            _ => Err(not_redex()),
        },
        _ => Err(not_redex()),
    })
    .unwrap_or_else(|| Err(not_redex()))
}

/// Normal form of a resource term.
pub fn normalize<C: Semiring>(t: &RTerm) -> RSum<C> {
    normalize_with(t, Strategy::LeftmostOutermost)
}

pub fn normalize_with<C: Semiring>(t: &RTerm, strategy: Strategy) -> RSum<C> {
    let mut memo = HashMap::new();
    normalize_memo(t, strategy, &mut memo)
}

fn normalize_memo<C: Semiring>(
    t: &RTerm,
    strategy: Strategy,
    memo: &mut HashMap<RTerm, RSum<C>>,
) -> RSum<C> {
    if let Some(s) = memo.get(t) {
        return s.clone();
    }
    let out = match pick(t, strategy) {
        None => RSum::single(t.clone()),
        Some(p) => {
            let next: RSum<C> = resource_step(t, &p).expect("picked a redex");
            let mut out = RSum::zero();
            for (u, c) in next.iter() {
                out.add_scaled(c, &normalize_memo(u, strategy, memo));
            }
            out
        }
    };
    memo.insert(t.clone(), out.clone());
    out
}

pub fn normalize_sum<C: Semiring>(s: &RSum<C>) -> RSum<C> {
    let mut memo = HashMap::new();
    s.map_linear(|t| normalize_memo(t, Strategy::LeftmostOutermost, &mut memo))
}

/// Keeps the terms of depth strictly below `d`.
pub fn restrict_below_depth<C: Semiring>(s: &RSum<C>, d: usize) -> RSum<C> {
    s.filter(|t| t.depth() < d)
}

/// One lifting step on sums: reduces `chosen` at `p` and keeps the rest of
/// the support unchanged.
pub fn reduce_sum_once<C: Semiring>(
    s: &RSum<C>,
    chosen: &RTerm,
    p: &RPosition,
) -> Result<RSum<C>, ResourceError> {
    let mut out = s.filter(|t| t != chosen);
    out.add_scaled(&s.coeff(chosen), &resource_step(chosen, p)?);
    Ok(out)
}

/// A recorded `⊸*` derivation: either the term itself, or one fired redex
/// followed by derivations for every term of the contractum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub term: RTerm,
    pub step: Option<(RPosition, Vec<Derivation>)>,
}

impl Derivation {
    pub fn refl(term: RTerm) -> Self {
        Derivation { term, step: None }
    }

    /// The derivation followed by leftmost-outermost normalization.
    pub fn normalizing(t: &RTerm) -> Self {
        match pick(t, Strategy::LeftmostOutermost) {
            None => Derivation::refl(t.clone()),
            Some(p) => {
                let next: RSum<crate::semiring::Boolean> =
                    resource_step(t, &p).expect("picked a redex");
                let children = next.support().map(Derivation::normalizing).collect();
                Derivation {
                    term: t.clone(),
                    step: Some((p, children)),
                }
            }
        }
    }

    /// Replays the derivation and returns the sum it reaches.
    pub fn replay<C: Semiring>(&self) -> Result<RSum<C>, ResourceError> {
        let Some((p, children)) = &self.step else {
            return Ok(RSum::single(self.term.clone()));
        };
        let next: RSum<C> = resource_step(&self.term, p)?;
        let bad = || ResourceError::InvalidDerivation(self.term.clone());
        if next.len() != children.len() {
            return Err(bad());
        }
        let mut out = RSum::zero();
        for ((u, c), child) in next.iter().zip(children) {
            if *u != child.term {
                return Err(bad());
            }
            out.add_scaled(c, &child.replay()?);
        }
        Ok(out)
    }

    pub fn steps(&self) -> usize {
        self.step.as_ref().map_or(0, |(_, cs)| {
            1 + cs.iter().map(Derivation::steps).sum::<usize>()
        })
    }
}

/// Pointwise reduction of a sum: each support element is mapped to a sum
/// it reduces to, together with the derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumReductionWitness<C: Semiring> {
    pub entries: BTreeMap<RTerm, (RSum<C>, Derivation)>,
}

impl<C: Semiring> SumReductionWitness<C> {
    pub fn normalizing(s: &RSum<C>) -> Self {
        let entries = s
            .support()
            .map(|t| {
                let d = Derivation::normalizing(t);
                let target = d.replay().expect("fresh derivation replays");
                (t.clone(), (target, d))
            })
            .collect();
        SumReductionWitness { entries }
    }

    /// `Σ a_i V_i` for `source = Σ a_i u_i`.
    pub fn target(&self, source: &RSum<C>) -> Result<RSum<C>, ResourceError> {
        self.validate(source)?;
        Ok(source.map_linear(|t| self.entries[t].0.clone()))
    }

    pub fn validate(&self, source: &RSum<C>) -> Result<(), ResourceError> {
        if !self.entries.keys().eq(source.support()) {
            return Err(ResourceError::DomainMismatch);
        }
        for (t, (target, d)) in &self.entries {
            if d.term != *t {
                return Err(ResourceError::InvalidDerivation(t.clone()));
            }
            if d.replay::<C>()? != *target {
                return Err(ResourceError::WrongTarget(t.clone()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resource::parse_rterm;
    use crate::semiring::{Boolean, Rational};

    fn r(s: &str) -> RTerm {
        parse_rterm(s).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn step_examples() {
        let root = RPosition::root();
        assert_eq!(
            resource_step::<Rational>(&r("(\\x.x)[y]"), &root).unwrap(),
            RSum::single(r("y"))
        );
        assert!(resource_step::<Rational>(&r("(\\x.x)1"), &root)
            .unwrap()
            .is_zero());
        assert_eq!(
            resource_step::<Rational>(&r("(\\x.(x)[x])[y,y]"), &root).unwrap(),
            RSum::scaled(Rational::integer(2), r("(y)[y]"))
        );
        assert!(matches!(
            resource_step::<Rational>(&r("(x)[y]"), &root),
            Err(ResourceError::NotARedex(_))
        ));
    }

    #[test]
    fn step_under_context_resorts_bags() {
        let t = r("(f)[(\\x.x)[z],a]");
        let p = rredexes(&t).pop().unwrap();
        assert_eq!(
            resource_step::<Rational>(&t, &p).unwrap(),
            RSum::single(r("(f)[a,z]"))
        );
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(
            normalize::<Rational>(&r("(\\x.x)[(\\y.y)[z]]")),
            RSum::single(r("z"))
        );
        assert!(normalize::<Rational>(&r("(\\x.(x)[x])[\\x.(x)1]")).is_zero());
        let nf = r("\\x.(x)[y,y]");
        assert_eq!(normalize::<Rational>(&nf), RSum::single(nf.clone()));
    }

    #[test]
    fn sum_normalization() {
        assert!(normalize_sum::<Rational>(&RSum::zero()).is_zero());
        let s = RSum::scaled(q(1, 2), r("(\\x.x)[y]"));
        assert_eq!(normalize_sum(&s), RSum::scaled(q(1, 2), r("y")));
        let s: RSum<Rational> = [
            (r("(\\x.x)[y]"), Rational::one()),
            (r("(\\x.x)1"), Rational::one()),
        ]
        .into_iter()
        .collect();
        assert_eq!(normalize_sum(&s), RSum::single(r("y")));
    }

    #[test]
    fn strategies_agree() {
        let t = r("(\\x.(x)[x])[\\y.y,(\\z.z)[\\w.w]]");
        let lo: RSum<Rational> = normalize_with(&t, Strategy::LeftmostOutermost);
        let li: RSum<Rational> = normalize_with(&t, Strategy::LeftmostInnermost);
        assert_eq!(lo, li);
        assert_eq!(lo, RSum::scaled(Rational::integer(2), r("\\w.w")));
    }

    #[test]
    fn restriction() {
        let s: RSum<Rational> = [(r("x"), Rational::one()), (r("(y)[z]"), Rational::one())]
            .into_iter()
            .collect();
        assert_eq!(restrict_below_depth(&s, 1), RSum::single(r("x")));
        assert!(restrict_below_depth(&s, 0).is_zero());
        let h = RSum::scaled(q(1, 2), r("x"));
        assert_eq!(restrict_below_depth(&h, 5), h);
    }

    #[test]
    fn lifting_step_keeps_the_rest() {
        let s: RSum<Rational> = [(r("(\\x.x)[y]"), q(1, 3)), (r("z"), Rational::one())]
            .into_iter()
            .collect();
        let out = reduce_sum_once(&s, &r("(\\x.x)[y]"), &RPosition::root()).unwrap();
        let expected: RSum<Rational> = [(r("y"), q(1, 3)), (r("z"), Rational::one())]
            .into_iter()
            .collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn witnesses() {
        let s: RSum<Rational> = [
            (r("(\\x.(x)[x])[y,y]"), q(1, 2)),
            (r("(\\x.x)1"), Rational::one()),
        ]
        .into_iter()
        .collect();
        let w = SumReductionWitness::normalizing(&s);
        assert_eq!(w.target(&s).unwrap(), normalize_sum(&s));
        assert_eq!(w.target(&s).unwrap(), RSum::single(r("(y)[y]")));
        let mut bad = w.clone();
        bad.entries.pop_first();
        assert_eq!(bad.validate(&s), Err(ResourceError::DomainMismatch));
        let b: RSum<Boolean> = s.convert(|c| Boolean(!c.is_zero()));
        assert_eq!(
            normalize_sum(&b).support_set(),
            normalize_sum(&s).support_set()
        );
    }
}
