//! Uniform simulation of one β-step on a truncated expansion: every
//! approximant fires all the residuals of the designated redex at once.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use super::{bound_occurrences, canonical_approximant, taylor_truncated, TruncatedExpansion};
use crate::beta::{beta_step, redex_at, BetaError, RedexInfo};
use crate::lambda::{Position, Sel, Term};
use crate::resource::{msubst_bound, Bag, RPosition, RSel, RSum, RTerm, ResourceError};
use crate::semiring::Semiring;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error(transparent)]
    Beta(#[from] BetaError),
    #[error("`{0}` is not an approximant of the reduced term")]
    NotAnApproximant(RTerm),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("witness domain differs from the support of the source sum")]
    DomainMismatch,
    #[error("witness entry for `{0}` does not match the residuals of the redex")]
    BadEntry(RTerm),
}

/// Positions in `s` of the copies of the λ-term redex at `path`: an
/// argument selector fans out to every element of the bag.
pub fn residual_positions(s: &RTerm, path: &[Sel]) -> Option<Vec<RPosition>> {
    fn go(s: &RTerm, path: &[Sel], prefix: &mut Vec<RSel>, out: &mut Vec<RPosition>) -> bool {
        let Some((first, rest)) = path.split_first() else {
            out.push(RPosition(prefix.clone()));
            return s.is_redex();
        };
        match (s, first) {
            (RTerm::Abs(_, b), Sel::Body) => {
                prefix.push(RSel::Body);
                let ok = go(b, rest, prefix, out);
                prefix.pop();
                ok
            }
            (RTerm::App(f, _), Sel::Fun) => {
                prefix.push(RSel::Fun);
                let ok = go(f, rest, prefix, out);
                prefix.pop();
                ok
            }
            (RTerm::App(_, bag), Sel::Arg) => bag.elems().iter().enumerate().all(|(i, u)| {
                prefix.push(RSel::Elem(i));
                let ok = go(u, rest, prefix, out);
                prefix.pop();
                ok
            }),
            _ => false,
        }
    }
    let mut out = Vec::new();
    go(s, path, &mut Vec::new(), &mut out).then_some(out)
}

/// Fires the given pairwise disjoint redexes of `s` simultaneously.
pub fn fire_residuals<C: Semiring>(
    s: &RTerm,
    positions: &[RPosition],
) -> Result<RSum<C>, ResourceError> {
    fn go<C: Semiring>(
        s: &RTerm,
        here: &[RSel],
        positions: &[&[RSel]],
    ) -> Result<RSum<C>, ResourceError> {
        let bad = || ResourceError::NotARedex(RPosition(here.to_vec()));
        if positions.is_empty() {
            return Ok(RSum::single(s.clone()));
        }
        if positions.iter().any(|p| p.is_empty()) {
            if positions.len() != 1 {
                return Err(bad());
            }
            return match s {
                RTerm::App(f, bag) => match &**f {
                    RTerm::Abs(_, body) => Ok(msubst_bound(body, bag)),
                    _ => Err(bad()),
                },
                _ => Err(bad()),
            };
        }
        let child = |sel: RSel| -> Vec<&[RSel]> {
            positions
                .iter()
                .filter(|p| p[0] == sel)
                .map(|p| &p[1..])
                .collect()
        };
        let extend = |sel: RSel| {
            let mut h = here.to_vec();
            h.push(sel);
            h
        };
        match s {
            RTerm::Var(_) => Err(bad()),
            RTerm::Abs(h, b) => {
                if positions.iter().any(|p| p[0] != RSel::Body) {
                    return Err(bad());
                }
                let inner: RSum<C> = go(b, &extend(RSel::Body), &child(RSel::Body))?;
                Ok(inner
                    .iter()
                    .map(|(u, c)| (RTerm::Abs(h.clone(), Box::new(u.clone())), c.clone()))
                    .collect())
            }
            RTerm::App(f, bag) => {
                if positions
                    .iter()
                    .any(|p| matches!(p[0], RSel::Elem(i) if i >= bag.len()) || p[0] == RSel::Body)
                {
                    return Err(bad());
                }
                let heads: RSum<C> = go(f, &extend(RSel::Fun), &child(RSel::Fun))?;
                // multilinear product over the bag elements
                let mut partial: Vec<(Vec<RTerm>, C)> = vec![(Vec::new(), C::one())];
                for (i, u) in bag.elems().iter().enumerate() {
                    let reducts: RSum<C> = go(u, &extend(RSel::Elem(i)), &child(RSel::Elem(i)))?;
                    let mut next = Vec::new();
                    for (elems, c) in &partial {
                        for (v, d) in reducts.iter() {
                            let mut e = elems.clone();
                            e.push(v.clone());
                            next.push((e, c.mul(d)));
                        }
                    }
                    partial = next;
                }
                let mut out = RSum::zero();
                for (h, ch) in heads.iter() {
                    for (elems, c) in &partial {
                        out.add_term(ch.mul(c), RTerm::app(h.clone(), Bag::new(elems.clone())));
                    }
                }
                Ok(out)
            }
        }
    }
    let slices: Vec<&[RSel]> = positions.iter().map(|p| p.0.as_slice()).collect();
    go(s, &[], &slices)
}

/// Size contract for a truncated bundle step. Each fired residual
/// `(λx.p)[q1..qn] ↦ p⟨q̄/x⟩` loses `2 + n` nodes, and `n` is bounded by
/// the size of the residual's result, so every preimage of a result term
/// `t` has size at most `(1 + ratio)·|t|`. Terms within that factor of
/// the bound have all their preimages in the truncated source and hence
/// exact coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certification {
    pub size_bound: usize,
    pub body_is_var: bool,
    /// Non-`x` nodes of `⌈P⌉_0` for the redex body `P`.
    pub body_min: Option<usize>,
    /// `|⌈Q⌉_0|` for the redex argument `Q`.
    pub arg_min: Option<usize>,
}

impl Certification {
    pub fn for_redex(redex: &Term, size_bound: usize) -> Option<Self> {
        let Term::App(f, q) = redex else { return None };
        let Term::Abs(_, p) = &**f else { return None };
        let body_is_var = **p == Term::bound(0);
        let body_min =
            canonical_approximant(p, Some(0)).map(|s| s.size() - bound_occurrences(&s, 0));
        let arg_min = canonical_approximant(q, Some(0)).map(|s| s.size());
        Some(Certification {
            size_bound,
            body_is_var,
            body_min,
            arg_min,
        })
    }

    /// True when the coefficient of a result term of this size is exact.
    pub fn certifies(&self, size: usize) -> bool {
        let k = self.size_bound;
        let base = size <= k;
        if self.body_is_var {
            return base && self.arg_min.is_none_or(|q| size * (q + 3) <= k * q);
        }
        match self.body_min {
            None => base,
            Some(mp) => {
                base && size * (mp + 2) <= k * mp
                    && self.arg_min.is_none_or(|q| size * (q + 1) <= k * q)
            }
        }
    }

    /// Largest certified result size.
    pub fn certified_size(&self) -> usize {
        (0..=self.size_bound)
            .rev()
            .find(|&n| self.certifies(n))
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleEntry<C: Semiring> {
    pub residuals: Vec<RPosition>,
    pub targets: RSum<C>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleWitness<C: Semiring> {
    pub redex: RedexInfo,
    /// Minimal depth of the simulated step.
    pub depth: usize,
    pub certification: Certification,
    pub entries: BTreeMap<RTerm, BundleEntry<C>>,
}

impl<C: Semiring> BundleWitness<C> {
    /// Builds the witness for the redex at `p` of `m` over the given
    /// approximants.
    pub fn build<'a>(
        m: &Term,
        p: &Position,
        support: impl IntoIterator<Item = &'a RTerm>,
        size_bound: usize,
    ) -> Result<Self, BundleError> {
        let redex = redex_at(m, p)?;
        let sub = m.subterm(p).expect("redex exists");
        let certification = Certification::for_redex(sub, size_bound).expect("redex shape");
        let mut entries = BTreeMap::new();
        for s in support {
            let residuals = residual_positions(s, &p.0)
                .ok_or_else(|| BundleError::NotAnApproximant(s.clone()))?;
            let targets = fire_residuals(s, &residuals)?;
            entries.insert(s.clone(), BundleEntry { residuals, targets });
        }
        Ok(BundleWitness {
            depth: redex.depth,
            redex,
            certification,
            entries,
        })
    }

    /// `Σ a_s · V_s` for `source = Σ a_s · s`.
    pub fn push(&self, source: &RSum<C>) -> Result<RSum<C>, BundleError> {
        if !self.entries.keys().eq(source.support()) {
            return Err(BundleError::DomainMismatch);
        }
        Ok(source.map_linear(|s| self.entries[s].targets.clone()))
    }

    /// Re-derives every entry from the redex position.
    pub fn validate(&self, source: &RSum<C>) -> Result<(), BundleError> {
        if !self.entries.keys().eq(source.support()) {
            return Err(BundleError::DomainMismatch);
        }
        for (s, e) in &self.entries {
            let expected = residual_positions(s, &self.redex.position.0);
            if expected.as_ref() != Some(&e.residuals) {
                return Err(BundleError::BadEntry(s.clone()));
            }
            if fire_residuals::<C>(s, &e.residuals)? != e.targets {
                return Err(BundleError::BadEntry(s.clone()));
            }
        }
        Ok(())
    }

    pub fn certified(&self, s: &RSum<C>) -> RSum<C> {
        s.filter(|t| self.certification.certifies(t.size()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "redex": self.redex.position.to_string(),
            "depth": self.depth,
            "size_bound": self.certification.size_bound,
            "certified_size": self.certification.certified_size(),
            "entries": self.entries.iter().map(|(s, e)| json!({
                "source": s.to_string(),
                "residuals": e.residuals.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "targets": e.targets.iter().map(|(t, c)| json!({
                    "term": t.to_string(),
                    "coeff": c.to_string(),
                    "certified": self.certification.certifies(t.size()),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BundleStep<C: Semiring> {
    pub result: Term,
    pub expansion: TruncatedExpansion<C>,
    pub pushed: RSum<C>,
    pub witness: BundleWitness<C>,
}

impl<C: Semiring> BundleStep<C> {
    /// The pushed sum equals the expansion of the reduct on every
    /// certified term.
    pub fn exact_on_certified(&self) -> bool {
        self.witness.certified(&self.pushed) == self.witness.certified(&self.expansion.sum)
    }
}

/// Fires the redex at `p` of `m` and pushes the truncated expansion `t` of
/// `m` along all its residuals.
pub fn bundle_beta_step<C: Semiring>(
    m: &Term,
    p: &Position,
    t: &TruncatedExpansion<C>,
) -> Result<BundleStep<C>, BundleError> {
    let result = beta_step(m, p)?;
    let witness = BundleWitness::build(m, p, t.sum.support(), t.size_bound)?;
    let pushed = witness.push(&t.sum)?;
    let expansion = taylor_truncated(result.clone(), t.size_bound);
    Ok(BundleStep {
        result,
        expansion,
        pushed,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::enumerate_redexes;
    use crate::lambda::parse_term;
    use crate::resource::parse_rterm;
    use crate::semiring::Rational;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn r(s: &str) -> RTerm {
        parse_rterm(s).unwrap()
    }

    #[test]
    fn identity_redex() {
        let m = t("(\\x.x)y");
        let e = taylor_truncated::<Rational>(m.clone(), 5);
        let step = bundle_beta_step(&m, &Position::root(), &e).unwrap();
        let w = &step.witness;
        assert_eq!(w.entries[&r("(\\x.x)[y]")].targets, RSum::single(r("y")));
        assert!(w.entries[&r("(\\x.x)1")].targets.is_zero());
        assert!(w.entries[&r("(\\x.x)[y,y]")].targets.is_zero());
        assert_eq!(step.pushed, RSum::single(r("y")));
        assert_eq!(step.pushed, step.expansion.sum);
    }

    #[test]
    fn erasing_redex() {
        let m = t("(\\x.z)y");
        let e = taylor_truncated::<Rational>(m.clone(), 4);
        let step = bundle_beta_step(&m, &Position::root(), &e).unwrap();
        assert_eq!(
            step.witness.entries[&r("(\\x.z)1")].targets,
            RSum::single(r("z"))
        );
        assert!(step.witness.entries[&r("(\\x.z)[y]")].targets.is_zero());
        assert_eq!(step.pushed, RSum::single(r("z")));
    }

    #[test]
    fn duplicating_redex() {
        let m = t("(\\x.(x)x)y");
        let e = taylor_truncated::<Rational>(m.clone(), 8);
        let step = bundle_beta_step(&m, &Position::root(), &e).unwrap();
        assert_eq!(
            step.witness.entries[&r("(\\x.(x)[x])[y,y]")].targets,
            RSum::scaled(Rational::integer(2), r("(y)[y]"))
        );
        assert_eq!(step.pushed.coeff(&r("(y)[y]")), Rational::one());
        assert!(step.exact_on_certified());
        step.witness.validate(&e.sum).unwrap();
    }

    #[test]
    fn redexes_under_arguments_fan_out() {
        let m = t("(f)(\\x.x)y");
        let e = taylor_truncated::<Rational>(m.clone(), 10);
        let p = enumerate_redexes(&m)[0].position.clone();
        let step = bundle_beta_step(&m, &p, &e).unwrap();
        assert_eq!(
            step.witness.entries[&r("(f)[(\\x.x)[y],(\\x.x)[y]]")]
                .residuals
                .len(),
            2
        );
        assert_eq!(step.pushed.coeff(&r("(f)[y,y]")), Rational::new(1, 2));
        assert!(step.exact_on_certified());
    }

    #[test]
    fn certification_is_tight_enough_to_matter() {
        let c = Certification::for_redex(&t("(\\x.x)y"), 8).unwrap();
        assert_eq!(c.certified_size(), 2);
        let c = Certification::for_redex(&t("(\\x.(x)x)y"), 9).unwrap();
        assert_eq!(c.certified_size(), 3);
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let m = t("(\\x.(x)x)y");
        let e = taylor_truncated::<Rational>(m.clone(), 7);
        let mut w = BundleWitness::build(&m, &Position::root(), e.sum.support(), 7).unwrap();
        let key = r("(\\x.(x)[x])[y,y]");
        w.entries.get_mut(&key).unwrap().targets = RSum::single(r("(y)[y]"));
        assert!(matches!(w.validate(&e.sum), Err(BundleError::BadEntry(_))));
    }
}
