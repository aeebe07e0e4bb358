//! Taylor expansion of λ-terms into sums of resource approximants.
//!
//! Infinite expansions are handled through size-truncated representatives:
//! [`taylor_truncated`] lists every approximant up to a size bound with its
//! exact coefficient.

mod bundle;
mod coherence;

use std::collections::HashMap;
use std::fmt;

use crate::lambda::{RegularSystem, Term, Var};
use crate::resource::{Bag, BagSum, RSum, RTerm};
use crate::semiring::Semiring;

pub use bundle::{
    bundle_beta_step, fire_residuals, residual_positions, BundleEntry, BundleError, BundleStep,
    BundleWitness, Certification,
};
pub use coherence::{
    coh, coh_bags, coherent, self_coherent, sums_coherent, CohDerivation, CohItem, CohRule,
    CoherencePair,
};

/// What an expansion approximates: a finite term or a regular system
/// presenting an infinitary one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Term(Term),
    System(RegularSystem),
}

impl Source {
    /// A finite term agreeing with the source on every approximant of
    /// depth at most `depth`.
    pub fn at_depth(&self, depth: usize) -> Term {
        match self {
            Source::Term(t) => t.clone(),
            Source::System(sys) => sys.truncate(depth),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Term(t) => write!(f, "{t}"),
            Source::System(s) => write!(f, "{s}"),
        }
    }
}

impl From<Term> for Source {
    fn from(t: Term) -> Self {
        Source::Term(t)
    }
}

impl From<RegularSystem> for Source {
    fn from(s: RegularSystem) -> Self {
        Source::System(s)
    }
}

/// All approximants of `source` of size at most `size_bound`, optionally
/// also of depth at most `depth_bound`, with their coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedExpansion<C: Semiring> {
    pub sum: RSum<C>,
    pub size_bound: usize,
    pub depth_bound: Option<usize>,
    pub source: Source,
}

impl<C: Semiring> TruncatedExpansion<C> {
    pub fn with_depth_bound(mut self, d: usize) -> Self {
        self.sum = self.sum.filter(|s| s.depth() <= d);
        self.depth_bound = Some(self.depth_bound.map_or(d, |e| e.min(d)));
        self
    }
}

/// The coefficient `T(m, s)`, by induction on `s`.
pub fn taylor_coeff<C: Semiring>(m: &Term, s: &RTerm) -> C {
    match (m, s) {
        (Term::Var(x), RTerm::Var(y)) if x == y => C::one(),
        (Term::Abs(_, p), RTerm::Abs(_, u)) => taylor_coeff(p, u),
        (Term::App(p, q), RTerm::App(u, bag)) => {
            let mut c = taylor_coeff::<C>(p, u);
            for (t, k) in bag.multiplicities() {
                if c.is_zero() {
                    break;
                }
                c = c
                    .mul(&taylor_coeff::<C>(q, t).pow(k as u32))
                    .mul(&C::inv_factorial(k as u64));
            }
            c
        }
        _ => C::zero(),
    }
}

/// `T(src, s)`; a regular system is unfolded only as deep as `s` goes.
pub fn taylor_coeff_source<C: Semiring>(src: &Source, s: &RTerm) -> C {
    taylor_coeff(&src.at_depth(s.depth()), s)
}

pub fn taylor_truncated<C: Semiring>(
    src: impl Into<Source>,
    size_bound: usize,
) -> TruncatedExpansion<C> {
    let source = src.into();
    // an approximant of size k has depth below k
    let m = source.at_depth(size_bound);
    let mut memo = HashMap::new();
    let sum = enumerate::<C>(&m, size_bound, &mut memo)
        .into_iter()
        .collect();
    TruncatedExpansion {
        sum,
        size_bound,
        depth_bound: None,
        source,
    }
}

type Memo<C> = HashMap<(*const Term, usize), Vec<(RTerm, C)>>;

/// Approximants of `m` of size at most `budget`, walking the structure of
/// `m` and choosing a bag per application.
fn enumerate<C: Semiring>(m: &Term, budget: usize, memo: &mut Memo<C>) -> Vec<(RTerm, C)> {
    if budget == 0 {
        return Vec::new();
    }
    let key = (m as *const Term, budget);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let out = match m {
        Term::Bottom => Vec::new(),
        Term::Var(v) => vec![(RTerm::Var(v.clone()), C::one())],
        Term::Abs(h, p) => enumerate::<C>(p, budget - 1, memo)
            .into_iter()
            .map(|(s, c)| (RTerm::Abs(h.clone(), Box::new(s)), c))
            .collect(),
        Term::App(p, q) => {
            let heads = enumerate::<C>(p, budget - 1, memo);
            let min_head = heads.iter().map(|(s, _)| s.size()).min().unwrap_or(budget);
            let elems: Vec<(RTerm, C, usize)> =
                enumerate::<C>(q, budget - 1 - min_head.min(budget - 1), memo)
                    .into_iter()
                    .map(|(t, c)| {
                        let k = t.size();
                        (t, c, k)
                    })
                    .collect();
            let mut out = Vec::new();
            for (s, c) in &heads {
                let rest = budget - 1 - s.size();
                for (bag, cb) in bags(&elems, rest) {
                    out.push((RTerm::app(s.clone(), bag), c.mul(&cb)));
                }
            }
            out
        }
    };
    memo.insert(key, out.clone());
    out
}

/// Multisets over `elems` of total size at most `budget`, weighted by
/// `Π c_i^k_i / k_i!`.
fn bags<C: Semiring>(elems: &[(RTerm, C, usize)], budget: usize) -> Vec<(Bag, C)> {
    fn go<C: Semiring>(
        elems: &[(RTerm, C, usize)],
        i: usize,
        budget: usize,
        acc: &mut Vec<RTerm>,
        coeff: C,
        out: &mut Vec<(Bag, C)>,
    ) {
        if i == elems.len() {
            out.push((Bag::new(acc.clone()), coeff));
            return;
        }
        let (t, c, size) = &elems[i];
        let mut k = 0usize;
        let mut power = C::one();
        loop {
            go(
                elems,
                i + 1,
                budget - k * size,
                acc,
                coeff.mul(&power).mul(&C::inv_factorial(k as u64)),
                out,
            );
            if (k + 1) * size > budget {
                break;
            }
            k += 1;
            power = power.mul(c);
            acc.push(t.clone());
        }
        acc.truncate(acc.len() - k);
    }
    let mut out = Vec::new();
    go(elems, 0, budget, &mut Vec::new(), C::one(), &mut out);
    out
}

/// `Σ_{n ≤ degree_bound} 1/n! · [S]^n`, computed as literal repeated
/// multiset products.
pub fn promotion<C: Semiring>(s: &RSum<C>, degree_bound: usize) -> BagSum<C> {
    promotion_pruned(s, degree_bound, usize::MAX)
}

/// Like [`promotion`], dropping monomials whose total size exceeds
/// `size_bound` as soon as they appear (sizes only grow with `n`).
pub fn promotion_pruned<C: Semiring>(
    s: &RSum<C>,
    degree_bound: usize,
    size_bound: usize,
) -> BagSum<C> {
    let mut power: BagSum<C> = BagSum::single(Bag::empty());
    let mut out = power.clone();
    for n in 1..=degree_bound {
        let mut next = BagSum::zero();
        for (bag, c) in power.iter() {
            for (t, d) in s.iter() {
                let grown = bag.union(&Bag::new(vec![t.clone()]));
                if grown.size() <= size_bound {
                    next.add_term(c.mul(d), grown);
                }
            }
        }
        if next.is_zero() {
            break;
        }
        out.add_scaled(&C::inv_factorial(n as u64), &next);
        power = next;
    }
    out
}

/// Independent route to the truncated expansion:
/// `T(x) = x`, `T(λx.P) = λx.T(P)`, `T((P)Q) = (T(P)) T(Q)^!`.
pub fn taylor_by_promotion<C: Semiring>(m: &Term, size_bound: usize) -> RSum<C> {
    if size_bound == 0 {
        return RSum::zero();
    }
    match m {
        Term::Bottom => RSum::zero(),
        Term::Var(v) => RSum::single(RTerm::Var(v.clone())),
        Term::Abs(h, p) => taylor_by_promotion::<C>(p, size_bound - 1)
            .iter()
            .map(|(s, c)| (RTerm::Abs(h.clone(), Box::new(s.clone())), c.clone()))
            .collect(),
        Term::App(p, q) => {
            let heads = taylor_by_promotion::<C>(p, size_bound - 1);
            let args = taylor_by_promotion::<C>(q, size_bound - 1);
            let bang = promotion_pruned(&args, size_bound - 1, size_bound - 1);
            let mut out = RSum::zero();
            for (s, c) in heads.iter() {
                for (bag, d) in bang.iter() {
                    if s.size() + bag.size() < size_bound {
                        out.add_term(c.mul(d), RTerm::app(s.clone(), bag.clone()));
                    }
                }
            }
            out
        }
    }
}

/// `⌈m⌉` (all bags singletons) when `depth` is `None`, or `⌈m⌉_d`, whose
/// bags below depth `d` are empty. `None` when the approximant would need
/// an approximant of ⊥.
pub fn canonical_approximant(m: &Term, depth: Option<usize>) -> Option<RTerm> {
    match m {
        Term::Bottom => None,
        Term::Var(v) => Some(RTerm::Var(v.clone())),
        Term::Abs(h, p) => Some(RTerm::Abs(
            h.clone(),
            Box::new(canonical_approximant(p, depth)?),
        )),
        Term::App(p, q) => {
            let head = canonical_approximant(p, depth)?;
            let bag = match depth {
                Some(0) => Bag::empty(),
                d => Bag::new(vec![canonical_approximant(q, d.map(|d| d - 1))?]),
            };
            Some(RTerm::app(head, bag))
        }
    }
}

pub fn canonical_approximant_source(src: &Source, depth: usize) -> Option<RTerm> {
    canonical_approximant(&src.at_depth(depth), Some(depth))
}

/// Occurrences of the variable bound `cutoff` binders above, in `s`.
pub(crate) fn bound_occurrences(s: &RTerm, cutoff: usize) -> usize {
    match s {
        RTerm::Var(Var::Bound(i)) => usize::from(*i == cutoff),
        RTerm::Var(_) => 0,
        RTerm::Abs(_, b) => bound_occurrences(b, cutoff + 1),
        RTerm::App(f, bag) => {
            bound_occurrences(f, cutoff)
                + bag
                    .elems()
                    .iter()
                    .map(|u| bound_occurrences(u, cutoff))
                    .sum::<usize>()
        }
    }
}
