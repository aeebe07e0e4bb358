//! Multilinear substitution `u⟨t̄/x⟩`: the sum, over all ways of handing
//! out the elements of `t̄` to the occurrences of `x`, of the resulting
//! terms. It is 0 when the counts differ.

use super::{Bag, BagSum, RSum, RTerm};
use crate::lambda::Var;
use crate::semiring::Semiring;

#[derive(Clone, Copy)]
enum Target<'a> {
    Free(&'a str),
    /// The index bound by the binder just above the scanned term; other
    /// indices pointing past it are decremented.
    Bound,
}

impl Target<'_> {
    fn hits(self, v: &Var, cutoff: usize) -> bool {
        match (self, v) {
            (Target::Free(x), Var::Free(n)) => n == x,
            (Target::Bound, Var::Bound(i)) => *i == cutoff,
            _ => false,
        }
    }
}

fn occurrences(t: &RTerm, target: Target, cutoff: usize) -> usize {
    match t {
        RTerm::Var(v) => usize::from(target.hits(v, cutoff)),
        RTerm::Abs(_, b) => occurrences(b, target, cutoff + 1),
        RTerm::App(f, bag) => {
            occurrences(f, target, cutoff)
                + bag
                    .elems()
                    .iter()
                    .map(|u| occurrences(u, target, cutoff))
                    .sum::<usize>()
        }
    }
}

/// Replaces the occurrences of the target, in pre-order, by `args[next..]`.
fn fill(t: &RTerm, target: Target, cutoff: usize, args: &[&RTerm], next: &mut usize) -> RTerm {
    match t {
        RTerm::Var(v) if target.hits(v, cutoff) => {
            let arg = args[*next];
            *next += 1;
            arg.shift(cutoff, 0)
        }
        RTerm::Var(Var::Bound(i)) if matches!(target, Target::Bound) && *i > cutoff => {
            RTerm::bound(i - 1)
        }
        RTerm::Var(v) => RTerm::Var(v.clone()),
        RTerm::Abs(h, b) => {
            RTerm::Abs(h.clone(), Box::new(fill(b, target, cutoff + 1, args, next)))
        }
        RTerm::App(f, bag) => {
            let head = fill(f, target, cutoff, args, next);
            let elems = bag
                .elems()
                .iter()
                .map(|u| fill(u, target, cutoff, args, next))
                .collect();
            RTerm::app(head, Bag::new(elems))
        }
    }
}

/// Rearranges `v` into the next lexicographic permutation; false when `v`
/// was the last one.
fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v
        .iter()
        .rposition(|x| *x > v[i])
        .expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Distinct orderings of the bag, each weighted by the number of literal
/// permutations collapsing onto it (the product of the multiplicities'
/// factorials).
fn weighted_orderings<C: Semiring>(bag: &Bag) -> (C, Vec<Vec<&RTerm>>) {
    let weight = bag
        .multiplicities()
        .iter()
        .fold(C::one(), |acc, (_, k)| acc.mul(&C::factorial(*k as u64)));
    let mut cur: Vec<&RTerm> = bag.elems().iter().collect();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    (weight, out)
}

fn subst_seq<C: Semiring>(us: &[RTerm], target: Target, bag: &Bag) -> LinSeq<C> {
    let n: usize = us.iter().map(|u| occurrences(u, target, 0)).sum();
    let mut out = Vec::new();
    if n != bag.len() {
        return out;
    }
    let (weight, orders) = weighted_orderings::<C>(bag);
    for order in orders {
        let mut next = 0;
        let filled = us
            .iter()
            .map(|u| fill(u, target, 0, &order, &mut next))
            .collect();
        out.push((weight.clone(), filled));
    }
    out
}

type LinSeq<C> = Vec<(C, Vec<RTerm>)>;

/// `u⟨bag/x⟩` for a free variable `x`.
pub fn msubst<C: Semiring>(u: &RTerm, x: &str, bag: &Bag) -> RSum<C> {
    subst_seq::<C>(std::slice::from_ref(u), Target::Free(x), bag)
        .into_iter()
        .map(|(c, mut v)| (v.pop().expect("one term"), c))
        .collect()
}

/// `ū⟨bag/x⟩` for a monomial `ū`.
pub fn msubst_monomial<C: Semiring>(u: &Bag, x: &str, bag: &Bag) -> BagSum<C> {
    subst_seq::<C>(u.elems(), Target::Free(x), bag)
        .into_iter()
        .map(|(c, v)| (Bag::new(v), c))
        .collect()
}

/// Contracts the body of `λ.body` against `bag`: substitutes for index 0
/// and lowers the remaining indices.
pub fn msubst_bound<C: Semiring>(body: &RTerm, bag: &Bag) -> RSum<C> {
    subst_seq::<C>(std::slice::from_ref(body), Target::Bound, bag)
        .into_iter()
        .map(|(c, mut v)| (v.pop().expect("one term"), c))
        .collect()
}

/// Reference version enumerating all `n!` bijections one by one.
pub fn msubst_literal<C: Semiring>(u: &RTerm, x: &str, bag: &Bag) -> RSum<C> {
    let target = Target::Free(x);
    let n = occurrences(u, target, 0);
    let mut out = RSum::zero();
    if n != bag.len() {
        return out;
    }
    let elems: Vec<&RTerm> = bag.elems().iter().collect();
    let mut idx: Vec<usize> = (0..n).collect();
    // every permutation of distinct indices, in lexicographic order
    loop {
        let order: Vec<&RTerm> = idx.iter().map(|&i| elems[i]).collect();
        let mut next = 0;
        out.add_term(C::one(), fill(u, target, 0, &order, &mut next));
        if !next_permutation(&mut idx) {
            break;
        }
    }
    out
}
