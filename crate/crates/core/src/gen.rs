//! Exhaustive and seeded random generation of terms for property suites.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beta::{beta_step, enumerate_redexes, Trace};
use crate::lambda::{Hint, Term, Var};
use crate::resource::{Bag, RTerm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn binder_name(depth: usize) -> Hint {
    const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "g"];
    Hint::new(
        NAMES
            .get(depth)
            .map_or_else(|| format!("v{depth}"), |s| s.to_string()),
    )
}

/// Every λ-term of size at most `max_size` whose free variables are among
/// `free`, up to α.
pub fn lambda_terms(max_size: usize, free: &[&str]) -> Vec<Term> {
    let mut memo = HashMap::new();
    (1..=max_size)
        .flat_map(|s| lambda_exact(s, 0, free, &mut memo))
        .collect()
}

fn lambda_exact(
    size: usize,
    depth: usize,
    free: &[&str],
    memo: &mut HashMap<(usize, usize), Vec<Term>>,
) -> Vec<Term> {
    if let Some(v) = memo.get(&(size, depth)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if size == 1 {
        out.extend((0..depth).map(Term::bound));
        out.extend(free.iter().map(|x| Term::var(x)));
    } else {
        for b in lambda_exact(size - 1, depth + 1, free, memo) {
            out.push(Term::Abs(binder_name(depth), Box::new(b)));
        }
        for fs in 1..size - 1 {
            let funs = lambda_exact(fs, depth, free, memo);
            let args = lambda_exact(size - 1 - fs, depth, free, memo);
            for f in &funs {
                for a in &args {
                    out.push(Term::app(f.clone(), a.clone()));
                }
            }
        }
    }
    memo.insert((size, depth), out.clone());
    out
}

/// Every resource term of size at most `max_size` whose free variables are
/// among `free`, up to α and bag reordering.
pub fn resource_terms(max_size: usize, free: &[&str]) -> Vec<RTerm> {
    let mut memo = HashMap::new();
    (1..=max_size)
        .flat_map(|s| resource_exact(s, 0, free, &mut memo))
        .collect()
}

type RMemo = HashMap<(usize, usize), Vec<RTerm>>;

fn resource_exact(size: usize, depth: usize, free: &[&str], memo: &mut RMemo) -> Vec<RTerm> {
    if let Some(v) = memo.get(&(size, depth)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if size == 1 {
        out.extend((0..depth).map(RTerm::bound));
        out.extend(free.iter().map(|x| RTerm::var(x)));
    } else {
        for b in resource_exact(size - 1, depth + 1, free, memo) {
            out.push(RTerm::Abs(binder_name(depth), Box::new(b)));
        }
        // candidates for bag elements, in a fixed order
        let mut elems: Vec<RTerm> = Vec::new();
        for s in 1..size - 1 {
            elems.extend(resource_exact(s, depth, free, memo));
        }
        for hs in 1..size {
            let heads = resource_exact(hs, depth, free, memo);
            let bags = multisets(&elems, size - 1 - hs);
            for h in &heads {
                for b in &bags {
                    out.push(RTerm::app(h.clone(), b.clone()));
                }
            }
        }
    }
    memo.insert((size, depth), out.clone());
    out
}

/// Multisets over `elems` whose sizes sum to exactly `total`.
fn multisets(elems: &[RTerm], total: usize) -> Vec<Bag> {
    fn go(elems: &[RTerm], from: usize, total: usize, acc: &mut Vec<RTerm>, out: &mut Vec<Bag>) {
        if total == 0 {
            out.push(Bag::new(acc.clone()));
            return;
        }
        for i in from..elems.len() {
            let k = elems[i].size();
            if k <= total {
                acc.push(elems[i].clone());
                go(elems, i, total - k, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(elems, 0, total, &mut Vec::new(), &mut out);
    out
}

/// Occurrences of the free variable `x`.
pub fn occurrences(t: &RTerm, x: &str) -> usize {
    match t {
        RTerm::Var(Var::Free(n)) => usize::from(n == x),
        RTerm::Var(_) => 0,
        RTerm::Abs(_, b) => occurrences(b, x),
        RTerm::App(f, bag) => {
            occurrences(f, x) + bag.elems().iter().map(|u| occurrences(u, x)).sum::<usize>()
        }
    }
}

/// A bag of `n` elements drawn from `pool`.
pub fn random_bag<R: Rng>(rng: &mut R, pool: &[RTerm], n: usize) -> Bag {
    (0..n)
        .map(|_| pool.choose(rng).expect("nonempty pool").clone())
        .collect()
}

/// A uniformly chosen term of `pool` satisfying `keep`, or `None` after
/// 10 000 rejections.
pub fn pick<'a, R: Rng>(
    rng: &mut R,
    pool: &'a [Term],
    keep: impl Fn(&Term) -> bool,
) -> Option<&'a Term> {
    (0..10_000)
        .map(|_| pool.choose(rng).expect("nonempty pool"))
        .find(|t| keep(t))
}

/// A random β-trace of at most `max_len` steps, each firing a uniformly
/// chosen redex.
pub fn random_trace<R: Rng>(rng: &mut R, start: &Term, max_len: usize) -> Trace {
    let len = rng.gen_range(0..=max_len);
    let mut tr = Trace::new(start.clone());
    for _ in 0..len {
        let rs = enumerate_redexes(tr.end());
        let Some(r) = rs.choose(rng) else { break };
        let p = r.position.clone();
        debug_assert!(beta_step(tr.end(), &p).is_ok());
        tr.fire(&p).expect("enumerated redex");
    }
    tr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        // x, y ; \a.a, \a.x, \a.y
        assert_eq!(lambda_terms(1, &["x", "y"]).len(), 2);
        assert_eq!(lambda_terms(2, &["x", "y"]).len(), 5);
        // size 3 adds \a.\b.{a,b,x,y} and (u)v for u, v in {x, y}
        assert_eq!(lambda_terms(3, &["x", "y"]).len(), 5 + 4 + 4);
        // resource size 2 also has (x)1 and (y)1
        assert_eq!(resource_terms(2, &["x", "y"]).len(), 7);
        let all = resource_terms(5, &["x"]);
        let set: std::collections::BTreeSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        assert!(all.iter().all(|t| t.size() <= 5));
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let pool = lambda_terms(4, &["x"]);
        let a: Vec<_> = (0..5)
            .map(|_| ())
            .scan(rng(7), |r, _| pick(r, &pool, |_| true).cloned())
            .collect();
        let b: Vec<_> = (0..5)
            .map(|_| ())
            .scan(rng(7), |r, _| pick(r, &pool, |_| true).cloned())
            .collect();
        assert_eq!(a, b);
    }
}
