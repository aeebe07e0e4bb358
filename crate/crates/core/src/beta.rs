//! β-reduction: redex enumeration, single steps, head forms, traces, and
//! bounded exhaustive search over reduction graphs.
//!
//! Redexes are always listed leftmost-outermost (pre-order, function side
//! before argument side), which fixes the order of every search.

use std::collections::HashSet;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::lambda::{Position, Sel, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BetaError {
    #[error("no redex at position `{0}`")]
    NotARedex(Position),
    #[error("trace step {index} does not match a β-step of its predecessor")]
    InvalidTrace { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RedexInfo {
    pub position: Position,
    /// Number of argument edges above the redex.
    pub depth: usize,
    pub is_head: bool,
}

/// All redexes of `t` in leftmost-outermost order.
pub fn enumerate_redexes(t: &Term) -> Vec<RedexInfo> {
    fn go(t: &Term, path: &mut Vec<Sel>, depth: usize, out: &mut Vec<RedexInfo>) {
        match t {
            Term::Var(_) | Term::Bottom => {}
            Term::Abs(_, b) => {
                path.push(Sel::Body);
                go(b, path, depth, out);
                path.pop();
            }
            Term::App(f, a) => {
                if f.is_abs() {
                    out.push(RedexInfo {
                        position: Position(path.clone()),
                        depth,
                        is_head: false,
                    });
                }
                path.push(Sel::Fun);
                go(f, path, depth, out);
                path.pop();
                path.push(Sel::Arg);
                go(a, path, depth + 1, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), 0, &mut out);
    if let Some(head) = head_redex_position(t) {
        for r in &mut out {
            r.is_head = r.position == head;
        }
    }
    out
}

/// Position of the head redex `λx1…xm.(λx.P)Q M1…Mn`, if any.
pub fn head_redex_position(t: &Term) -> Option<Position> {
    let mut path = Vec::new();
    let mut cur = t;
    while let Term::Abs(_, b) = cur {
        path.push(Sel::Body);
        cur = b;
    }
    let (_, args) = cur.spine();
    if args.is_empty() {
        return None;
    }
    path.extend(std::iter::repeat_n(Sel::Fun, args.len() - 1));
    let node = cur.subterm(&Position(vec![Sel::Fun; args.len() - 1]))?;
    node.is_redex().then_some(Position(path))
}

/// Fires the redex at `p`.
pub fn beta_step(t: &Term, p: &Position) -> Result<Term, BetaError> {
    let not_redex = || BetaError::NotARedex(p.clone());
    t.replace_at(&p.0, |sub| match sub {
        Term::App(f, a) => match &**f {
            Term::Abs(_, body) => Ok(body.instantiate(a)),
            _ => Err(not_redex()),
        },
        _ => Err(not_redex()),
    })
    .unwrap_or_else(|| Err(not_redex()))
}

/// Redex information for the redex at `p` in `t`.
pub fn redex_at(t: &Term, p: &Position) -> Result<RedexInfo, BetaError> {
    match t.subterm(p) {
        Some(sub) if sub.is_redex() => Ok(RedexInfo {
            position: p.clone(),
            depth: p.depth(),
            is_head: head_redex_position(t).as_ref() == Some(p),
        }),
        _ => Err(BetaError::NotARedex(p.clone())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Var(Var),
    /// ⊥ in head position, treated as an inert pseudo-variable.
    Bottom,
}

/// The two head forms of a λ-term. Arguments live under `binders.len()`
/// binders, so their indices are relative to that scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadForm {
    Normal {
        binders: Vec<String>,
        head: Head,
        args: Vec<Term>,
    },
    Redex {
        binders: Vec<String>,
        fun: Term,
        arg: Term,
        tail: Vec<Term>,
    },
}

impl HeadForm {
    pub fn binders(&self) -> &[String] {
        match self {
            HeadForm::Normal { binders, .. } | HeadForm::Redex { binders, .. } => binders,
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, HeadForm::Normal { .. })
    }

    /// Rebuilds the analyzed term.
    pub fn reassemble(&self) -> Term {
        let (binders, core) = match self {
            HeadForm::Normal {
                binders,
                head,
                args,
            } => {
                let h = match head {
                    Head::Var(v) => Term::Var(v.clone()),
                    Head::Bottom => Term::Bottom,
                };
                (binders, Term::apps(h, args.iter().cloned()))
            }
            HeadForm::Redex {
                binders,
                fun,
                arg,
                tail,
            } => (
                binders,
                Term::apps(Term::app(fun.clone(), arg.clone()), tail.iter().cloned()),
            ),
        };
        binders.iter().rev().fold(core, |body, name| {
            Term::Abs(crate::lambda::Hint::new(name.clone()), Box::new(body))
        })
    }
}

pub fn head_form(t: &Term) -> HeadForm {
    let mut binders = Vec::new();
    let mut cur = t;
    while let Term::Abs(h, b) = cur {
        binders.push(h.0.clone());
        cur = b;
    }
    let (head, args) = cur.spine();
    let args: Vec<Term> = args.into_iter().cloned().collect();
    match head {
        Term::Abs(..) if !args.is_empty() => {
            let mut it = args.into_iter();
            let arg = it.next().expect("non-empty");
            HeadForm::Redex {
                binders,
                fun: head.clone(),
                arg,
                tail: it.collect(),
            }
        }
        Term::Var(v) => HeadForm::Normal {
            binders,
            head: Head::Var(v.clone()),
            args,
        },
        Term::Bottom => HeadForm::Normal {
            binders,
            head: Head::Bottom,
            args,
        },
        Term::Abs(..) | Term::App(..) => unreachable!("binders were stripped and spine is maximal"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub redex: RedexInfo,
    pub result: Term,
}

/// A recorded β-reduction sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub start: Term,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn new(start: Term) -> Self {
        Trace {
            start,
            steps: Vec::new(),
        }
    }

    pub fn end(&self) -> &Term {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Fires the redex at `p` in the current end term.
    pub fn fire(&mut self, p: &Position) -> Result<&Term, BetaError> {
        let redex = redex_at(self.end(), p)?;
        let result = beta_step(self.end(), p)?;
        self.steps.push(Step { redex, result });
        Ok(self.end())
    }

    /// Replays `other` inside the context `prefix` of the current end term.
    pub fn extend_lifted(&mut self, prefix: &[Sel], other: &Trace) -> Result<(), BetaError> {
        for step in &other.steps {
            self.fire(&step.redex.position.prefixed(prefix))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), BetaError> {
        let mut cur = &self.start;
        for (index, step) in self.steps.iter().enumerate() {
            let expected = redex_at(cur, &step.redex.position)
                .ok()
                .filter(|r| *r == step.redex)
                .and_then(|_| beta_step(cur, &step.redex.position).ok());
            if expected.as_ref() != Some(&step.result) {
                return Err(BetaError::InvalidTrace { index });
            }
            cur = &step.result;
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.result))
    }

    /// JSON array of `{position, depth, kind, term}` objects.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.steps
                .iter()
                .map(|s| {
                    json!({
                        "position": s.redex.position.to_string(),
                        "depth": s.redex.depth,
                        "kind": if s.redex.is_head { "head" } else { "internal" },
                        "term": s.result.to_string(),
                    })
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// No redex of the requested kind remains.
    Normal,
    /// Fuel ran out first.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub trace: Trace,
    pub outcome: Outcome,
}

fn run_with(t: &Term, fuel: usize, mut pick: impl FnMut(&Term) -> Option<Position>) -> Run {
    let mut trace = Trace::new(t.clone());
    for _ in 0..fuel {
        match pick(trace.end()) {
            Some(p) => {
                trace.fire(&p).expect("picked position is a redex");
            }
            None => {
                return Run {
                    trace,
                    outcome: Outcome::Normal,
                }
            }
        }
    }
    let outcome = if pick(trace.end()).is_none() {
        Outcome::Normal
    } else {
        Outcome::Exhausted
    };
    Run { trace, outcome }
}

/// Fires head redexes until a head normal form or until `fuel` steps.
pub fn head_reduce(t: &Term, fuel: usize) -> Run {
    run_with(t, fuel, head_redex_position)
}

/// Leftmost-outermost normalization with at most `fuel` steps.
pub fn normalize_lo(t: &Term, fuel: usize) -> Run {
    run_with(t, fuel, |u| {
        enumerate_redexes(u).into_iter().next().map(|r| r.position)
    })
}

/// True iff every fired redex lies at depth at least `d`.
pub fn validate_min_depth(tr: &Trace, d: usize) -> bool {
    tr.steps.iter().all(|s| s.redex.depth >= d)
}

/// Splits a trace of shape `head* internal*`; `None` for any other shape.
pub fn head_internal_split(tr: &Trace) -> Option<(Trace, Trace)> {
    let k = tr.steps.iter().take_while(|s| s.redex.is_head).count();
    if tr.steps[k..].iter().any(|s| s.redex.is_head) {
        return None;
    }
    let head = Trace {
        start: tr.start.clone(),
        steps: tr.steps[..k].to_vec(),
    };
    let internal = Trace {
        start: head.end().clone(),
        steps: tr.steps[k..].to_vec(),
    };
    Some((head, internal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximal length of the explored reduction sequences.
    pub budget: usize,
    /// Only redexes at depth at least this are fired.
    pub min_depth: usize,
    /// Never fire the head redex.
    pub internal_only: bool,
}

impl SearchLimits {
    pub fn new(budget: usize, min_depth: usize) -> Self {
        SearchLimits {
            budget,
            min_depth,
            internal_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    /// Shortest witness in breadth-first, leftmost-outermost order.
    pub witness: Option<Trace>,
    /// Distinct terms visited.
    pub states: usize,
    /// True when the whole graph up to the budget was exhausted without
    /// reaching a term that still had unexplored successors.
    pub closed: bool,
}

/// Breadth-first search over reduction sequences of length at most
/// `budget` firing only redexes of depth at least `min_depth`.
pub fn bounded_search(
    t: &Term,
    goal: impl Fn(&Term) -> bool,
    budget: usize,
    min_depth: usize,
) -> Option<Trace> {
    search(t, goal, SearchLimits::new(budget, min_depth)).witness
}

pub fn search(t: &Term, goal: impl Fn(&Term) -> bool, limits: SearchLimits) -> SearchReport {
    // parent index and fired position, indexed by discovery order
    let mut nodes: Vec<(usize, Position)> = vec![(usize::MAX, Position::root())];
    let mut seen: HashSet<Term> = HashSet::new();
    seen.insert(t.clone());
    let rebuild = |nodes: &Vec<(usize, Position)>, mut idx: usize| {
        let mut path = Vec::new();
        while idx != 0 {
            path.push(nodes[idx].1.clone());
            idx = nodes[idx].0;
        }
        let mut tr = Trace::new(t.clone());
        for p in path.iter().rev() {
            tr.fire(p).expect("recorded step replays");
        }
        tr
    };
    if goal(t) {
        return SearchReport {
            witness: Some(Trace::new(t.clone())),
            states: 1,
            closed: false,
        };
    }
    let mut frontier: Vec<(usize, Term)> = vec![(0, t.clone())];
    let mut closed = true;
    for level in 0..=limits.budget {
        let mut next = Vec::new();
        for (idx, term) in &frontier {
            let redexes: Vec<RedexInfo> = enumerate_redexes(term)
                .into_iter()
                .filter(|r| r.depth >= limits.min_depth && !(limits.internal_only && r.is_head))
                .collect();
            if level == limits.budget {
                if !redexes.is_empty() {
                    closed = false;
                }
                continue;
            }
            for r in redexes {
                let reduct = beta_step(term, &r.position).expect("enumerated redex");
                if seen.contains(&reduct) {
                    continue;
                }
                seen.insert(reduct.clone());
                nodes.push((*idx, r.position));
                let id = nodes.len() - 1;
                if goal(&reduct) {
                    return SearchReport {
                        witness: Some(rebuild(&nodes, id)),
                        states: seen.len(),
                        closed: false,
                    };
                }
                next.push((id, reduct));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    SearchReport {
        witness: None,
        states: seen.len(),
        closed,
    }
}

/// Matches `t` against `pattern`, where free variables named `?…` are holes
/// standing for arbitrary subterms.
pub fn matches_pattern(pattern: &Term, t: &Term) -> bool {
    match (pattern, t) {
        (Term::Var(Var::Free(h)), _) if h.starts_with('?') => true,
        (Term::Abs(_, p), Term::Abs(_, b)) => matches_pattern(p, b),
        (Term::App(pf, pa), Term::App(f, a)) => matches_pattern(pf, f) && matches_pattern(pa, a),
        _ => pattern == t,
    }
}

fn is_hole(p: &Term) -> bool {
    matches!(p, Term::Var(Var::Free(h)) if h.starts_with('?'))
}

type Path = Vec<Sel>;

fn prefixed(prefix: &[Sel], steps: Vec<Path>) -> Vec<Path> {
    steps
        .into_iter()
        .map(|s| prefix.iter().copied().chain(s).collect())
        .collect()
}

struct Factorized {
    calls: usize,
    cut: bool,
}

impl Factorized {
    /// Shortest factorized reduction of `t` to an instance of `pat`: head
    /// steps, then independent reductions of the components of the head form.
    fn reach(
        &mut self,
        t: &Term,
        pat: &Term,
        budget: usize,
        allow_head: bool,
    ) -> Option<Vec<Path>> {
        if is_hole(pat) {
            return Some(Vec::new());
        }
        let mut h = t.clone();
        let mut head: Vec<Path> = Vec::new();
        let mut best: Option<Vec<Path>> = None;
        loop {
            let j = head.len();
            if best.as_ref().is_some_and(|b| j >= b.len()) {
                break;
            }
            if let Some(rest) = self.internal(&h, pat, budget - j) {
                if best.as_ref().is_none_or(|b| j + rest.len() < b.len()) {
                    best = Some(head.iter().cloned().chain(rest).collect());
                }
            }
            if !allow_head {
                break;
            }
            let Some(p) = head_redex_position(&h) else {
                break;
            };
            if j == budget {
                self.cut = true;
                break;
            }
            h = beta_step(&h, &p).expect("head redex");
            head.push(p.0);
        }
        best
    }

    /// Reductions of `h` that never fire its head redex.
    fn internal(&mut self, h: &Term, pat: &Term, budget: usize) -> Option<Vec<Path>> {
        self.calls += 1;
        match (pat, h) {
            _ if is_hole(pat) => Some(Vec::new()),
            (Term::Abs(_, pb), Term::Abs(_, hb)) => {
                Some(prefixed(&[Sel::Body], self.internal(hb, pb, budget)?))
            }
            (Term::App(pf, pa), Term::App(hf, ha)) => {
                let fun = match (&**pf, &**hf) {
                    _ if is_hole(pf) => Vec::new(),
                    (Term::Abs(_, pb), Term::Abs(_, hb)) => {
                        prefixed(&[Sel::Fun, Sel::Body], self.reach(hb, pb, budget, true)?)
                    }
                    (_, Term::Abs(..)) => return None,
                    _ => prefixed(&[Sel::Fun], self.internal(hf, pf, budget)?),
                };
                let arg = prefixed(&[Sel::Arg], self.reach(ha, pa, budget - fun.len(), true)?);
                Some(fun.into_iter().chain(arg).collect())
            }
            _ => (pat == h).then(Vec::new),
        }
    }
}

/// Goal-directed search for a reduction of `t` to an instance of `pattern`
/// (holes are free variables named `?…`).
///
/// Only factorized reductions are explored: head steps first, then
/// independent reductions of the components of the resulting head form,
/// each factorized in turn. Every reduction has such a factorization, so an
/// unbounded run would be complete; `budget` bounds the length of the
/// factorized sequence. With `internal_only`, the root's head steps are
/// forbidden. `states` counts the component problems examined.
pub fn factorized_search(
    t: &Term,
    pattern: &Term,
    budget: usize,
    internal_only: bool,
) -> SearchReport {
    let mut f = Factorized {
        calls: 0,
        cut: false,
    };
    let found = f.reach(t, pattern, budget, !internal_only);
    let witness = found.map(|steps| {
        let mut tr = Trace::new(t.clone());
        for p in steps {
            tr.fire(&Position(p)).expect("factorized step replays");
        }
        tr
    });
    SearchReport {
        closed: witness.is_none() && !f.cut,
        witness,
        states: f.calls,
    }
}

/// Every term reachable in at most `budget` steps, in breadth-first order,
/// each with a shortest trace.
pub fn reducts_within(t: &Term, budget: usize) -> Vec<Trace> {
    let mut out = vec![Trace::new(t.clone())];
    let mut seen: HashSet<Term> = HashSet::new();
    seen.insert(t.clone());
    let mut frontier = vec![0usize];
    for _ in 0..budget {
        let mut next = Vec::new();
        for &i in &frontier {
            let end = out[i].end().clone();
            for r in enumerate_redexes(&end) {
                let reduct = beta_step(&end, &r.position).expect("enumerated redex");
                if seen.insert(reduct) {
                    let mut tr = out[i].clone();
                    tr.fire(&r.position).expect("enumerated redex");
                    out.push(tr);
                    next.push(out.len() - 1);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{free_vars, parse_term};

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    const DELTA_DELTA: &str = "(\\x.(x)x)\\x.(x)x";
    const Y: &str = "\\f.(\\x.(f)(x)x)\\x.(f)(x)x";

    #[test]
    fn redex_enumeration_examples() {
        let rs = enumerate_redexes(&t("(\\x.x)y"));
        assert_eq!(
            rs,
            vec![RedexInfo {
                position: Position::root(),
                depth: 0,
                is_head: true
            }]
        );
        let rs = enumerate_redexes(&t("\\z.(z)((\\x.x)y)"));
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].depth, 1);
        assert!(!rs[0].is_head);
        assert_eq!(rs[0].position.to_string(), "B.A");
        let rs = enumerate_redexes(&t(DELTA_DELTA));
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].depth, 0);
    }

    #[test]
    fn beta_step_examples() {
        assert_eq!(
            beta_step(&t("(\\x.x)y"), &Position::root()).unwrap(),
            t("y")
        );
        assert_eq!(
            beta_step(&t(DELTA_DELTA), &Position::root()).unwrap(),
            t(DELTA_DELTA)
        );
        assert!(matches!(
            beta_step(&t("(x)y"), &Position::root()),
            Err(BetaError::NotARedex(_))
        ));
        // (Y)m → (\x.(m)(x)x)\x.(m)(x)x → (m)(\x.(m)(x)x)\x.(m)(x)x
        let half = t("\\x.(m)(x)x");
        let run = head_reduce(&Term::app(t(Y), t("m")), 2);
        assert_eq!(
            run.trace.end(),
            &Term::app(t("m"), Term::app(half.clone(), half))
        );
    }

    #[test]
    fn head_forms() {
        match head_form(&t("\\x.(y)x")) {
            HeadForm::Normal {
                binders,
                head,
                args,
            } => {
                assert_eq!(binders, vec!["x"]);
                assert_eq!(head, Head::Var(Var::Free("y".into())));
                assert_eq!(args, vec![Term::bound(0)]);
            }
            other => panic!("{other:?}"),
        }
        match head_form(&t("(\\x.m)n q")) {
            HeadForm::Redex {
                binders,
                fun,
                arg,
                tail,
            } => {
                assert!(binders.is_empty());
                assert_eq!(fun, t("\\x.m"));
                assert_eq!(arg, t("n"));
                assert_eq!(tail, vec![t("q")]);
            }
            other => panic!("{other:?}"),
        }
        match head_form(&t("\\x.\\y.x")) {
            HeadForm::Normal {
                binders,
                head,
                args,
            } => {
                assert_eq!(binders, vec!["x", "y"]);
                assert_eq!(head, Head::Var(Var::Bound(1)));
                assert!(args.is_empty());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            head_form(&t("(_|_)x")),
            HeadForm::Normal {
                binders: vec![],
                head: Head::Bottom,
                args: vec![t("x")]
            }
        );
    }

    #[test]
    fn head_reduction_examples() {
        let run = head_reduce(&t("(\\x.x)y"), 5);
        assert_eq!(run.trace.len(), 1);
        assert_eq!(run.outcome, Outcome::Normal);
        assert_eq!(run.trace.end(), &t("y"));

        let dd = t(DELTA_DELTA);
        let run = head_reduce(&dd, 7);
        assert_eq!(run.trace.len(), 7);
        assert_eq!(run.outcome, Outcome::Exhausted);
        assert!(run.trace.terms().all(|u| *u == dd));
        assert_eq!(head_reduce(&dd, 7), run);
    }

    #[test]
    fn min_depth_validation() {
        let mut tr = Trace::new(t("\\z.(z)((\\x.x)y)"));
        tr.fire(&Position::parse("B.A").unwrap()).unwrap();
        assert!(validate_min_depth(&tr, 0));
        assert!(validate_min_depth(&tr, 1));
        assert!(!validate_min_depth(&tr, 2));
    }

    #[test]
    fn stratified_fixpoint_segment() {
        // (M)(Y)M →≥1 (M)(M)(Y)M: the unfolding happens under one argument edge.
        let ym = Term::app(t(Y), t("m"));
        let mut tr = Trace::new(Term::app(t("m"), ym));
        tr.fire(&Position::parse("A").unwrap()).unwrap();
        tr.fire(&Position::parse("A").unwrap()).unwrap();
        assert!(validate_min_depth(&tr, 1));
        match tr.end() {
            Term::App(f, a) => {
                assert_eq!(**f, t("m"));
                assert!(matches!(&**a, Term::App(g, _) if **g == t("m")));
            }
            other => panic!("{other:?}"),
        }
        tr.validate().unwrap();
    }

    #[test]
    fn search_examples() {
        let found = bounded_search(&t("(\\x.x)y"), |u| *u == t("y"), 1, 0).unwrap();
        assert_eq!(found.len(), 1);
        let zero = t("\\f.\\x.x");
        assert!(bounded_search(&zero, |u| *u != zero, 10, 0).is_none());
        let succ = t("\\n.\\f.\\x.(n)f (f)x");
        let one = t("\\f.\\x.(f)x");
        let found = bounded_search(&Term::app(succ, zero), |u| *u == one, 6, 0).unwrap();
        assert_eq!(found.end(), &one);
        found.validate().unwrap();
    }

    #[test]
    fn both_orders_reach_the_normal_form() {
        let m = t("(\\x.x)((\\z.z)y)");
        let rs = enumerate_redexes(&m);
        assert_eq!(rs.len(), 2);
        for r in rs {
            let first = beta_step(&m, &r.position).unwrap();
            assert!(bounded_search(&first, |u| *u == t("y"), 1, 0).is_some());
        }
    }

    #[test]
    fn search_respects_min_depth() {
        let m = t("(\\x.x)((\\z.z)y)");
        let found = bounded_search(&m, |u| *u == t("(\\x.x)y"), 3, 1).unwrap();
        assert!(validate_min_depth(&found, 1));
        assert!(bounded_search(&m, |u| *u == t("y"), 5, 1).is_none());
    }

    #[test]
    fn splitting_head_and_internal() {
        let mut tr = Trace::new(t("(\\a.(\\b.(c)((\\d.d)e))f)g"));
        tr.fire(&Position::root()).unwrap();
        tr.fire(&Position::root()).unwrap();
        tr.fire(&Position::parse("A").unwrap()).unwrap();
        let (h, i) = head_internal_split(&tr).unwrap();
        assert_eq!((h.len(), i.len()), (2, 1));
        assert_eq!(i.start, *h.end());

        let mut bad = Trace::new(t("(\\a.a)((\\d.d)e)"));
        bad.fire(&Position::parse("A").unwrap()).unwrap();
        bad.fire(&Position::root()).unwrap();
        assert!(head_internal_split(&bad).is_none());

        let (h, i) = head_internal_split(&Trace::new(t("x"))).unwrap();
        assert!(h.is_empty() && i.is_empty());
    }

    #[test]
    fn free_variables_do_not_grow() {
        let m = t("(\\x.(x)w)\\y.(y)v");
        for r in enumerate_redexes(&m) {
            let n = beta_step(&m, &r.position).unwrap();
            assert!(free_vars(&n).is_subset(&free_vars(&m)));
        }
    }

    #[test]
    fn trace_json_shape() {
        let mut tr = Trace::new(t("(\\x.x)y"));
        tr.fire(&Position::root()).unwrap();
        let v = tr.to_json();
        assert_eq!(
            v,
            serde_json::json!([{"position": "", "depth": 0, "kind": "head", "term": "y"}])
        );
    }

    #[test]
    fn factorized_search_agrees_with_breadth_first() {
        let cases = [
            ("(\\x.(x)x)(\\y.y)z", t("(z)z"), true),
            (
                "(\\x.(x)x)(\\y.y)z",
                Term::app(Term::var("?a"), Term::var("?b")),
                true,
            ),
            ("(\\x.(x)x)(\\y.y)z", Term::lam("w", Term::var("?a")), false),
            ("((\\x.\\y.(y)x)\\z.z)w", t("(w)\\z.z"), true),
            ("(\\f.(f)(f)a)\\u.u", t("a"), true),
        ];
        for (src, p, expected) in cases {
            let (m, pat) = (t(src), p.to_string());
            let flat = search(&m, |u| matches_pattern(&p, u), SearchLimits::new(6, 0));
            let fact = factorized_search(&m, &p, 6, false);
            assert_eq!(flat.witness.is_some(), expected, "{src} -> {pat}");
            assert_eq!(fact.witness.is_some(), expected, "{src} -> {pat}");
            if let Some(w) = fact.witness {
                assert!(w.validate().is_ok());
                assert!(matches_pattern(&p, w.end()));
            }
        }
        // the root redex may not be fired
        assert!(factorized_search(&t("(\\x.x)y"), &t("y"), 4, true)
            .witness
            .is_none());
        assert!(factorized_search(&t(DELTA_DELTA), &t("z"), 5, false)
            .witness
            .is_none());
    }
}
