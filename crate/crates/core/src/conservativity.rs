//! Finite conservativity: the mashup relation between λ-terms and
//! approximants of their reducts, extraction of β-reductions from it, the
//! commutation of normalization with Taylor expansion on truncations, and
//! checking of stratified uniform reduction evidence.

use std::collections::HashMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::beta::{normalize_lo, reducts_within, Outcome, Trace};
use crate::lambda::{Position, Sel, Term, Var};
use crate::resource::{normalize_sum, restrict_below_depth, RSum, RTerm};
use crate::semiring::Semiring;
use crate::taylor::{
    bundle_beta_step, canonical_approximant, taylor_truncated, BundleError, BundleWitness,
    Certification, Source,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MashupRule {
    Var,
    Abs(Box<MashupDerivation>),
    /// The head premise and one premise per bag element.
    App(Box<MashupDerivation>, Vec<MashupDerivation>),
}

/// A derivation of `M ◃ s`; `trace` reduces `M` to the shape the rule
/// requires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MashupDerivation {
    pub term: Term,
    pub target: RTerm,
    pub trace: Trace,
    pub rule: MashupRule,
}

impl MashupDerivation {
    /// Checks traces, endpoint shapes and premises recursively.
    pub fn check(&self) -> bool {
        if self.trace.start != self.term || self.trace.validate().is_err() {
            return false;
        }
        match (self.trace.end(), &self.target, &self.rule) {
            (Term::Var(v), RTerm::Var(w), MashupRule::Var) => v == w,
            (Term::Abs(_, p), RTerm::Abs(_, s), MashupRule::Abs(d)) => {
                d.term == **p && d.target == **s && d.check()
            }
            (Term::App(p, q), RTerm::App(s, bag), MashupRule::App(d, ds)) => {
                d.term == **p
                    && d.target == **s
                    && d.check()
                    && ds.len() == bag.len()
                    && ds
                        .iter()
                        .zip(bag.elems())
                        .all(|(e, t)| e.term == **q && e.target == *t && e.check())
            }
            _ => false,
        }
    }

    /// Longest trace stored in the tree.
    pub fn max_premise(&self) -> usize {
        let below = match &self.rule {
            MashupRule::Var => 0,
            MashupRule::Abs(d) => d.max_premise(),
            MashupRule::App(d, ds) => ds
                .iter()
                .map(MashupDerivation::max_premise)
                .fold(d.max_premise(), usize::max),
        };
        below.max(self.trace.len())
    }
}

/// Searches a derivation of `m ◃ s` in which every `M →* shape` premise
/// has at most `fuel` steps. `None` means none exists within that cap.
pub fn mashup_check(m: &Term, s: &RTerm, fuel: usize) -> Option<MashupDerivation> {
    Mashup {
        fuel,
        reducts: HashMap::new(),
        memo: HashMap::new(),
    }
    .check(m, s)
}

struct Mashup {
    fuel: usize,
    reducts: HashMap<Term, Vec<Trace>>,
    memo: HashMap<(Term, RTerm), Option<MashupDerivation>>,
}

impl Mashup {
    fn reducts(&mut self, m: &Term) -> Vec<Trace> {
        if let Some(v) = self.reducts.get(m) {
            return v.clone();
        }
        let v = reducts_within(m, self.fuel);
        self.reducts.insert(m.clone(), v.clone());
        v
    }

    fn check(&mut self, m: &Term, s: &RTerm) -> Option<MashupDerivation> {
        let key = (m.clone(), s.clone());
        if let Some(d) = self.memo.get(&key) {
            return d.clone();
        }
        let found = self.search(m, s);
        self.memo.insert(key, found.clone());
        found
    }

    fn search(&mut self, m: &Term, s: &RTerm) -> Option<MashupDerivation> {
        let derivation = |trace: Trace, rule| MashupDerivation {
            term: m.clone(),
            target: s.clone(),
            trace,
            rule,
        };
        for trace in self.reducts(m) {
            match (trace.end(), s) {
                (Term::Var(v), RTerm::Var(w)) if v == w => {
                    return Some(derivation(trace, MashupRule::Var))
                }
                (Term::Abs(_, p), RTerm::Abs(_, u)) => {
                    let p = (**p).clone();
                    if let Some(d) = self.check(&p, u) {
                        return Some(derivation(trace, MashupRule::Abs(Box::new(d))));
                    }
                }
                (Term::App(p, q), RTerm::App(u, bag)) => {
                    let (p, q) = ((**p).clone(), (**q).clone());
                    let Some(head) = self.check(&p, u) else {
                        continue;
                    };
                    let elems: Option<Vec<MashupDerivation>> =
                        bag.elems().iter().map(|t| self.check(&q, t)).collect();
                    if let Some(elems) = elems {
                        return Some(derivation(trace, MashupRule::App(Box::new(head), elems)));
                    }
                }
                _ => {}
            }
        }
        None
    }
}

/// A β-reduction `m →* n` obtained from a derivation of `m ◃ ⌈n⌉`.
pub fn extract_reduction(m: &Term, n: &Term, fuel: usize) -> Option<Trace> {
    let target = canonical_approximant(n, None)?;
    let d = mashup_check(m, &target, fuel)?;
    let trace = stitch(&d);
    debug_assert_eq!(trace.end(), n);
    Some(trace)
}

fn stitch(d: &MashupDerivation) -> Trace {
    let mut trace = d.trace.clone();
    match &d.rule {
        MashupRule::Var => {}
        MashupRule::Abs(p) => trace
            .extend_lifted(&[Sel::Body], &stitch(p))
            .expect("premise replays in context"),
        MashupRule::App(p, qs) => {
            trace
                .extend_lifted(&[Sel::Fun], &stitch(p))
                .expect("premise replays in context");
            // bags of a canonical approximant are singletons
            if let Some(q) = qs.first() {
                trace
                    .extend_lifted(&[Sel::Arg], &stitch(q))
                    .expect("premise replays in context");
            }
        }
    }
    trace
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutationReport<C: Semiring> {
    pub normal_form: Option<Term>,
    pub steps: usize,
    pub size_bound: usize,
    /// Result terms up to this size have exact coefficients.
    pub certified_size: usize,
    /// `nf(T(M))` on the certified region.
    pub certified: RSum<C>,
    pub agree: bool,
    /// Agreement on the uncertified part, reported only.
    pub agree_outside: bool,
    pub stable: bool,
    pub fuel_exhausted: bool,
}

impl<C: Semiring> CommutationReport<C> {
    pub fn to_json(&self) -> Value {
        json!({
            "normal_form": self.normal_form.as_ref().map(Term::to_string),
            "steps": self.steps,
            "size_bound": self.size_bound,
            "certified_size": self.certified_size,
            "certified": self.certified.iter().map(|(t, c)| json!({"term": t.to_string(), "coeff": c.to_string()})).collect::<Vec<_>>(),
            "agree": self.agree,
            "agree_outside": self.agree_outside,
            "stable": self.stable,
            "fuel_exhausted": self.fuel_exhausted,
        })
    }
}

/// Compares `nf(T(M))` with `T(nf(M))` on size-truncations.
pub fn commutation_check<C: Semiring>(
    m: &Term,
    size_bound: usize,
    fuel: usize,
) -> CommutationReport<C> {
    commutation_check_with(m, size_bound, fuel, |s| s)
}

/// [`commutation_check`] with `tamper` applied to `nf(T(M))` before the
/// comparison; a mutation hook for negative controls.
pub fn commutation_check_with<C: Semiring>(
    m: &Term,
    size_bound: usize,
    fuel: usize,
    tamper: impl Fn(RSum<C>) -> RSum<C>,
) -> CommutationReport<C> {
    let report = commutation_once::<C>(m, size_bound, fuel, &tamper);
    if report.fuel_exhausted {
        return report;
    }
    let wider = commutation_once::<C>(m, size_bound + 2, fuel, &tamper);
    let region = |s: &RSum<C>| s.filter(|t| t.size() <= report.certified_size);
    let stable = wider.agree && region(&wider.certified) == report.certified;
    CommutationReport { stable, ..report }
}

fn commutation_once<C: Semiring>(
    m: &Term,
    size_bound: usize,
    fuel: usize,
    tamper: &impl Fn(RSum<C>) -> RSum<C>,
) -> CommutationReport<C> {
    let run = normalize_lo(m, fuel);
    if run.outcome == Outcome::Exhausted {
        return CommutationReport {
            normal_form: None,
            steps: run.trace.len(),
            size_bound,
            certified_size: 0,
            certified: RSum::zero(),
            agree: false,
            agree_outside: false,
            stable: false,
            fuel_exhausted: true,
        };
    }
    let mut certified_size = size_bound;
    let mut cur = &run.trace.start;
    for step in &run.trace.steps {
        let redex = cur.subterm(&step.redex.position).expect("recorded redex");
        certified_size = Certification::for_redex(redex, certified_size)
            .expect("redex shape")
            .certified_size();
        cur = &step.result;
    }
    let nf = run.trace.end().clone();
    let normalized = tamper(normalize_sum(
        &taylor_truncated::<C>(m.clone(), size_bound).sum,
    ));
    let expected = taylor_truncated::<C>(nf.clone(), size_bound).sum;
    let inside = |s: &RSum<C>| s.filter(|t| t.size() <= certified_size);
    let outside = |s: &RSum<C>| s.filter(|t| t.size() > certified_size && t.size() <= size_bound);
    CommutationReport {
        normal_form: Some(nf),
        steps: run.trace.len(),
        size_bound,
        certified_size,
        certified: inside(&normalized),
        agree: inside(&normalized) == inside(&expected),
        agree_outside: outside(&normalized) == outside(&expected),
        stable: false,
        fuel_exhausted: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvidenceError {
    #[error("stage {stage}, step {step}: {source}")]
    Malformed {
        stage: usize,
        step: usize,
        source: BundleError,
    },
    #[error("stage {stage}, step {step}: source sum differs from the previous target")]
    Disconnected { stage: usize, step: usize },
}

/// One witnessed bundle step `source ⇝ target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceStep<C: Semiring> {
    pub source: RSum<C>,
    pub target: RSum<C>,
    pub witness: BundleWitness<C>,
}

/// Stage `d` starts from `U_d` and must only fire bundles of depth ≥ d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage<C: Semiring> {
    pub start: RSum<C>,
    pub steps: Vec<EvidenceStep<C>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedEvidence<C: Semiring> {
    pub stages: Vec<Stage<C>>,
    pub target: RSum<C>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageVerdict {
    pub depth_ok: bool,
    pub exact_ok: bool,
    pub prefix_ok: bool,
}

impl StageVerdict {
    pub fn ok(&self) -> bool {
        self.depth_ok && self.exact_ok && self.prefix_ok
    }
}

impl<C: Semiring> StratifiedEvidence<C> {
    /// Simulates the given stage segments with bundle steps on size-`k`
    /// truncations; `limit` is the infinitary term the stages approach.
    pub fn simulate(stages: &[Trace], limit: &Source, k: usize) -> Result<Self, BundleError> {
        let mut out = Vec::new();
        for seg in stages {
            let start = taylor_truncated::<C>(seg.start.clone(), k);
            let mut cur = start.clone();
            let mut steps = Vec::new();
            let mut term = &seg.start;
            for step in &seg.steps {
                let b = bundle_beta_step(term, &step.redex.position, &cur)?;
                steps.push(EvidenceStep {
                    source: cur.sum.clone(),
                    target: b.expansion.sum.clone(),
                    witness: b.witness,
                });
                cur = b.expansion;
                term = &step.result;
            }
            out.push(Stage {
                start: start.sum,
                steps,
            });
        }
        let target = taylor_truncated::<C>(limit.clone(), k).sum;
        Ok(StratifiedEvidence {
            stages: out,
            target,
        })
    }

    /// Checks every recorded stage; malformed witnesses are errors,
    /// violated conditions are reported per stage.
    pub fn verify(&self) -> Result<Vec<StageVerdict>, EvidenceError> {
        let mut verdicts = Vec::new();
        let mut prev: Option<&RSum<C>> = None;
        for (d, stage) in self.stages.iter().enumerate() {
            if prev.is_some_and(|p| *p != stage.start) {
                return Err(EvidenceError::Disconnected { stage: d, step: 0 });
            }
            let mut cur = &stage.start;
            let mut depth_ok = true;
            let mut exact_ok = true;
            for (i, step) in stage.steps.iter().enumerate() {
                if step.source != *cur {
                    return Err(EvidenceError::Disconnected { stage: d, step: i });
                }
                let malformed = |source| EvidenceError::Malformed {
                    stage: d,
                    step: i,
                    source,
                };
                step.witness.validate(&step.source).map_err(malformed)?;
                let pushed = step.witness.push(&step.source).map_err(malformed)?;
                depth_ok &= step.witness.depth >= d;
                exact_ok &= step.witness.certified(&pushed) == step.witness.certified(&step.target);
                cur = &step.target;
            }
            let prefix_ok =
                restrict_below_depth(&stage.start, d) == restrict_below_depth(&self.target, d);
            verdicts.push(StageVerdict {
                depth_ok,
                exact_ok,
                prefix_ok,
            });
            prev = Some(cur);
        }
        Ok(verdicts)
    }

    pub fn verify_all(&self) -> Result<bool, EvidenceError> {
        Ok(self.verify()?.iter().all(StageVerdict::ok))
    }
}

/// `λf.(λx.(f)(x)x)λx.(f)(x)x`.
pub fn fixpoint_combinator() -> Term {
    let half = Term::lam(
        "x",
        Term::app(Term::var("f"), Term::app(Term::var("x"), Term::var("x"))),
    );
    Term::lam("f", Term::app(half.clone(), half))
}

/// Stage segments of the stratified reduction of `(Y)m`: two head steps,
/// then one unfolding at each depth `1..stages`.
pub fn fixpoint_stages(m: &Term, stages: usize) -> Vec<Trace> {
    let mut out = Vec::new();
    let mut seg = Trace::new(Term::app(fixpoint_combinator(), m.clone()));
    seg.fire(&Position::root()).expect("head redex");
    seg.fire(&Position::root()).expect("head redex");
    for d in 1..stages {
        let end = seg.end().clone();
        out.push(seg);
        seg = Trace::new(end);
        seg.fire(&Position(vec![Sel::Arg; d]))
            .expect("unfolding redex");
    }
    out.push(seg);
    out.truncate(stages);
    out
}

/// `X = (m)X`, the limit of the stratified reduction of `(Y)m`.
pub fn fixpoint_limit(m: &str) -> Source {
    let mut eqs = std::collections::BTreeMap::new();
    eqs.insert(
        "X".to_string(),
        Term::app(Term::Var(Var::Free(m.to_string())), Term::var("X")),
    );
    Source::System(crate::lambda::RegularSystem::new(eqs, "X").expect("guarded"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::validate_min_depth;
    use crate::lambda::parse_term;
    use crate::resource::{parse_rterm, Bag};
    use crate::semiring::Rational;
    use crate::taylor::{fire_residuals, promotion, residual_positions};

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn r(s: &str) -> RTerm {
        parse_rterm(s).unwrap()
    }

    #[test]
    fn mashup_examples() {
        let d = mashup_check(&t("x"), &r("x"), 0).unwrap();
        assert!(d.check());
        assert!(d.trace.is_empty());
        let d = mashup_check(&t("(\\x.x)y"), &r("y"), 1).unwrap();
        assert_eq!(d.trace.len(), 1);
        assert!(d.check());
        assert!(mashup_check(&t("\\x.\\y.x"), &r("\\x.\\y.y"), 5).is_none());
        assert!(mashup_check(&t("(\\x.x)y"), &r("y"), 0).is_none());
    }

    #[test]
    fn mashup_bag_rule() {
        let m = t("(f)(\\x.x)y");
        let d = mashup_check(&m, &r("(f)[y,(\\x.x)[y]]"), 1).unwrap();
        assert!(d.check());
        assert!(mashup_check(&m, &r("(f)1"), 0).is_some());
    }

    #[test]
    fn extraction_examples() {
        let tr = extract_reduction(&t("(\\x.x)y"), &t("y"), 2).unwrap();
        assert_eq!(tr.len(), 1);
        let tr = extract_reduction(&t("(\\f.(f)z)\\w.w"), &t("z"), 4).unwrap();
        let terms: Vec<Term> = tr.terms().cloned().collect();
        assert_eq!(terms, vec![t("(\\f.(f)z)\\w.w"), t("(\\w.w)z"), t("z")]);
        tr.validate().unwrap();
        assert!(extract_reduction(&t("\\x.\\y.x"), &t("\\x.\\y.y"), 5).is_none());
    }

    #[test]
    fn extraction_under_binders_and_arguments() {
        let m = t("\\a.(a)((\\x.x)((\\y.y)b))");
        let tr = extract_reduction(&m, &t("\\a.(a)b"), 3).unwrap();
        assert_eq!(tr.end(), &t("\\a.(a)b"));
        tr.validate().unwrap();
        assert!(tr.steps.iter().all(|s| !s.redex.is_head));
    }

    #[test]
    fn commutation_examples() {
        let rep = commutation_check::<Rational>(&t("(\\x.x)y"), 5, 10);
        assert!(rep.agree && rep.stable);
        assert_eq!(rep.certified, RSum::single(r("y")));

        let m = t("(\\x.(x)x)\\y.y");
        let rep = commutation_check::<Rational>(&m, 15, 10);
        assert_eq!(rep.normal_form, Some(t("\\y.y")));
        assert!(rep.agree && rep.stable && rep.agree_outside);
        assert_eq!(rep.certified, RSum::single(r("\\y.y")));
        // below the certified bound agreement still holds here, but is only reported
        let rep = commutation_check::<Rational>(&m, 9, 10);
        assert!(rep.agree_outside);
        assert_eq!(rep.certified_size, 1);

        let rep = commutation_check::<Rational>(&t("\\x.(x)x"), 6, 0);
        assert!(rep.agree && rep.stable && !rep.fuel_exhausted);
        assert_eq!(rep.certified_size, 6);

        let rep = commutation_check::<Rational>(&t("(\\x.(x)x)\\x.(x)x"), 6, 5);
        assert!(rep.fuel_exhausted);
    }

    #[test]
    fn fixpoint_evidence() {
        let m = t("m");
        let stages = fixpoint_stages(&m, 3);
        assert_eq!(stages.len(), 3);
        for (d, seg) in stages.iter().enumerate() {
            assert!(validate_min_depth(seg, d));
        }
        let ev =
            StratifiedEvidence::<Rational>::simulate(&stages, &fixpoint_limit("m"), 8).unwrap();
        assert!(ev.verify_all().unwrap());
    }

    #[test]
    fn depth_zero_bundle_in_a_later_stage_is_rejected() {
        let mut seg = Trace::new(Term::app(fixpoint_combinator(), t("m")));
        seg.fire(&Position::root()).unwrap();
        let mut late = Trace::new(seg.end().clone());
        late.fire(&Position::root()).unwrap();
        let ev = StratifiedEvidence::<Rational>::simulate(&[seg, late], &fixpoint_limit("m"), 8)
            .unwrap();
        let v = ev.verify().unwrap();
        assert!(v[0].ok());
        assert!(!v[1].depth_ok);
        assert!(!ev.verify_all().unwrap());
    }

    #[test]
    fn empty_evidence_is_vacuous() {
        let ev = StratifiedEvidence::<Rational> {
            stages: vec![],
            target: RSum::single(r("x")),
        };
        assert!(ev.verify_all().unwrap());
        let ev = StratifiedEvidence::<Rational> {
            stages: vec![Stage {
                start: RSum::single(r("y")),
                steps: vec![],
            }],
            target: RSum::single(r("x")),
        };
        assert!(ev.verify_all().unwrap());
    }

    #[test]
    fn malformed_witness_is_an_error() {
        let stages = fixpoint_stages(&t("m"), 2);
        let mut ev =
            StratifiedEvidence::<Rational>::simulate(&stages, &fixpoint_limit("m"), 7).unwrap();
        ev.stages[0].steps[0].witness.entries.pop_first();
        assert!(matches!(ev.verify(), Err(EvidenceError::Malformed { .. })));
    }

    #[test]
    fn promoted_witnesses_restrict_to_the_base() {
        let redex = t("(\\x.(x)x)y");
        let base = taylor_truncated::<Rational>(redex, 7);
        let arg = Position(vec![Sel::Arg]);
        for (bag, _) in promotion(&base.sum, 3).iter() {
            let s = RTerm::app(r("f"), bag.clone());
            let whole: RSum<Rational> =
                fire_residuals(&s, &residual_positions(&s, &arg.0).unwrap()).unwrap();
            let mut expected: RSum<Rational> = RSum::single(RTerm::app(r("f"), Bag::empty()));
            for u in bag.elems() {
                let part: RSum<Rational> =
                    fire_residuals(u, &residual_positions(u, &[]).unwrap()).unwrap();
                let mut next = RSum::zero();
                for (acc, c) in expected.iter() {
                    let RTerm::App(_, b) = acc else {
                        unreachable!()
                    };
                    for (v, d) in part.iter() {
                        next.add_term(
                            c.mul(d),
                            RTerm::app(r("f"), b.union(&Bag::new(vec![v.clone()]))),
                        );
                    }
                }
                expected = next;
            }
            assert_eq!(whole, expected);
        }
    }
}
