//! The Accordion: a term whose Taylor expansion reduces to that of
//! `A* = (⟨tt⟩)(⟨ff⟩)(⟨ff⟩)…` although no stratified β-reduction reaches it.
//!
//! This module builds the combinators involved, replays the head-reduction
//! cycle of `A`, scripts the β-paths towards the approximants `A*_d`, and
//! runs bounded searches for the reductions that cannot exist.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

pub use crate::beta::matches_pattern;
use crate::beta::{beta_step, factorized_search, head_redex_position, Trace};
use crate::lambda::{parse_term, substitute, Position, RegularSystem, Sel, Term};
use crate::resource::{normalize, RSum};
use crate::semiring::Semiring;
use crate::taylor::taylor_truncated;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AccordionError {
    #[error("unknown term `{0}`")]
    UnknownName(String),
    #[error("`{name}` expects {expected}")]
    BadParams {
        name: String,
        expected: &'static str,
    },
    #[error("fuel exhausted after {steps} steps")]
    Exhausted { steps: usize },
    #[error("reduction left the expected shape at step {step}")]
    Mismatch { step: usize },
}

fn t(text: &str) -> Term {
    parse_term(text).expect("built-in term parses")
}

/// Substitutes closed terms for the free placeholders of `template`.
fn fill(template: &str, with: &[(&str, &Term)]) -> Term {
    with.iter()
        .fold(t(template), |acc, (x, n)| substitute(&acc, x, n))
}

pub fn tt() -> Term {
    t("\\x.\\y.x")
}

pub fn ff() -> Term {
    t("\\x.\\y.y")
}

/// `⟨m⟩ = λb.(b)m`; `m` must not mention `b` free.
pub fn applicator(m: &Term) -> Term {
    Term::lam("b", Term::app(Term::var("b"), m.clone()))
}

pub fn church(n: usize) -> Term {
    let body = (0..n).fold(Term::var("x"), |acc, _| Term::app(Term::var("f"), acc));
    Term::lam("f", Term::lam("x", body))
}

pub fn succ() -> Term {
    t("\\n.\\f.\\x.((n)f)(f)x")
}

pub fn fixpoint() -> Term {
    t("\\f.(\\x.(f)(x)x)\\x.(f)(x)x")
}

/// `(succ)^n ⌜0⌝`, unevaluated.
pub fn succ_pow(n: usize) -> Term {
    (0..n).fold(church(0), |acc, _| Term::app(succ(), acc))
}

/// `Q_{φ,n} = (Y)λψ.λb.((b)(φ)(succ)n)ψ` for closed `φ` and `n`.
pub fn q(phi: &Term, n: &Term) -> Term {
    fill(
        "(Y)\\psi.\\b.((b)(PHI)(SUCC)N)psi",
        &[
            ("Y", &fixpoint()),
            ("SUCC", &succ()),
            ("PHI", phi),
            ("N", n),
        ],
    )
}

/// `P' = λφ.λn.(⟨tt⟩)(((n)⟨ff⟩)Q_{φ,n})`.
pub fn p_prime() -> Term {
    let q_open = fill(
        "(Y)\\psi.\\b.((b)(phi)(SUCC)n)psi",
        &[("Y", &fixpoint()), ("SUCC", &succ())],
    );
    let body = Term::app(
        applicator(&tt()),
        Term::app(Term::app(Term::var("n"), applicator(&ff())), q_open),
    );
    Term::lam("phi", Term::lam("n", body))
}

/// `P = (Y)P'`.
pub fn p() -> Term {
    Term::app(fixpoint(), p_prime())
}

/// `(λx.(m)(x)x)λx.(m)(x)x`, the first head reduct of `(Y)m`.
fn unfolded_fixpoint(m: &Term) -> Term {
    let half = fill("\\x.(M)(x)x", &[("M", m)]);
    Term::app(half.clone(), half)
}

/// `P'' = (λx.(P')(x)x)λx.(P')(x)x`.
pub fn p_second() -> Term {
    unfolded_fixpoint(&p_prime())
}

/// `Q_n = Q_{P'', (succ)^n⌜0⌝}`.
pub fn q_n(n: usize) -> Term {
    q(&p_second(), &succ_pow(n))
}

/// `Q'_n = λψ.λb.((b)(P'')(succ)^{n+1}⌜0⌝)ψ`.
pub fn q_n_prime(n: usize) -> Term {
    fill(
        "\\psi.\\b.((b)(PP)S)psi",
        &[("PP", &p_second()), ("S", &succ_pow(n + 1))],
    )
}

/// `Q''_n = (λx.(Q'_n)(x)x)λx.(Q'_n)(x)x`.
pub fn q_n_second(n: usize) -> Term {
    unfolded_fixpoint(&q_n_prime(n))
}

/// `A = (P)⌜0⌝`.
pub fn accordion() -> Term {
    Term::app(p(), church(0))
}

/// `A* = (⟨tt⟩)X` with `X = (⟨ff⟩)X`.
pub fn accordion_limit() -> RegularSystem {
    let mut eqs = BTreeMap::new();
    eqs.insert(
        "Root".to_string(),
        Term::app(applicator(&tt()), Term::var("X")),
    );
    eqs.insert(
        "X".to_string(),
        Term::app(applicator(&ff()), Term::var("X")),
    );
    RegularSystem::new(eqs, "Root").expect("guarded")
}

/// `(⟨ff⟩)^k m`.
pub fn ff_tower(k: usize, m: Term) -> Term {
    (0..k).fold(m, |acc, _| Term::app(applicator(&ff()), acc))
}

/// `A*_d = (⟨tt⟩)(⟨ff⟩)^d Q_d`.
pub fn accordion_approximant(d: usize) -> Term {
    Term::app(applicator(&tt()), ff_tower(d, q_n(d)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Param {
    Int(usize),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Built {
    Term(Term),
    System(RegularSystem),
}

/// Builds a named member of the kit.
pub fn build(name: &str, params: &[Param]) -> Result<Built, AccordionError> {
    let bad = |expected| AccordionError::BadParams {
        name: name.to_string(),
        expected,
    };
    let int = || match params {
        [Param::Int(n)] => Ok(*n),
        _ => Err(bad("one integer")),
    };
    let none = || {
        if params.is_empty() {
            Ok(())
        } else {
            Err(bad("no parameters"))
        }
    };
    let term = match name {
        "tt" => none().map(|_| tt())?,
        "ff" => none().map(|_| ff())?,
        "applicator" => match params {
            [Param::Term(m)] if !crate::lambda::free_vars(m).contains("b") => applicator(m),
            _ => return Err(bad("one term without free `b`")),
        },
        "church" => church(int()?),
        "succ" => none().map(|_| succ())?,
        "Y" => none().map(|_| fixpoint())?,
        "P" => none().map(|_| p())?,
        "P'" => none().map(|_| p_prime())?,
        "P''" => none().map(|_| p_second())?,
        "Q" => match params {
            [Param::Term(phi), Param::Term(n)] => q(phi, n),
            _ => return Err(bad("two terms")),
        },
        "Q_n" => q_n(int()?),
        "Q'_n" => q_n_prime(int()?),
        "Q''_n" => q_n_second(int()?),
        "A" => none().map(|_| accordion())?,
        "A*_d" => accordion_approximant(int()?),
        "A*" => return none().map(|_| Built::System(accordion_limit())),
        _ => return Err(AccordionError::UnknownName(name.to_string())),
    };
    Ok(Built::Term(term))
}

/// A step of the head-reduction cycle, instantiated at index `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub label: u32,
    pub pattern: Term,
    pub n: usize,
}

pub const CHECKPOINT_LABELS: [u32; 7] = [2, 3, 5, 10, 13, 22, 26];

/// The checkpoints of the cycle starting from `(P'')(succ)^n⌜0⌝`.
pub fn checkpoints(n: usize) -> Vec<Checkpoint> {
    let tt_app = applicator(&tt());
    let ff_app = applicator(&ff());
    let next = Term::app(p_second(), succ_pow(n + 1));
    let patterns = [
        (
            2,
            beta_step(&Term::app(p_prime(), p_second()), &Position::root())
                .map(|f| Term::app(f, succ_pow(n))),
        ),
        (
            3,
            Ok(Term::app(
                tt_app,
                Term::app(Term::app(succ_pow(n), ff_app.clone()), q_n(n)),
            )),
        ),
        (5, Ok(Term::apps(succ_pow(n), [ff_app, q_n(n), tt()]))),
        (10, Ok(Term::app(ff_tower(n, q_n(n)), tt()))),
        (
            13,
            Ok(Term::apps(
                q_n_second(n),
                std::iter::repeat_n(ff(), n).chain([tt()]),
            )),
        ),
        (
            22,
            Ok(Term::app(Term::app(tt(), next.clone()), q_n_second(n))),
        ),
        (26, Ok(next)),
    ];
    patterns
        .into_iter()
        .map(|(label, pattern)| Checkpoint {
            label,
            pattern: pattern.expect("P' is an abstraction"),
            n,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointHit {
    pub label: u32,
    /// Number of head steps fired before the hit.
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleOutcome {
    /// Back at `(P'')(succ)^{n+1}⌜0⌝` with every checkpoint hit in order.
    Completed,
    /// Back at the start shape but some checkpoint was missed or out of order.
    Mismatch,
    /// Fuel ran out first.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct CycleReport {
    pub n: usize,
    pub trace: Trace,
    pub hits: Vec<CheckpointHit>,
    pub outcome: CycleOutcome,
}

impl CycleReport {
    pub fn labels(&self) -> Vec<u32> {
        self.hits.iter().map(|h| h.label).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "outcome": match self.outcome {
                CycleOutcome::Completed => "completed",
                CycleOutcome::Mismatch => "mismatch",
                CycleOutcome::Exhausted => "exhausted",
            },
            "steps": self.trace.len(),
            "checkpoints": self.hits.iter().map(|h| json!({"label": h.label, "step": h.step})).collect::<Vec<_>>(),
        })
    }
}

/// Head-reduces `(P'')(succ)^n⌜0⌝` until `(P'')(succ)^{n+1}⌜0⌝`, recording
/// the first hit of each checkpoint.
pub fn head_cycle_trace(n: usize, fuel: usize) -> CycleReport {
    let cps = checkpoints(n);
    let target = Term::app(p_second(), succ_pow(n + 1));
    let mut trace = Trace::new(Term::app(p_second(), succ_pow(n)));
    let mut hits: Vec<CheckpointHit> = Vec::new();
    let outcome = loop {
        let cur = trace.end();
        for cp in &cps {
            if !hits.iter().any(|h| h.label == cp.label) && matches_pattern(&cp.pattern, cur) {
                hits.push(CheckpointHit {
                    label: cp.label,
                    step: trace.len(),
                });
            }
        }
        if *cur == target {
            break if hits.iter().map(|h| h.label).eq(CHECKPOINT_LABELS) {
                CycleOutcome::Completed
            } else {
                CycleOutcome::Mismatch
            };
        }
        if trace.len() >= fuel {
            break CycleOutcome::Exhausted;
        }
        match head_redex_position(cur) {
            Some(p) => {
                trace.fire(&p).expect("head redex");
            }
            None => break CycleOutcome::Mismatch,
        }
    };
    CycleReport {
        n,
        trace,
        hits,
        outcome,
    }
}

/// Head-reduces `trace`'s end inside the context `prefix` until `goal`.
fn head_reduce_until(
    trace: &mut Trace,
    prefix: &[Sel],
    goal: &Term,
    fuel: usize,
) -> Result<(), AccordionError> {
    let mut spent = 0;
    loop {
        let sub = trace
            .end()
            .subterm(&Position(prefix.to_vec()))
            .ok_or(AccordionError::Mismatch { step: trace.len() })?;
        if sub == goal {
            return Ok(());
        }
        if spent == fuel {
            return Err(AccordionError::Exhausted { steps: trace.len() });
        }
        let p = head_redex_position(sub).ok_or(AccordionError::Mismatch { step: trace.len() })?;
        trace
            .fire(&p.prefixed(prefix))
            .expect("head redex of the subterm");
        spent += 1;
    }
}

#[derive(Debug, Clone)]
pub struct ApproximantPath {
    pub d: usize,
    pub trace: Trace,
    /// `reached[i]` is the number of steps after which `A*_i` is reached.
    pub reached: Vec<usize>,
    /// For each `i < d`, the first depth-0 step fired after `A*_i`.
    pub depth_zero_after: Vec<Option<usize>>,
    /// Largest `e` with `truncate(endpoint, e) = truncate(A*, e)`.
    pub offset: usize,
}

impl ApproximantPath {
    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "steps": self.trace.len(),
            "end": self.trace.end().to_string(),
            "reached": self.reached,
            "depth_zero_after": self.depth_zero_after,
            "offset": self.offset,
        })
    }
}

/// Largest `e ≤ limit` such that `t` and `A*` agree when truncated at every
/// depth up to `e`; `None` if they disagree already at depth 0.
pub fn agreement_offset(t: &Term, limit: usize) -> Option<usize> {
    let sys = accordion_limit();
    (0..=limit)
        .take_while(|&e| t.truncate(e) == sys.truncate(e))
        .last()
}

/// The scripted β-path `A →* A*_d`: head steps to checkpoint (3) at `n = 0`,
/// then the argument is flattened into `(⟨ff⟩)^0 Q_0`; each further stage
/// head-reduces (depth-0 steps) back to checkpoint (3) and flattens again.
/// `fuel` bounds each scripted segment.
pub fn approximant_path(d: usize, fuel: usize) -> Result<ApproximantPath, AccordionError> {
    let tt_app = applicator(&tt());
    let ff_app = applicator(&ff());
    let mut trace = Trace::new(accordion());
    let mut reached = Vec::new();
    let mut depth_zero_after = Vec::new();
    for i in 0..=d {
        let from = trace.len();
        let checkpoint = Term::app(
            tt_app.clone(),
            Term::app(Term::app(succ_pow(i), ff_app.clone()), q_n(i)),
        );
        head_reduce_until(&mut trace, &[], &checkpoint, fuel)?;
        if i > 0 {
            depth_zero_after.push(
                trace.steps[from..]
                    .iter()
                    .position(|s| s.redex.depth == 0)
                    .map(|k| from + k),
            );
        }
        head_reduce_until(&mut trace, &[Sel::Arg], &ff_tower(i, q_n(i)), fuel)?;
        if *trace.end() != accordion_approximant(i) {
            return Err(AccordionError::Mismatch { step: trace.len() });
        }
        reached.push(trace.len());
    }
    let offset = agreement_offset(trace.end(), d + 4).expect("the root applicator agrees");
    Ok(ApproximantPath {
        d,
        trace,
        reached,
        depth_zero_after,
        offset,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeCase {
    /// One of the four head reducts of `A` shaped `(λb.M)N`, searched with
    /// internal steps only.
    Case(u8),
    /// From `(⟨ff⟩)^k Q_n` towards `(⟨ff⟩)^{k+1} M`.
    Technique1 { k: usize },
    /// From `((succ)^{n-k}⌜0⌝)⟨ff⟩ (⟨ff⟩)^k Q_n` towards `(⟨ff⟩)^{n+1} M`.
    Technique2 { k: usize },
    /// From `A` towards any `(⟨tt⟩)M`; expected to succeed.
    Control,
}

impl NegativeCase {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "1" | "2" | "3" | "4" => Some(NegativeCase::Case(text.parse().ok()?)),
            "control" => Some(NegativeCase::Control),
            _ => {
                let (kind, k) = text.split_once(':').unwrap_or((text, "0"));
                let k = k.parse().ok()?;
                match kind {
                    "t1" => Some(NegativeCase::Technique1 { k }),
                    "t2" => Some(NegativeCase::Technique2 { k }),
                    _ => None,
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            NegativeCase::Case(c) => c.to_string(),
            NegativeCase::Technique1 { k } => format!("t1:{k}"),
            NegativeCase::Technique2 { k } => format!("t2:{k}"),
            NegativeCase::Control => "control".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NegativeReport {
    pub case: NegativeCase,
    pub n: usize,
    pub budget: usize,
    pub start: Term,
    pub goal: Term,
    pub witness: Option<Trace>,
    pub states: usize,
    pub closed: bool,
}

impl NegativeReport {
    /// The search behaved as expected: nothing found for a negative case,
    /// something found for the control.
    pub fn ok(&self) -> bool {
        (self.case == NegativeCase::Control) == self.witness.is_some()
    }

    pub fn verdict(&self) -> &'static str {
        match (self.case, &self.witness) {
            (NegativeCase::Control, Some(_)) => "found",
            (NegativeCase::Control, None) => "not found within budget",
            (_, None) => "no counterexample within budget",
            (_, Some(_)) => "counterexample found",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "case": self.case.label(),
            "n": self.n,
            "budget": self.budget,
            "start": self.start.to_string(),
            "goal": self.goal.to_string(),
            "verdict": self.verdict(),
            "states": self.states,
            "closed": self.closed,
            "witness": self.witness.as_ref().map(Trace::to_json),
        })
    }
}

/// Exhaustive search, within `budget` factorized steps, for a reduction that
/// cannot exist. A witness for a negative case would
/// falsify the implementation. The four cases only allow internal steps at
/// the root.
pub fn depth_restricted_negative_search(
    case: NegativeCase,
    n: usize,
    budget: usize,
) -> NegativeReport {
    let tt_app = applicator(&tt());
    let ff_app = applicator(&ff());
    let hole = Term::var("?M");
    let next = Term::app(p_second(), succ_pow(n + 1));
    let tt_goal = Term::app(tt_app.clone(), ff_tower(n + 1, hole.clone()));
    let (start, goal, internal_only) = match case {
        NegativeCase::Case(1) => (checkpoints(n)[0].pattern.clone(), tt_goal, true),
        NegativeCase::Case(2) => (checkpoints(n)[1].pattern.clone(), tt_goal, true),
        NegativeCase::Case(3) => {
            let body = beta_step(&Term::app(q_n_prime(n), q_n_second(n)), &Position::root())
                .expect("Q'_n is an abstraction");
            (Term::app(body, tt()), tt_goal, true)
        }
        NegativeCase::Case(_) => {
            let body =
                beta_step(&Term::app(tt(), next), &Position::root()).expect("tt is an abstraction");
            (Term::app(body, q_n_second(n)), tt_goal, true)
        }
        NegativeCase::Technique1 { k } => (ff_tower(k, q_n(n)), ff_tower(k + 1, hole), false),
        NegativeCase::Technique2 { k } => {
            let k = k.min(n);
            (
                Term::apps(succ_pow(n - k), [ff_app, ff_tower(k, q_n(n))]),
                ff_tower(n + 1, hole),
                false,
            )
        }
        NegativeCase::Control => (accordion(), Term::app(tt_app, hole), false),
    };
    let report = factorized_search(&start, &goal, budget, internal_only);
    NegativeReport {
        case,
        n,
        budget,
        start,
        goal,
        witness: report.witness,
        states: report.states,
        closed: report.closed,
    }
}

#[derive(Debug, Clone)]
pub struct TaylorLayers<C: Semiring> {
    /// `T'_d`: the expansion of `(⟨tt⟩)(⟨ff⟩)^d ⊥`.
    pub cumulative: RSum<C>,
    /// `T_d = T'_d - T'_{d-1}`, restricted to the new support.
    pub layer: RSum<C>,
}

fn cut_approximant(d: usize) -> Term {
    Term::app(applicator(&tt()), ff_tower(d, Term::Bottom))
}

/// The truncated expansion `T'_d(A*)` and its layer `T_d(A*)`.
pub fn taylor_layers<C: Semiring>(d: usize, size_bound: usize) -> TaylorLayers<C> {
    let cumulative = taylor_truncated::<C>(cut_approximant(d), size_bound).sum;
    let layer = if d == 0 {
        cumulative.clone()
    } else {
        let below = taylor_truncated::<C>(cut_approximant(d - 1), size_bound).sum;
        cumulative.filter(|s| !below.contains(s))
    };
    TaylorLayers { cumulative, layer }
}

/// Elements of layer `d` whose normal form meets the support of layer
/// `d + k`, as `(element, shared term)` pairs.
pub fn layer_collisions<C: Semiring>(
    d: usize,
    k: usize,
    size_bound: usize,
) -> Vec<(String, String)> {
    let lower = taylor_layers::<C>(d, size_bound).layer;
    let upper = taylor_layers::<C>(d + k, size_bound).layer;
    let mut out = Vec::new();
    for s in lower.support() {
        let nf = normalize::<C>(s);
        for u in nf.support().filter(|u| upper.contains(u)) {
            out.push((s.to_string(), u.to_string()));
        }
    }
    out
}
