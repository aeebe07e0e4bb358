//! The release gate: ten property checks with pinned sizes, seeds and
//! budgets, each reported as pass, fail or skip.

use std::fmt;

use rand::Rng;
use serde_json::{json, Value};

use crate::accordion::{
    accordion_approximant, approximant_path, depth_restricted_negative_search, head_cycle_trace,
    taylor_layers, CycleOutcome, NegativeCase, CHECKPOINT_LABELS,
};
use crate::beta::enumerate_redexes;
use crate::conservativity::{commutation_check_with, extract_reduction};
use crate::gen::{lambda_terms, occurrences, pick, random_bag, random_trace, resource_terms, rng};
use crate::lambda::parse_term;
use crate::resource::{
    msubst, msubst_literal, normalize, normalize_with, parse_rterm, Bag, RSum, Strategy,
};
use crate::semiring::{Boolean, Rational, Semiring};
use crate::taylor::{
    bundle_beta_step, self_coherent, taylor_by_promotion, taylor_coeff, taylor_truncated,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SemiringKind {
    #[default]
    Rational,
    Boolean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub semiring: SemiringKind,
    /// Mutation hook: zero one coefficient of `nf(T(M))` in the commutation
    /// check.
    pub corrupt_coefficient: bool,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            semiring: SemiringKind::Rational,
            corrupt_coefficient: false,
            seed: DEFAULT_SEED,
        }
    }
}

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl CriterionResult {
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "status": match self.status { Status::Pass => "pass", Status::Fail => "fail", Status::Skip => "skip" },
            "detail": self.detail,
        })
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        write!(
            f,
            "criterion {:>2} [{tag}] {}: {}",
            self.id, self.name, self.detail
        )
    }
}

pub const NAMES: [&str; 10] = [
    "resource confluence",
    "multilinear substitution mass",
    "taylor coefficient exactness",
    "uniform simulation",
    "finite conservativity",
    "commutation desk-check",
    "accordion head cycle",
    "accordion stretching",
    "negative searches",
    "taylor layer rigidity",
];

fn outcome(id: u8, ok: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name: NAMES[id as usize - 1],
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn skipped(id: u8, why: &str) -> CriterionResult {
    CriterionResult {
        id,
        name: NAMES[id as usize - 1],
        status: Status::Skip,
        detail: why.to_string(),
    }
}

pub fn run_all(cfg: &Config) -> Vec<CriterionResult> {
    (1..=10).map(|id| run(id, cfg)).collect()
}

/// Runs criterion `id` (1 to 10).
pub fn run(id: u8, cfg: &Config) -> CriterionResult {
    match cfg.semiring {
        SemiringKind::Rational => run_in::<Rational>(id, cfg),
        SemiringKind::Boolean => run_in::<Boolean>(id, cfg),
    }
}

fn run_in<C: Semiring>(id: u8, cfg: &Config) -> CriterionResult {
    match id {
        1 => confluence::<C>(),
        2 if C::name() != "rat" => skipped(2, "mass is only meaningful over exact rationals"),
        2 => substitution_mass(cfg.seed),
        3 => coefficients::<C>(cfg.seed),
        4 => simulation::<C>(cfg.seed),
        5 => conservativity(cfg.seed),
        6 => commutation::<C>(cfg.corrupt_coefficient),
        7 => head_cycle(),
        8 => stretching(),
        9 => negative_searches(),
        10 => rigidity::<C>(),
        _ => panic!("no criterion {id}"),
    }
}

fn confluence<C: Semiring>() -> CriterionResult {
    let terms = resource_terms(8, &["x", "y"]);
    let bad: Vec<String> = terms
        .iter()
        .filter(|t| {
            normalize_with::<C>(t, Strategy::LeftmostOutermost)
                != normalize_with::<C>(t, Strategy::LeftmostInnermost)
        })
        .map(|t| t.to_string())
        .collect();
    outcome(
        1,
        bad.is_empty(),
        match bad.first() {
            None => format!("{} terms of size <= 8, no disagreement", terms.len()),
            Some(t) => format!(
                "{} terms of size <= 8, {} disagreements, first {t}",
                terms.len(),
                bad.len()
            ),
        },
    )
}

fn substitution_mass(seed: u64) -> CriterionResult {
    let mut r = rng(seed);
    let pool = resource_terms(3, &["y", "z"]);
    let mut checked = 0;
    let mut failures = Vec::new();
    for u in resource_terms(5, &["x", "y"]) {
        let n = occurrences(&u, "x");
        if n > 4 {
            continue;
        }
        let bag = random_bag(&mut r, &pool, n);
        let out: RSum<Rational> = msubst(&u, "x", &bag);
        let literal: RSum<Rational> = msubst_literal(&u, "x", &bag);
        let too_many: RSum<Rational> = msubst(&u, "x", &bag.union(&random_bag(&mut r, &pool, 1)));
        let too_few =
            n > 0 && !msubst::<Rational>(&u, "x", &Bag::new(bag.elems()[1..].to_vec())).is_zero();
        if out.mass() != Rational::factorial(n as u64)
            || out != literal
            || !too_many.is_zero()
            || too_few
        {
            failures.push(format!("{u} <- {bag}"));
        }
        checked += 1;
    }
    outcome(
        2,
        failures.is_empty(),
        format!("{checked} terms of size <= 5, failures {failures:?}"),
    )
}

fn coefficients<C: Semiring>(seed: u64) -> CriterionResult {
    let mut r = rng(seed);
    let pool = lambda_terms(6, &["x", "y"]);
    let mut problems = Vec::new();
    let mut elements = 0;
    for _ in 0..50 {
        let m = pick(&mut r, &pool, |_| true).expect("pool");
        let direct = taylor_truncated::<C>(m.clone(), 8).sum;
        if direct != taylor_by_promotion::<C>(m, 8) {
            problems.push(format!("promotion oracle differs on {m}"));
        }
        for (s, c) in direct.iter() {
            elements += 1;
            if taylor_coeff::<C>(m, s) != *c {
                problems.push(format!("coefficient of {s} in {m}"));
            }
        }
    }
    let mut detail = format!("50 terms, {elements} support elements");
    if C::name() == "rat" {
        let half = taylor_coeff::<Rational>(
            &parse_term("(x)y").expect("term"),
            &parse_rterm("(x)[y,y]").expect("term"),
        );
        if half != Rational::new(1, 2) {
            problems.push(format!("coefficient of (x)[y,y] under (x)y is {half}"));
        }
        detail.push_str(", T((x)y, (x)[y,y]) = 1/2 checked");
    }
    let (mut pairs, mut attempts) = (0, 0);
    while pairs < 100 && attempts < 20_000 {
        attempts += 1;
        let m = pick(&mut r, &pool, |_| true).expect("pool");
        let n = pick(&mut r, &pool, |t| t != m).expect("pool");
        let sm = taylor_truncated::<C>(m.clone(), 7).sum;
        let sn = taylor_truncated::<C>(n.clone(), 7).sum;
        let shared: Vec<_> = sm.support().filter(|s| sn.contains(s)).collect();
        if shared.is_empty() {
            continue;
        }
        pairs += 1;
        for s in shared {
            if taylor_coeff::<C>(m, s) != taylor_coeff::<C>(n, s) {
                problems.push(format!("{s} under {m} and {n}"));
            }
        }
    }
    detail.push_str(&format!(", {pairs} cross pairs with shared support"));
    outcome(
        3,
        problems.is_empty() && pairs == 100,
        format!("{detail}, problems {problems:?}"),
    )
}

fn simulation<C: Semiring>(seed: u64) -> CriterionResult {
    let mut r = rng(seed.wrapping_add(1));
    let pool = lambda_terms(6, &["x", "y"]);
    let mut problems = Vec::new();
    let mut certified_terms = 0;
    for _ in 0..100 {
        let m =
            pick(&mut r, &pool, |t| !enumerate_redexes(t).is_empty()).expect("a term with a redex");
        let redexes = enumerate_redexes(m);
        let p = redexes[r.gen_range(0..redexes.len())].position.clone();
        let t = taylor_truncated::<C>(m.clone(), 8);
        let step = match bundle_beta_step(m, &p, &t) {
            Ok(s) => s,
            Err(e) => {
                problems.push(format!("{m} at {p}: {e}"));
                continue;
            }
        };
        certified_terms += step.witness.certified(&step.expansion.sum).len();
        let functional = step.witness.entries.keys().eq(t.sum.support());
        if !step.exact_on_certified()
            || step.witness.validate(&t.sum).is_err()
            || !functional
            || !self_coherent(&t.sum)
        {
            problems.push(format!("{m} at {p}"));
        }
    }
    outcome(
        4,
        problems.is_empty(),
        format!("100 redexes, size bound 8, {certified_terms} certified result terms, problems {problems:?}"),
    )
}

fn conservativity(seed: u64) -> CriterionResult {
    let mut r = rng(seed.wrapping_add(2));
    let pool = lambda_terms(6, &["x", "y"]);
    let mut failures = Vec::new();
    let mut total_len = 0;
    for _ in 0..100 {
        let m =
            pick(&mut r, &pool, |t| !enumerate_redexes(t).is_empty()).expect("a term with a redex");
        let tr = random_trace(&mut r, m, 4);
        total_len += tr.len();
        let ok = extract_reduction(m, tr.end(), 8)
            .is_some_and(|e| e.validate().is_ok() && e.start == *m && e.end() == tr.end());
        if !ok {
            failures.push(format!("{m} ->* {}", tr.end()));
        }
    }
    outcome(
        5,
        failures.is_empty(),
        format!("100 traces, {total_len} steps in total, fuel 8, failures {failures:?}"),
    )
}

/// Normalizing terms for the commutation desk-check.
pub const COMMUTATION_CORPUS: [&str; 20] = [
    "(\\x.x)y",
    "(\\x.(x)x)y",
    "((\\x.\\y.x)a)b",
    "((\\x.\\y.y)a)b",
    "(\\x.(f)x)(\\y.y)z",
    "(\\f.(f)a)\\u.u",
    "\\z.(\\x.x)z",
    "(\\x.\\y.(y)x)a",
    "(\\x.\\y.(x)y)a",
    "(\\x.(x)x)(a)b",
    "(y)(\\x.x)z",
    "\\w.(w)(\\x.x)w",
    "(\\x.(x)x)\\y.y",
    "(\\x.(a)(x)x)b",
    "\\y.(\\x.(x)x)y",
    "(\\x.\\y.y)(\\z.(z)z)\\z.(z)z",
    "((\\x.x)\\y.y)u",
    "(\\x.(x)x)\\y.(a)y",
    "(a)(b)(\\x.x)c",
    "\\x.\\y.(\\z.(z)y)x",
];

pub const COMMUTATION_SIZE_BOUND: usize = 16;

fn commutation<C: Semiring>(corrupt: bool) -> CriterionResult {
    // drops the smallest term of nf(T(M)), which lies in every nonempty
    // certified region
    let tamper = |s: RSum<C>| {
        if !corrupt {
            return s;
        }
        let victim = s
            .support()
            .min_by_key(|t| (t.size(), (*t).clone()))
            .cloned();
        s.filter(|t| Some(t) != victim.as_ref())
    };
    let mut failures = Vec::new();
    let mut certified = Vec::new();
    for src in COMMUTATION_CORPUS {
        let m = parse_term(src).expect("corpus term parses");
        let rep = commutation_check_with::<C>(&m, COMMUTATION_SIZE_BOUND, 50, tamper);
        certified.push(rep.certified_size);
        // an empty certified region would make the comparison vacuous
        if !(rep.agree && rep.stable) || rep.certified.is_zero() {
            failures.push(src);
        }
    }
    outcome(
        6,
        failures.is_empty(),
        format!("20 terms, size bound {COMMUTATION_SIZE_BOUND} and +2, certified sizes {certified:?}, failures {failures:?}"),
    )
}

fn head_cycle() -> CriterionResult {
    let mut lens = Vec::new();
    let mut ok = true;
    for n in 0..3 {
        let rep = head_cycle_trace(n, 5000);
        ok &= rep.outcome == CycleOutcome::Completed && rep.labels() == CHECKPOINT_LABELS;
        lens.push(rep.trace.len());
    }
    outcome(
        7,
        ok,
        format!("n = 0, 1, 2 complete in {lens:?} head steps, checkpoints {CHECKPOINT_LABELS:?}"),
    )
}

fn stretching() -> CriterionResult {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut previous: Option<crate::beta::Trace> = None;
    for d in 0..3 {
        let path = match approximant_path(d, 2000) {
            Ok(p) => p,
            Err(e) => return outcome(8, false, format!("d = {d}: {e}")),
        };
        ok &= *path.trace.end() == accordion_approximant(d);
        ok &= path.trace.validate().is_ok();
        ok &= path.offset == d;
        ok &= path.depth_zero_after.iter().all(Option::is_some);
        if let Some(prev) = &previous {
            ok &= path.trace.steps.starts_with(&prev.steps);
        }
        let fired: Vec<String> = path
            .depth_zero_after
            .iter()
            .map(|s| s.map_or_else(|| "missing".to_string(), |i| format!("after step {i}")))
            .collect();
        notes.push(format!(
            "d = {d}: {} steps, offset {}, depth-0 redexes [{}]",
            path.trace.len(),
            path.offset,
            fired.join(", ")
        ));
        previous = Some(path.trace);
    }
    outcome(8, ok, notes.join("; "))
}

fn negative_searches() -> CriterionResult {
    let mut runs = Vec::new();
    for k in 0..2 {
        for n in 0..2 {
            runs.push(depth_restricted_negative_search(
                NegativeCase::Technique1 { k },
                n,
                10,
            ));
        }
    }
    for n in 0..2 {
        runs.push(depth_restricted_negative_search(
            NegativeCase::Technique2 { k: n },
            n,
            10,
        ));
    }
    for c in 1..=4 {
        runs.push(depth_restricted_negative_search(
            NegativeCase::Case(c),
            0,
            10,
        ));
    }
    let control = depth_restricted_negative_search(NegativeCase::Control, 0, 20);
    let negatives_ok = runs.iter().all(|r| r.ok());
    let detail = format!(
        "{} searches at budget 10: {}; control: {}",
        runs.len(),
        if negatives_ok {
            "no counterexample within budget"
        } else {
            "counterexample found"
        },
        control.verdict()
    );
    outcome(9, negatives_ok && control.ok(), detail)
}

pub const LAYER_SIZE_BOUND: usize = 14;

fn rigidity<C: Semiring>() -> CriterionResult {
    let layers: Vec<RSum<C>> = (0..=3)
        .map(|d| taylor_layers::<C>(d, LAYER_SIZE_BOUND).layer)
        .collect();
    let mut hits = Vec::new();
    for d in 0..3 {
        let images: Vec<(String, RSum<C>)> = layers[d]
            .support()
            .map(|s| (s.to_string(), normalize::<C>(s)))
            .collect();
        for up in layers.iter().skip(d + 1) {
            for (s, nf) in &images {
                if nf.support().any(|u| up.contains(u)) {
                    hits.push(s.clone());
                }
            }
        }
    }
    let sizes: Vec<usize> = layers.iter().map(RSum::len).collect();
    outcome(
        10,
        hits.is_empty(),
        format!("layer sizes {sizes:?} at size bound {LAYER_SIZE_BOUND}, collisions {hits:?}"),
    )
}
