//! Command-line front end: reduce, expand, check and run the Accordion
//! experiments, with JSON reports on standard output.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use linapprox::acceptance::{self, SemiringKind, Status};
use linapprox::accordion::{self, CycleOutcome, NegativeCase};
use linapprox::beta::{head_reduce, normalize_lo, Outcome};
use linapprox::conservativity::{commutation_check, extract_reduction};
use linapprox::lambda::{parse_term, Position, RegularSystem, Term};
use linapprox::resource::{parse_bag, parse_rterm};
use linapprox::semiring::{Boolean, Rational, Semiring};
use linapprox::taylor::{bundle_beta_step, coherent, taylor_truncated, CohItem, Source};

#[derive(Parser, Debug)]
#[command(
    name = "linapprox",
    version,
    about = "λ-terms, resource terms and their Taylor expansions"
)]
struct Cli {
    /// Coefficient semiring.
    #[arg(long, global = true, value_enum, default_value_t = SemiringArg::Rat)]
    semiring: SemiringArg,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = acceptance::DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SemiringArg {
    Rat,
    Bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StrategyArg {
    /// Head reduction, up to a head normal form.
    Head,
    /// Leftmost-outermost reduction, up to the normal form.
    Lo,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce a λ-term.
    Reduce {
        #[arg(long, value_enum, default_value_t = StrategyArg::Lo)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 1000)]
        fuel: usize,
        /// Include every intermediate step.
        #[arg(long)]
        trace: bool,
        term: String,
    },
    /// Size-truncated Taylor expansion of a term or of a regular system.
    Taylor {
        #[arg(long, default_value_t = 6)]
        size_bound: usize,
        #[arg(long)]
        depth_bound: Option<usize>,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Coherence of two resource terms or two bags, with its derivation.
    Coherent { left: String, right: String },
    /// Uniform (bundle) simulation of one β-step on the truncated expansion.
    Simulate {
        #[arg(long, default_value_t = 6)]
        size_bound: usize,
        /// Redex position such as `F.A`; defaults to the root.
        #[arg(long, default_value = "")]
        position: String,
        term: String,
    },
    /// Recover a β-reduction M →* N through the mashup relation.
    Extract {
        #[arg(long, default_value_t = 8)]
        fuel: usize,
        from: String,
        to: String,
    },
    /// Compare nf(T(M)) with T(nf(M)) on the certified region.
    Commute {
        #[arg(long, default_value_t = 10)]
        size_bound: usize,
        #[arg(long, default_value_t = 100)]
        fuel: usize,
        term: String,
    },
    /// Accordion experiments.
    #[command(subcommand)]
    Accordion(AccordionCommand),
    /// Run the acceptance suite.
    Selftest {
        /// Mutation hook: zero one coefficient in the commutation check.
        #[arg(long)]
        corrupt_coefficient: bool,
    },
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Regular system file (`name = term` lines and `@root name`).
    #[arg(long, conflicts_with = "term")]
    system: Option<std::path::PathBuf>,
    #[arg(required_unless_present = "system")]
    term: Option<String>,
}

#[derive(Subcommand, Debug)]
enum AccordionCommand {
    /// Head-reduction cycle from (P'')(succ)^n⌜0⌝.
    Trace {
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        fuel: usize,
    },
    /// Scripted β-path A →* A*_d.
    Approximant {
        #[arg(long, default_value_t = 0)]
        d: usize,
        #[arg(long, default_value_t = 500)]
        fuel: usize,
    },
    /// Bounded search for a reduction that cannot exist.
    Nosearch {
        /// 1, 2, 3, 4, t1[:k], t2[:k] or control.
        #[arg(long, value_parser = parse_case)]
        case: NegativeCase,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        budget: usize,
    },
    /// Layers T'_d(A*) and T_d(A*) of the Taylor expansion of A*.
    Layers {
        #[arg(long, default_value_t = 0)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        size_bound: usize,
    },
}

fn parse_case(text: &str) -> Result<NegativeCase, String> {
    NegativeCase::parse(text).ok_or_else(|| format!("unknown case `{text}`"))
}

/// A finished command: a status word, its JSON payload and an optional
/// human rendering.
struct Report {
    status: &'static str,
    payload: Value,
    text: Option<String>,
}

impl Report {
    fn ok(payload: Value) -> Self {
        Report {
            status: "ok",
            payload,
            text: None,
        }
    }

    fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    fn to_json(&self) -> Value {
        let mut map = match &self.payload {
            Value::Object(m) => m.clone(),
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other.clone());
                m
            }
        };
        map.insert("status".into(), json!(self.status));
        Value::Object(map)
    }
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn term_arg(text: &str) -> Result<Term, Failure> {
    parse_term(text).map_err(|e| Failure(format!("cannot parse `{text}`: {e}")))
}

fn coeff_lines<C: Semiring>(sum: &linapprox::resource::RSum<C>) -> Vec<String> {
    sum.iter().map(|(t, c)| format!("{c} {t}")).collect()
}

fn sum_json<C: Semiring>(sum: &linapprox::resource::RSum<C>) -> Value {
    Value::Array(
        sum.iter()
            .map(|(t, c)| json!({"term": t.to_string(), "coeff": c.to_string()}))
            .collect(),
    )
}

fn execute<C: Semiring>(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Reduce {
            strategy,
            fuel,
            trace,
            term,
        } => {
            let m = term_arg(term)?;
            let run = match strategy {
                StrategyArg::Head => head_reduce(&m, *fuel),
                StrategyArg::Lo => normalize_lo(&m, *fuel),
            };
            let result = run.trace.end().to_string();
            let mut payload = json!({"steps": run.trace.len(), "result": result});
            if *trace {
                payload["trace"] = run.trace.to_json();
            }
            let status = if run.outcome == Outcome::Normal {
                "ok"
            } else {
                "exhausted"
            };
            Ok(Report {
                status,
                payload,
                text: Some(format!("{result}\n{} steps", run.trace.len())),
            })
        }
        Command::Taylor {
            size_bound,
            depth_bound,
            source,
        } => {
            let src: Source = match (&source.system, &source.term) {
                (Some(path), _) => RegularSystem::parse(&std::fs::read_to_string(path)?)?.into(),
                (None, Some(t)) => term_arg(t)?.into(),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let mut e = taylor_truncated::<C>(src, *size_bound);
            if let Some(d) = depth_bound {
                e = e.with_depth_bound(*d);
            }
            let lines = coeff_lines(&e.sum);
            let payload = json!({
                "size_bound": e.size_bound,
                "depth_bound": e.depth_bound,
                "count": e.sum.len(),
                "terms": sum_json(&e.sum),
                "lines": lines,
            });
            Ok(Report::ok(payload).with_text(lines.join("\n")))
        }
        Command::Coherent { left, right } => {
            let item = |s: &str| -> Result<CohItem, Failure> {
                if s.trim_start().starts_with('[') || s.trim() == "1" {
                    Ok(CohItem::Bag(parse_bag(s)?))
                } else {
                    Ok(CohItem::Term(parse_rterm(s)?))
                }
            };
            let (l, r) = (item(left)?, item(right)?);
            if matches!(l, CohItem::Bag(_)) != matches!(r, CohItem::Bag(_)) {
                return Err(Failure("cannot compare a term with a bag".into()));
            }
            let pair = coherent(&l, &r);
            let payload = json!({
                "left": l.to_string(),
                "right": r.to_string(),
                "coherent": pair.verdict,
                "derivation": pair.derivation.as_ref().map(|d| d.to_json()),
            });
            Ok(Report::ok(payload)
                .with_text(format!("{l} {} {r}", if pair.verdict { "⌣" } else { "⌣̸" })))
        }
        Command::Simulate {
            size_bound,
            position,
            term,
        } => {
            let m = term_arg(term)?;
            let p = Position::parse(position)
                .ok_or_else(|| Failure(format!("bad position `{position}`")))?;
            let t = taylor_truncated::<C>(m.clone(), *size_bound);
            let step = bundle_beta_step(&m, &p, &t)?;
            let exact = step.exact_on_certified();
            let payload = json!({
                "result": step.result.to_string(),
                "witness": step.witness.to_json(),
                "pushed": sum_json(&step.pushed),
                "expansion": sum_json(&step.expansion.sum),
                "exact_on_certified": exact,
            });
            let text = format!(
                "{m} -> {}\ncertified up to size {}: {}",
                step.result,
                step.witness.certification.certified_size(),
                if exact { "exact" } else { "MISMATCH" }
            );
            Ok(Report {
                status: if exact { "ok" } else { "error" },
                payload,
                text: Some(text),
            })
        }
        Command::Extract { fuel, from, to } => {
            let (m, n) = (term_arg(from)?, term_arg(to)?);
            match extract_reduction(&m, &n, *fuel) {
                Some(tr) => {
                    let text = tr
                        .terms()
                        .map(Term::to_string)
                        .collect::<Vec<_>>()
                        .join("\n-> ");
                    Ok(
                        Report::ok(json!({"steps": tr.len(), "trace": tr.to_json()}))
                            .with_text(text),
                    )
                }
                None => Ok(Report {
                    status: "not-found-within-fuel",
                    payload: json!({"fuel": fuel}),
                    text: Some(format!("no reduction found within fuel {fuel}")),
                }),
            }
        }
        Command::Commute {
            size_bound,
            fuel,
            term,
        } => {
            let m = term_arg(term)?;
            let rep = commutation_check::<C>(&m, *size_bound, *fuel);
            let status = match (rep.fuel_exhausted, rep.agree && rep.stable) {
                (true, _) => "exhausted",
                (false, true) => "ok",
                (false, false) => "error",
            };
            let text = format!(
                "normal form {}\ncertified up to size {}: {}",
                rep.normal_form
                    .as_ref()
                    .map_or("?".to_string(), Term::to_string),
                rep.certified_size,
                if rep.agree && rep.stable {
                    "agree"
                } else {
                    "disagree"
                }
            );
            Ok(Report {
                status,
                payload: rep.to_json(),
                text: Some(text),
            })
        }
        Command::Accordion(sub) => accordion_command::<C>(sub),
        Command::Selftest {
            corrupt_coefficient,
        } => {
            let cfg = acceptance::Config {
                semiring: if C::name() == "rat" {
                    SemiringKind::Rational
                } else {
                    SemiringKind::Boolean
                },
                corrupt_coefficient: *corrupt_coefficient,
                seed: cli.seed,
            };
            let results = acceptance::run_all(&cfg);
            let failed = results.iter().any(|r| r.status == Status::Fail);
            let text = results
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("\n");
            let payload =
                json!({"criteria": results.iter().map(|r| r.to_json()).collect::<Vec<_>>()});
            Ok(Report {
                status: if failed { "error" } else { "ok" },
                payload,
                text: Some(text),
            })
        }
    }
}

fn accordion_command<C: Semiring>(sub: &AccordionCommand) -> Result<Report, Failure> {
    match sub {
        AccordionCommand::Trace { n, fuel } => {
            let rep = accordion::head_cycle_trace(*n, *fuel);
            let status = match rep.outcome {
                CycleOutcome::Completed => "ok",
                CycleOutcome::Exhausted => "exhausted",
                CycleOutcome::Mismatch => "error",
            };
            let text = rep
                .hits
                .iter()
                .map(|h| format!("({}) after {} steps", h.label, h.step))
                .chain([format!("{} head steps", rep.trace.len())])
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Report {
                status,
                payload: rep.to_json(),
                text: Some(text),
            })
        }
        AccordionCommand::Approximant { d, fuel } => match accordion::approximant_path(*d, *fuel) {
            Ok(path) => {
                let text = format!("{} steps to {}", path.trace.len(), path.trace.end());
                Ok(Report::ok(path.to_json()).with_text(text))
            }
            Err(e @ accordion::AccordionError::Exhausted { .. }) => Ok(Report {
                status: "exhausted",
                payload: json!({"message": e.to_string()}),
                text: Some(e.to_string()),
            }),
            Err(e) => Err(e.into()),
        },
        AccordionCommand::Nosearch { case, n, budget } => {
            let rep = accordion::depth_restricted_negative_search(*case, *n, *budget);
            let text = format!("{} ({} component problems)", rep.verdict(), rep.states);
            Ok(Report {
                status: if rep.ok() { "ok" } else { "error" },
                payload: rep.to_json(),
                text: Some(text),
            })
        }
        AccordionCommand::Layers { d, size_bound } => {
            let l = accordion::taylor_layers::<C>(*d, *size_bound);
            let payload = json!({
                "d": d,
                "size_bound": size_bound,
                "cumulative": sum_json(&l.cumulative),
                "layer": sum_json(&l.layer),
            });
            Ok(Report::ok(payload).with_text(coeff_lines(&l.layer).join("\n")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.semiring {
        SemiringArg::Rat => execute::<Rational>(&cli),
        SemiringArg::Bool => execute::<Boolean>(&cli),
    };
    let report = match result {
        Ok(r) => r,
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            Report {
                status: "error",
                payload: json!({"message": message}),
                text: None,
            }
        }
    };
    match (&report.text, cli.pretty) {
        (Some(text), true) => println!("{text}"),
        _ if cli.pretty => println!(
            "{}",
            serde_json::to_string_pretty(&report.to_json()).expect("json")
        ),
        _ => println!("{}", report.to_json()),
    }
    if report.status == "ok" {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
