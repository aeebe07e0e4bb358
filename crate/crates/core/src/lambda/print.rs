use std::collections::BTreeSet;

use super::{free_vars, Term, Var};

/// Chooses printable binder names: a binder keeps its hint unless the name
/// is free in the whole term or already bound in scope, in which case
/// primes are appended.
pub(crate) struct Namer {
    free: BTreeSet<String>,
    scope: Vec<String>,
}

impl Namer {
    pub(crate) fn new(free: BTreeSet<String>) -> Self {
        Namer {
            free,
            scope: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, hint: &str) -> String {
        let mut name = if hint.is_empty() {
            "x".to_string()
        } else {
            hint.to_string()
        };
        while self.free.contains(&name) || self.scope.contains(&name) {
            name.push('\'');
        }
        self.scope.push(name.clone());
        name
    }

    pub(crate) fn pop(&mut self) {
        self.scope.pop();
    }

    pub(crate) fn var(&self, v: &Var) -> String {
        match v {
            Var::Free(n) => n.clone(),
            Var::Bound(i) => match self.scope.len().checked_sub(i + 1) {
                Some(k) => self.scope[k].clone(),
                None => format!("?{}", i - self.scope.len()),
            },
        }
    }
}

pub fn print_term(t: &Term) -> String {
    let mut namer = Namer::new(free_vars(t));
    let mut out = String::new();
    term(t, &mut namer, &mut out);
    out
}

fn is_simple(t: &Term) -> bool {
    matches!(t, Term::Var(_) | Term::Bottom)
}

fn term(t: &Term, namer: &mut Namer, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&namer.var(v)),
        Term::Bottom => out.push_str("_|_"),
        Term::Abs(h, b) => {
            let name = namer.push(&h.0);
            out.push('\\');
            out.push_str(&name);
            out.push('.');
            term(b, namer, out);
            namer.pop();
        }
        Term::App(..) => {
            let (head, args) = t.spine();
            spine(head, &args, namer, out);
        }
    }
}

fn spine(head: &Term, args: &[&Term], namer: &mut Namer, out: &mut String) {
    let (last, init) = args.split_last().expect("application has an argument");
    // A compound argument that is not the last one forces a parenthesized prefix.
    let cut = init.iter().rposition(|a| !is_simple(a));
    let rest = match cut {
        Some(j) => {
            out.push('(');
            spine(head, &args[..=j], namer, out);
            out.push(')');
            &init[j + 1..]
        }
        None => {
            out.push('(');
            term(head, namer, out);
            out.push(')');
            init
        }
    };
    for (i, a) in rest.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        term(a, namer, out);
    }
    if !rest.is_empty() {
        out.push(' ');
    }
    term(last, namer, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse_term;

    #[test]
    fn print_examples() {
        assert_eq!(print_term(&Term::lam("x", Term::var("x"))), "\\x.x");
        let t = Term::apps(Term::var("x"), [Term::var("y"), Term::var("z")]);
        assert_eq!(print_term(&t), "(x)y z");
        assert_eq!(print_term(&Term::Bottom), "_|_");
    }

    #[test]
    fn compound_arguments() {
        let inner = Term::app(Term::var("g"), Term::var("a"));
        let t = Term::app(Term::app(Term::var("f"), inner.clone()), Term::var("b"));
        let s = print_term(&t);
        assert_eq!(s, "((f)(g)a)b");
        assert_eq!(parse_term(&s).unwrap(), t);
        let t = Term::app(Term::var("f"), inner);
        assert_eq!(print_term(&t), "(f)(g)a");
    }

    #[test]
    fn shadowed_binders_are_renamed() {
        let t = parse_term("\\x.\\x.x").unwrap();
        assert_eq!(print_term(&t), "\\x.\\x'.x'");
        assert_eq!(parse_term(&print_term(&t)).unwrap(), t);
    }
}
