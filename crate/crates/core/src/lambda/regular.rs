//! Finite presentations of 001-infinitary terms as guarded equation systems.
//!
//! An equation body mentions other equations by name: a free variable whose
//! name is an equation name is a reference. The system is guarded when every
//! cycle of references crosses an argument edge, so every infinite branch of
//! the unfolding enters argument positions infinitely often.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{parse_term, ParseError, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("line {line}: expected `name = term` or `@root name`")]
    Malformed { line: usize },
    #[error("equation `{0}` is defined twice")]
    Duplicate(String),
    #[error("root `{0}` has no equation")]
    UnknownRoot(String),
    #[error("no `@root` directive")]
    MissingRoot,
    #[error("unguarded cycle through `{0}`: a cycle must cross an argument position")]
    Unguarded(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RegularSystem {
    equations: BTreeMap<String, Term>,
    root: String,
}

impl RegularSystem {
    pub fn new(equations: BTreeMap<String, Term>, root: &str) -> Result<Self, SystemError> {
        if !equations.contains_key(root) {
            return Err(SystemError::UnknownRoot(root.to_string()));
        }
        let sys = RegularSystem {
            equations,
            root: root.to_string(),
        };
        sys.check_guarded()?;
        Ok(sys)
    }

    /// Parses `name = term` lines and one `@root name` directive. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, SystemError> {
        let mut equations = BTreeMap::new();
        let mut root = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("@root") {
                root = Some(rest.trim().to_string());
                continue;
            }
            let (name, body) = line
                .split_once('=')
                .ok_or(SystemError::Malformed { line: i + 1 })?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(super::parse::is_ident_char) {
                return Err(SystemError::Malformed { line: i + 1 });
            }
            let term = parse_term(body).map_err(|source| SystemError::Parse {
                line: i + 1,
                source,
            })?;
            if equations.insert(name.to_string(), term).is_some() {
                return Err(SystemError::Duplicate(name.to_string()));
            }
        }
        let root = root.ok_or(SystemError::MissingRoot)?;
        RegularSystem::new(equations, &root)
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn equations(&self) -> &BTreeMap<String, Term> {
        &self.equations
    }

    fn refs_outside_args(&self, t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(Var::Free(n)) if self.equations.contains_key(n) => {
                out.insert(n.clone());
            }
            Term::Var(_) | Term::Bottom => {}
            Term::Abs(_, b) => self.refs_outside_args(b, out),
            Term::App(f, _) => self.refs_outside_args(f, out),
        }
    }

    fn check_guarded(&self) -> Result<(), SystemError> {
        let edges: BTreeMap<&str, BTreeSet<String>> = self
            .equations
            .iter()
            .map(|(n, t)| {
                let mut out = BTreeSet::new();
                self.refs_outside_args(t, &mut out);
                (n.as_str(), out)
            })
            .collect();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(
            n: &'a str,
            edges: &'a BTreeMap<&'a str, BTreeSet<String>>,
            state: &mut BTreeMap<&'a str, u8>,
        ) -> Result<(), SystemError> {
            match state.get(n) {
                Some(1) => return Err(SystemError::Unguarded(n.to_string())),
                Some(2) => return Ok(()),
                _ => {}
            }
            state.insert(n, 1);
            for m in &edges[n] {
                let (key, _) = edges.get_key_value(m.as_str()).expect("reference resolves");
                visit(key, edges, state)?;
            }
            state.insert(n, 2);
            Ok(())
        }
        for n in edges.keys() {
            visit(n, &edges, &mut state)?;
        }
        Ok(())
    }

    /// Unfolds the root, keeping arguments down to applicative depth `depth`
    /// and cutting deeper ones to ⊥.
    pub fn truncate(&self, depth: usize) -> Term {
        self.unfold(&self.equations[&self.root], depth)
    }

    fn unfold(&self, t: &Term, depth: usize) -> Term {
        match t {
            Term::Var(Var::Free(n)) => match self.equations.get(n) {
                Some(body) => self.unfold(body, depth),
                None => t.clone(),
            },
            Term::Var(_) | Term::Bottom => t.clone(),
            Term::Abs(h, b) => Term::Abs(h.clone(), Box::new(self.unfold(b, depth))),
            Term::App(f, a) => {
                let arg = if depth == 0 {
                    Term::Bottom
                } else {
                    self.unfold(a, depth - 1)
                };
                Term::app(self.unfold(f, depth), arg)
            }
        }
    }
}

impl fmt::Display for RegularSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, t) in &self.equations {
            writeln!(f, "{n} = {t}")?;
        }
        write!(f, "@root {}", self.root)
    }
}

impl fmt::Debug for RegularSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guardedness() {
        assert!(matches!(
            RegularSystem::parse("X = (X)y\n@root X"),
            Err(SystemError::Unguarded(_))
        ));
        assert!(RegularSystem::parse("X = (y)X\n@root X").is_ok());
        assert!(matches!(
            RegularSystem::parse("X = Y\nY = \\z.X\n@root X"),
            Err(SystemError::Unguarded(_))
        ));
        assert!(matches!(
            RegularSystem::parse("X = x\n@root Z"),
            Err(SystemError::UnknownRoot(_))
        ));
        assert!(matches!(
            RegularSystem::parse("X = x"),
            Err(SystemError::MissingRoot)
        ));
    }

    #[test]
    fn unfolding() {
        let sys = RegularSystem::parse("X = (y)X\n@root X").unwrap();
        assert_eq!(sys.truncate(0), parse_term("(y)_|_").unwrap());
        assert_eq!(sys.truncate(2), parse_term("(y)(y)(y)_|_").unwrap());
    }

    #[test]
    fn truncation_is_monotone() {
        let sys = RegularSystem::parse("X = (\\b.(b)c)X\n@root X").unwrap();
        for d in 0..5 {
            let small = sys.truncate(d);
            assert_eq!(sys.truncate(d + 1).truncate(d), small);
        }
    }
}
