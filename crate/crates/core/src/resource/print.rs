use super::{free_rvars, Bag, RTerm};
use crate::lambda::print::Namer;

pub fn print_rterm(t: &RTerm) -> String {
    let mut namer = Namer::new(free_rvars(t));
    let mut out = String::new();
    term(t, &mut namer, &mut out);
    out
}

pub fn print_bag(b: &Bag) -> String {
    let free = b.elems().iter().flat_map(free_rvars).collect();
    let mut namer = Namer::new(free);
    let mut out = String::new();
    bag(b, &mut namer, &mut out);
    out
}

fn term(t: &RTerm, namer: &mut Namer, out: &mut String) {
    match t {
        RTerm::Var(v) => out.push_str(&namer.var(v)),
        RTerm::Abs(h, b) => {
            let name = namer.push(&h.0);
            out.push('\\');
            out.push_str(&name);
            out.push('.');
            term(b, namer, out);
            namer.pop();
        }
        RTerm::App(f, b) => {
            out.push('(');
            term(f, namer, out);
            out.push(')');
            bag(b, namer, out);
        }
    }
}

fn bag(b: &Bag, namer: &mut Namer, out: &mut String) {
    if b.is_empty() {
        out.push('1');
        return;
    }
    out.push('[');
    for (i, t) in b.elems().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        term(t, namer, out);
    }
    out.push(']');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resource::parse_rterm;

    #[test]
    fn round_trip() {
        for s in [
            "x",
            "(x)1",
            "(\\x.(x)[x])[y,y]",
            "((f)[a])[b]",
            "\\x.\\x'.(x)[x']",
        ] {
            let t = parse_rterm(s).unwrap();
            assert_eq!(print_rterm(&t), s);
        }
    }
}
