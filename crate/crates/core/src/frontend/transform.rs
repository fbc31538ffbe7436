use std::fmt;

use crate::prolog::{Clause, PredKey, Program, Term};

/// The diagram-threaded form of a program: every user predicate `p/n`
/// becomes `p/(n+2)` with an input and an output diagram argument.
#[derive(Clone, Debug)]
pub struct Transformed {
    pub clauses: Vec<Clause>,
    /// Transformed predicates whose answers are combined by disjunction.
    pub tabled: Vec<PredKey>,
}

pub(crate) fn is_plain_builtin(name: &str, arity: usize) -> bool {
    matches!(
        (name, arity),
        ("true" | "fail" | "false" | "!", 0)
            | ("is" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" | "==" | "\\==" | "length", 2)
            | ("between" | "for", 3)
    )
}

struct Threader<'a> {
    names: &'a mut Vec<String>,
    count: usize,
}

impl Threader<'_> {
    fn fresh(&mut self) -> Term {
        self.count += 1;
        self.names.push(format!("O{}", self.count));
        Term::Var(self.names.len() - 1)
    }

    fn target(&mut self, t: Option<Term>) -> Term {
        t.unwrap_or_else(|| self.fresh())
    }

    /// Threads `g` from `input`, ending in `to` when given. Returns the new
    /// goal and its output diagram term.
    fn goal(&mut self, g: &Term, input: Term, to: Option<Term>) -> (Term, Term) {
        let (name, arity) = match g {
            Term::Atom(a) => (&**a, 0),
            Term::Compound(f, a) => (&**f, a.len()),
            _ => return self.pass(g.clone(), input, to),
        };
        let args = g.args();
        match (name, arity) {
            (",", 2) => {
                let (a, mid) = self.goal(&args[0], input, None);
                let (b, out) = self.goal(&args[1], mid, to);
                (Term::compound(",", vec![a, b]), out)
            }
            (";", 2) if args[0].is("->", 2) => {
                let (c, mid) = self.goal(&args[0].args()[0], input.clone(), None);
                let out = self.target(to);
                let (t, _) = self.goal(&args[0].args()[1], mid, Some(out.clone()));
                let (e, _) = self.goal(&args[1], input, Some(out.clone()));
                (Term::compound(";", vec![Term::compound("->", vec![c, t]), e]), out)
            }
            (";", 2) => {
                let out = self.target(to);
                let (a, _) = self.goal(&args[0], input.clone(), Some(out.clone()));
                let (b, _) = self.goal(&args[1], input, Some(out.clone()));
                (Term::compound(";", vec![a, b]), out)
            }
            ("->", 2) => {
                let (c, mid) = self.goal(&args[0], input, None);
                let (t, out) = self.goal(&args[1], mid, to);
                (Term::compound("->", vec![c, t]), out)
            }
            ("\\+", 1) => {
                let (inner, _) = self.goal(&args[0], input.clone(), None);
                self.pass(Term::compound("\\+", vec![inner]), input, to)
            }
            ("=" | "\\=", 2) => {
                let out = self.target(to);
                (Term::compound("constraint", vec![g.clone(), input, out.clone()]), out)
            }
            (":", 2) if !is_plain_builtin(args[1].name().unwrap_or(""), args[1].arity()) => {
                let (inner, out) = self.goal(&args[1], input, to);
                (Term::compound(":", vec![args[0].clone(), inner]), out)
            }
            _ if name == ":" || is_plain_builtin(name, arity) => self.pass(g.clone(), input, to),
            _ => {
                let out = self.target(to);
                (g.extend(vec![input, out.clone()]).expect("callable"), out)
            }
        }
    }

    /// A goal that leaves the diagram unchanged.
    fn pass(&mut self, g: Term, input: Term, to: Option<Term>) -> (Term, Term) {
        match to {
            None => (g, input),
            Some(out) => (Term::compound(",", vec![g, Term::compound("=", vec![out.clone(), input])]), out),
        }
    }
}

fn clause(c: &Clause) -> Clause {
    let mut names = c.var_names.clone();
    let mut th = Threader { names: &mut names, count: 0 };
    let input = th.fresh();
    let (body, out) = if c.is_fact() { (c.body.clone(), input.clone()) } else { th.goal(&c.body, input.clone(), None) };
    if c.is_fact() {
        th.names[input.max_var().unwrap()] = "O".into();
    }
    let head = c.head.extend(vec![input, out]).expect("callable head");
    Clause { head, body, var_names: names, line: c.line }
}

pub fn transform(p: &Program) -> Transformed {
    Transformed {
        clauses: p.clauses().iter().map(clause).collect(),
        tabled: p.predicates().into_iter().map(|(n, a)| (n, a + 2)).collect(),
    }
}

impl fmt::Display for Transformed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, arity) in &self.tabled {
            let blanks = vec!["_"; arity - 1].join(", ");
            writeln!(f, ":- table {name}({blanks}, lattice(or/3)).")?;
        }
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
