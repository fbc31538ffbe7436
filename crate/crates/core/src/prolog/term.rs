use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::constraint::Var;
use crate::term::{atom_needs_quotes, GroundTerm};

/// Prolog terms. Variables are indices: clause-local in source clauses,
/// machine-global at run time. `Sym` is the symbolic outcome of a switch
/// instance.
#[derive(Clone, Debug)]
pub enum Term {
    Var(usize),
    Atom(Arc<str>),
    Int(i64),
    Real(Arc<BigRational>),
    Compound(Arc<str>, Arc<[Term]>),
    Sym(Var),
}

impl Term {
    pub fn atom(name: &str) -> Self {
        Term::Atom(Arc::from(name))
    }

    pub fn compound(name: &str, args: Vec<Term>) -> Self {
        if args.is_empty() {
            Term::atom(name)
        } else {
            Term::Compound(Arc::from(name), args.into())
        }
    }

    pub fn nil() -> Self {
        Term::atom("[]")
    }

    pub fn cons(head: Term, tail: Term) -> Self {
        Term::compound(".", vec![head, tail])
    }

    pub fn list(items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>, tail: Term) -> Self {
        items.into_iter().rev().fold(tail, |t, h| Term::cons(h, t))
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Term::Atom(a) | Term::Compound(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, a) => a,
            _ => &[],
        }
    }

    pub fn arity(&self) -> usize {
        self.args().len()
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound(..))
    }

    pub fn is(&self, name: &str, arity: usize) -> bool {
        self.name() == Some(name) && self.arity() == arity
    }

    pub fn as_ground(&self) -> Option<GroundTerm> {
        match self {
            Term::Int(i) => Some(GroundTerm::Int(*i)),
            Term::Atom(a) => Some(GroundTerm::Atom(a.clone())),
            _ => None,
        }
    }

    /// Adds `extra` arguments at the end.
    pub fn extend(&self, extra: Vec<Term>) -> Option<Term> {
        let name = self.name()?;
        let mut args = self.args().to_vec();
        args.extend(extra);
        Some(Term::compound(name, args))
    }

    /// Elements of a proper list.
    pub fn list_items(&self) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        let mut t = self;
        loop {
            match t {
                Term::Atom(a) if &**a == "[]" => return Some(out),
                Term::Compound(f, a) if &**f == "." && a.len() == 2 => {
                    out.push(a[0].clone());
                    t = &a[1];
                }
                _ => return None,
            }
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Term::Var(i) => Some(*i),
            Term::Compound(_, a) => a.iter().filter_map(Term::max_var).max(),
            _ => None,
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(usize) -> Term) -> Term {
        match self {
            Term::Var(i) => f(*i),
            Term::Compound(n, a) => Term::Compound(n.clone(), a.iter().map(|t| t.map_vars(f)).collect()),
            t => t.clone(),
        }
    }
}

impl From<GroundTerm> for Term {
    fn from(g: GroundTerm) -> Self {
        match g {
            GroundTerm::Int(i) => Term::Int(i),
            GroundTerm::Atom(a) => Term::Atom(a),
        }
    }
}

fn op_info(name: &str) -> Option<(u32, &'static str)> {
    super::parser::infix_op(name)
}

/// Writes a term with variables shown as `_G<n>` unless `names` gives one.
pub struct Display<'a> {
    pub term: &'a Term,
    pub names: &'a [String],
}

impl Display<'_> {
    fn write(&self, t: &Term, prec: u32, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match t {
            Term::Var(i) => match self.names.get(*i) {
                Some(n) => f.write_str(n),
                None => write!(f, "_G{i}"),
            },
            Term::Int(i) => write!(f, "{i}"),
            Term::Real(r) => write!(f, "{}", r.to_f64().unwrap_or(f64::NAN)),
            Term::Atom(a) => write_atom(a, f),
            Term::Sym(v) => write!(f, "{v}"),
            Term::Compound(name, args) => {
                if &**name == "." && args.len() == 2 {
                    return self.write_list(t, f);
                }
                if args.len() == 2 {
                    if let Some((p, kind)) = op_info(name) {
                        let (lp, rp) = match kind {
                            "xfy" => (p - 1, p),
                            "yfx" => (p, p - 1),
                            _ => (p - 1, p - 1),
                        };
                        if p > prec {
                            f.write_str("(")?;
                        }
                        self.write(&args[0], lp, f)?;
                        match &**name {
                            "," => f.write_str(", ")?,
                            n if n.chars().all(|c| c.is_alphabetic()) => write!(f, " {n} ")?,
                            n if n == ":" => f.write_str(":")?,
                            n => write!(f, " {n} ")?,
                        }
                        self.write(&args[1], rp, f)?;
                        if p > prec {
                            f.write_str(")")?;
                        }
                        return Ok(());
                    }
                }
                if args.len() == 1 && &**name == "\\+" {
                    f.write_str("\\+ ")?;
                    return self.write(&args[0], 900, f);
                }
                if args.len() == 1 && &**name == "-" {
                    f.write_str("-")?;
                    return self.write(&args[0], 200, f);
                }
                write_atom(name, f)?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    self.write(a, 999, f)?;
                }
                f.write_str(")")
            }
        }
    }

    fn write_list(&self, mut t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        loop {
            match t {
                Term::Compound(n, a) if &**n == "." && a.len() == 2 => {
                    if !first {
                        f.write_str(", ")?;
                    }
                    first = false;
                    self.write(&a[0], 999, f)?;
                    t = &a[1];
                }
                Term::Atom(a) if &**a == "[]" => break,
                other => {
                    f.write_str("|")?;
                    self.write(other, 999, f)?;
                    break;
                }
            }
        }
        f.write_str("]")
    }
}

fn write_atom(a: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let symbolic = !a.is_empty() && a.chars().all(|c| super::lexer::is_symbol_char(c));
    if a == "[]" || a == "!" || a == ";" || a == "," || symbolic || !atom_needs_quotes(a) {
        f.write_str(a)
    } else {
        write!(f, "'{}'", a.replace('\'', "\\'"))
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.term, 1200, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display { term: self, names: &[] }.fmt(f)
    }
}
