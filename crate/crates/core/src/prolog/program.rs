use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use super::dcg;
use super::parser::{read_terms, ReadTerm};
use super::term::{Display, Term};
use crate::error::{ParseError, ProgramError};
use crate::switch::{Distribution, SwitchDecl, Switches};
use crate::term::{GroundTerm, TypeDomain};

#[derive(Clone, Debug)]
pub struct Clause {
    pub head: Term,
    /// `true` for facts.
    pub body: Term,
    pub var_names: Vec<String>,
    pub line: usize,
}

impl Clause {
    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn is_fact(&self) -> bool {
        self.body.is("true", 0)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = Display { term: &self.head, names: &self.var_names };
        if self.is_fact() {
            write!(f, "{head}.")
        } else {
            write!(f, "{head} :- {}.", Display { term: &self.body, names: &self.var_names })
        }
    }
}

pub type PredKey = (Arc<str>, usize);

#[derive(Clone, Debug, Default)]
pub struct Program {
    clauses: Vec<Clause>,
    index: HashMap<PredKey, Vec<usize>>,
    switches: Switches,
}

#[derive(Default)]
struct PendingSwitch {
    values: Option<Vec<GroundTerm>>,
    dist: Option<Term>,
}

impl Program {
    pub fn parse(src: &str) -> Result<Program, ProgramError> {
        let mut prog = Program::default();
        let mut pending: BTreeMap<String, PendingSwitch> = BTreeMap::new();
        for rt in read_terms(src)? {
            prog.add(rt, &mut pending)?;
        }
        for (name, p) in pending {
            prog.switches.insert(switch_decl(&name, p)?);
        }
        Ok(prog)
    }

    fn add(&mut self, rt: ReadTerm, pending: &mut BTreeMap<String, PendingSwitch>) -> Result<(), ProgramError> {
        let perr = |msg: String| ProgramError::Parse(ParseError { line: rt.line, col: rt.col, msg });
        let t = &rt.term;
        if t.is(":-", 1) || t.is("?-", 1) {
            let d = &t.args()[0];
            return match d.name() {
                Some("values" | "set_sw") if d.arity() == 2 => declare(d, pending).map_err(perr),
                Some("table" | "dynamic" | "discontiguous") => Ok(()),
                _ => Err(ProgramError::UnknownDirective(d.to_string())),
            };
        }
        if (t.is("values", 2) || t.is("set_sw", 2)) && !t.is(":-", 2) {
            return declare(t, pending).map_err(perr);
        }
        let mut names = rt.var_names.clone();
        let (head, body) = if t.is("-->", 2) {
            dcg::translate(&t.args()[0], &t.args()[1], &mut names).map_err(perr)?
        } else if t.is(":-", 2) {
            (t.args()[0].clone(), t.args()[1].clone())
        } else {
            (t.clone(), Term::atom("true"))
        };
        let Some(name) = head.name() else {
            return Err(perr(format!("`{head}` cannot be a clause head")));
        };
        let key = (Arc::from(name), head.arity());
        self.index.entry(key).or_default().push(self.clauses.len());
        self.clauses.push(Clause { head, body, var_names: names, line: rt.line });
        Ok(())
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// User predicates as `(name, arity)`, sorted.
    pub fn predicates(&self) -> Vec<PredKey> {
        let mut v: Vec<PredKey> = self.index.keys().cloned().collect();
        v.sort();
        v
    }

    pub fn clauses_of(&self, name: &str, arity: usize) -> impl Iterator<Item = &Clause> {
        self.index.get(&(Arc::from(name), arity)).into_iter().flatten().map(|&i| &self.clauses[i])
    }

    pub fn defines(&self, name: &str, arity: usize) -> bool {
        self.index.contains_key(&(Arc::from(name), arity))
    }

    pub fn switches(&self) -> &Switches {
        &self.switches
    }

    /// A copy with clauses in a different order; used to check order
    /// insensitivity.
    pub fn with_clause_order(&self, order: &[usize]) -> Program {
        let mut p = Program { switches: self.switches.clone(), ..Program::default() };
        for &i in order {
            let c = self.clauses[i].clone();
            let key = (Arc::from(c.head.name().unwrap()), c.head.arity());
            p.index.entry(key).or_default().push(p.clauses.len());
            p.clauses.push(c);
        }
        p
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        for s in self.switches.iter() {
            let vals: Vec<String> = s.domain.values().iter().map(|v| v.to_string()).collect();
            writeln!(f, "values({}, [{}]).", s.name, vals.join(", "))?;
            match &s.dist {
                Some(Distribution::Uniform) => writeln!(f, "set_sw({}, uniform).", s.name)?,
                Some(Distribution::Categorical(w)) => {
                    let w: Vec<String> = w.iter().map(|p| p.to_string()).collect();
                    writeln!(f, "set_sw({}, [{}]).", s.name, w.join(", "))?
                }
                None => {}
            }
        }
        Ok(())
    }
}

/// `b` and `b(_)` both declare the switch family `b`.
fn switch_name(t: &Term) -> Result<String, String> {
    match t {
        Term::Atom(a) => Ok(a.to_string()),
        Term::Compound(f, args) if args.iter().all(|a| matches!(a, Term::Var(_))) => Ok(f.to_string()),
        _ => Err(format!("unsupported switch pattern `{t}`")),
    }
}

fn declare(t: &Term, pending: &mut BTreeMap<String, PendingSwitch>) -> Result<(), String> {
    let name = switch_name(&t.args()[0])?;
    let entry = pending.entry(name.clone()).or_default();
    let arg = &t.args()[1];
    if t.is("values", 2) {
        let items = arg.list_items().ok_or_else(|| format!("values of `{name}` must be a list"))?;
        let vals = items
            .iter()
            .map(|v| v.as_ground().ok_or_else(|| format!("outcome `{v}` of `{name}` must be an atom or integer")))
            .collect::<Result<Vec<_>, _>>()?;
        entry.values = Some(vals);
    } else {
        entry.dist = Some(arg.clone());
    }
    Ok(())
}

fn switch_decl(name: &str, p: PendingSwitch) -> Result<SwitchDecl, ProgramError> {
    let bad = |m: &str| ProgramError::BadSwitch(name.to_string(), m.to_string());
    let (values, dist) = match p.dist {
        None => (p.values.ok_or_else(|| bad("no outcomes declared"))?, None),
        Some(d) if d.is("uniform", 2) => {
            let (Term::Int(lo), Term::Int(hi)) = (&d.args()[0], &d.args()[1]) else {
                return Err(bad("uniform/2 needs integer bounds"));
            };
            let range: Vec<GroundTerm> = (*lo..=*hi).map(GroundTerm::Int).collect();
            if p.values.as_ref().is_some_and(|v| *v != range) {
                return Err(bad("uniform range disagrees with declared outcomes"));
            }
            (range, Some(Distribution::Uniform))
        }
        Some(d) if d.is("uniform", 0) => {
            (p.values.ok_or_else(|| bad("uniform needs declared outcomes"))?, Some(Distribution::Uniform))
        }
        Some(d) => {
            let items = d.list_items().ok_or_else(|| bad("unknown distribution"))?;
            let w = items
                .iter()
                .map(|x| match x {
                    Term::Int(i) => Ok(BigRational::from_integer((*i).into())),
                    Term::Real(r) => Ok((**r).clone()),
                    _ => Err(bad("probabilities must be numbers")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            (p.values.ok_or_else(|| bad("probabilities given without outcomes"))?, Some(Distribution::Categorical(w)))
        }
    };
    let domain = Arc::new(TypeDomain::new(name, values)?);
    SwitchDecl::new(name, domain, dist)
}
