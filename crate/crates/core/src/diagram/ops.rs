use std::collections::HashMap;

use super::Osdd;
use crate::constraint::{AtomicConstraint, Formula, Var};
use crate::error::{ConstraintError, DiagramError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
}

impl BoolOp {
    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::And => a && b,
            BoolOp::Or => a || b,
        }
    }

    /// Leaf identities. `None` when both sides are internal or the result
    /// needs a recursive combination.
    pub(crate) fn shortcut<T: Clone>(self, a: (Option<bool>, &T), b: (Option<bool>, &T)) -> Option<T> {
        let absorbing = self == BoolOp::Or;
        match (a.0, b.0) {
            (Some(x), _) if x == absorbing => Some(a.1.clone()),
            (_, Some(y)) if y == absorbing => Some(b.1.clone()),
            (Some(_), _) => Some(b.1.clone()),
            (_, Some(_)) => Some(a.1.clone()),
            (None, None) => None,
        }
    }
}

pub(crate) fn oplus(a: &Osdd, b: &Osdd, op: BoolOp) -> Result<Osdd, DiagramError> {
    let raw = combine(a, b, op, &mut HashMap::new())?;
    raw.to_proper()
}

fn combine(a: &Osdd, b: &Osdd, op: BoolOp, memo: &mut HashMap<(usize, usize), Osdd>) -> Result<Osdd, ConstraintError> {
    if let Some(r) = op.shortcut((a.leaf_value(), a), (b.leaf_value(), b)) {
        return Ok(r);
    }
    if a == b {
        return Ok(a.clone());
    }
    let key = (a.id().min(b.id()), a.id().max(b.id()));
    if let Some(r) = memo.get(&key) {
        return Ok(r.clone());
    }
    let (sa, sb) = (a.switch_instance().unwrap(), b.switch_instance().unwrap());
    let r = if sa == sb {
        let mut edges = Vec::new();
        for ea in a.edges() {
            for eb in b.edges() {
                let label = ea.label.and(&eb.label);
                if !label.satisfiable()? {
                    continue;
                }
                edges.push((label, combine(&ea.child, &eb.child, op, memo)?));
            }
        }
        Osdd::node(a.var().unwrap().clone(), edges)?
    } else {
        let (lo, hi) = if sa < sb { (a, b) } else { (b, a) };
        let mut edges = Vec::new();
        for e in lo.edges() {
            edges.push((e.label.clone(), combine(&e.child, hi, op, memo)?));
        }
        Osdd::node(lo.var().unwrap().clone(), edges)?
    };
    memo.insert(key, r.clone());
    Ok(r)
}

/// Applies the atoms of `f` one at a time, each at the shallowest node that
/// binds its variables.
pub(crate) fn apply_formula(d: &Osdd, f: &Formula) -> Result<Osdd, DiagramError> {
    let mut d = d.clone();
    for atom in f.atoms() {
        d = apply_atom(&d, atom)?;
    }
    Ok(d)
}

fn apply_atom(d: &Osdd, atom: &AtomicConstraint) -> Result<Osdd, DiagramError> {
    if d.is_leaf() {
        return Ok(d.clone());
    }
    let f = Formula::single(atom.clone());
    let vars: Vec<Var> = f.vars().into_iter().collect();
    let full = (1u64 << vars.len()) - 1;
    let ctx = Apply { f: &f, vars, full, negation: f.negate()? };
    let raw = ctx.go(d, 0, &mut HashMap::new())?;
    raw.to_proper()
}

struct Apply<'a> {
    f: &'a Formula,
    vars: Vec<Var>,
    full: u64,
    negation: Vec<Formula>,
}

impl Apply<'_> {
    fn go(&self, n: &Osdd, mask: u64, memo: &mut HashMap<(usize, u64), Osdd>) -> Result<Osdd, DiagramError> {
        match n.leaf_value() {
            Some(false) => return Ok(n.clone()),
            Some(true) => return Err(DiagramError::UnboundConstraint { atom: self.f.to_string() }),
            None => {}
        }
        if let Some(r) = memo.get(&(n.id(), mask)) {
            return Ok(r.clone());
        }
        let y = n.var().unwrap();
        let inner = match self.vars.binary_search(y) {
            Ok(i) => mask | (1 << i),
            Err(_) => mask,
        };
        let mut edges = Vec::new();
        if inner == self.full {
            for e in n.edges() {
                edges.push((e.label.and(self.f), e.child.clone()));
            }
            for m in &self.negation {
                edges.push((m.clone(), Osdd::zero()));
            }
        } else {
            for e in n.edges() {
                edges.push((e.label.clone(), self.go(&e.child, inner, memo)?));
            }
        }
        let r = Osdd::node(y.clone(), edges)?;
        memo.insert((n.id(), mask), r.clone());
        Ok(r)
    }
}
