use std::collections::BTreeSet;

use super::graph::{Closure, ConstraintGraph};
use super::{AtomicConstraint, Formula, Operand, Polarity, Var};
use crate::error::ConstraintError;
use crate::term::GroundTerm;

/// Search nodes the exhaustive fallback may visit before giving up.
pub const SEARCH_BUDGET: u64 = 1_000_000;

/// Values a variable can take, relative to its own domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionSet {
    Empty,
    Single(GroundTerm),
    /// Every domain value except these (sorted, all inside the domain).
    Except(Vec<GroundTerm>),
    /// Exactly these values, in domain order.
    Explicit(Vec<GroundTerm>),
}

impl SolutionSet {
    pub fn len(&self, x: &Var) -> usize {
        match self {
            SolutionSet::Empty => 0,
            SolutionSet::Single(_) => 1,
            SolutionSet::Except(ex) => x.domain().len() - ex.len(),
            SolutionSet::Explicit(v) => v.len(),
        }
    }

    pub fn is_empty(&self, x: &Var) -> bool {
        self.len(x) == 0
    }

    pub fn contains(&self, x: &Var, v: &GroundTerm) -> bool {
        match self {
            SolutionSet::Empty => false,
            SolutionSet::Single(s) => s == v,
            SolutionSet::Except(ex) => x.domain().contains(v) && ex.binary_search(v).is_err(),
            SolutionSet::Explicit(vs) => vs.contains(v),
        }
    }

    /// Members in domain order.
    pub fn values(&self, x: &Var) -> Vec<GroundTerm> {
        match self {
            SolutionSet::Empty => Vec::new(),
            SolutionSet::Single(s) => vec![s.clone()],
            SolutionSet::Except(ex) => {
                x.domain().values().iter().filter(|v| ex.binary_search(v).is_err()).cloned().collect()
            }
            SolutionSet::Explicit(vs) => vs.clone(),
        }
    }

    pub fn to_set(&self, x: &Var) -> BTreeSet<GroundTerm> {
        self.values(x).into_iter().collect()
    }

    /// The smallest member under the global order.
    pub fn min_value(&self, x: &Var) -> Option<GroundTerm> {
        match self {
            SolutionSet::Single(s) => Some(s.clone()),
            _ => self.values(x).into_iter().min(),
        }
    }
}

/// Per-class residual domains of a closed graph.
struct Residual {
    fixed: Vec<Option<GroundTerm>>,
    cand: Vec<Vec<GroundTerm>>,
    unfixed: Vec<usize>,
    /// Unfixed neq-neighbours of each class.
    adj: Vec<Vec<usize>>,
}

fn residual(g: &ConstraintGraph) -> Option<Residual> {
    let n = g.classes.len();
    let mut fixed = vec![None; n];
    let mut cand = vec![Vec::new(); n];
    for (c, class) in g.classes.iter().enumerate() {
        let vars: Vec<&Var> = class.members.iter().filter_map(|&i| g.nodes[i].as_var()).collect();
        if let Some(k) = &class.constant {
            if vars.iter().any(|v| !v.domain().contains(k)) {
                return None;
            }
            fixed[c] = Some(k.clone());
        }
    }
    for (c, class) in g.classes.iter().enumerate() {
        if fixed[c].is_some() {
            continue;
        }
        let vars: Vec<&Var> = class.members.iter().filter_map(|&i| g.nodes[i].as_var()).collect();
        let first = vars[0].domain();
        let banned: Vec<&GroundTerm> = g.neq[c].iter().filter_map(|&o| fixed[o].as_ref()).collect();
        let others: Vec<_> = vars[1..].iter().map(|v| v.domain()).filter(|d| d != &first).collect();
        let vals: Vec<GroundTerm> = first
            .values()
            .iter()
            .filter(|v| !banned.contains(v) && others.iter().all(|d| d.contains(v)))
            .cloned()
            .collect();
        if vals.is_empty() {
            return None;
        }
        cand[c] = vals;
    }
    let unfixed: Vec<usize> = (0..n).filter(|&c| fixed[c].is_none()).collect();
    let adj = (0..n)
        .map(|c| g.neq[c].iter().copied().filter(|&o| fixed[o].is_none()).collect())
        .collect();
    Some(Residual { fixed, cand, unfixed, adj })
}

impl Residual {
    fn greedy_safe(&self, c: usize) -> bool {
        self.cand[c].len() > self.adj[c].len()
    }

    fn search(&self) -> Result<bool, ConstraintError> {
        let mut order = self.unfixed.clone();
        order.sort_by_key(|&c| self.cand[c].len());
        let mut assign: Vec<Option<&GroundTerm>> = vec![None; self.fixed.len()];
        let mut explored = 0u64;
        self.dfs(&order, 0, &mut assign, &mut explored)
    }

    fn dfs<'a>(
        &'a self,
        order: &[usize],
        k: usize,
        assign: &mut Vec<Option<&'a GroundTerm>>,
        explored: &mut u64,
    ) -> Result<bool, ConstraintError> {
        let Some(&c) = order.get(k) else { return Ok(true) };
        for v in &self.cand[c] {
            if self.adj[c].iter().any(|&o| assign[o] == Some(v)) {
                continue;
            }
            *explored += 1;
            if *explored > SEARCH_BUDGET {
                return Err(ConstraintError::SolverLimit { explored: *explored });
            }
            assign[c] = Some(v);
            if self.dfs(order, k + 1, assign, explored)? {
                assign[c] = None;
                return Ok(true);
            }
        }
        assign[c] = None;
        Ok(false)
    }

    fn satisfiable(&self) -> Result<bool, ConstraintError> {
        if self.unfixed.iter().all(|&c| self.greedy_safe(c)) {
            return Ok(true);
        }
        self.search()
    }
}

fn graph_satisfiable(g: &ConstraintGraph) -> Result<bool, ConstraintError> {
    match residual(g) {
        None => Ok(false),
        Some(r) => r.satisfiable(),
    }
}

pub(super) fn satisfiable(f: &Formula) -> Result<bool, ConstraintError> {
    match f.close() {
        Closure::Unsatisfiable => Ok(false),
        Closure::Graph(g) => graph_satisfiable(&g),
    }
}

pub(super) fn solution_set(f: &Formula, x: &Var) -> Result<SolutionSet, ConstraintError> {
    if !f.mentions(x) {
        return Ok(if satisfiable(f)? { SolutionSet::Except(Vec::new()) } else { SolutionSet::Empty });
    }
    let Closure::Graph(g) = f.close() else { return Ok(SolutionSet::Empty) };
    let Some(r) = residual(&g) else { return Ok(SolutionSet::Empty) };
    let xi = g.node_index(&Operand::Var(x.clone())).expect("x is mentioned");
    let cx = g.class_of[xi];
    if let Some(k) = &r.fixed[cx] {
        return Ok(if r.satisfiable()? { SolutionSet::Single(k.clone()) } else { SolutionSet::Empty });
    }
    // Fixing x's class to any candidate keeps every other class greedy-safe:
    // a neighbour loses at most one candidate and exactly one open neighbour.
    if r.unfixed.iter().all(|&c| c == cx || r.greedy_safe(c)) {
        let same_domain = g.classes[cx]
            .members
            .iter()
            .filter_map(|&i| g.nodes[i].as_var())
            .all(|v| v.domain() == x.domain());
        if same_domain {
            let mut ex: Vec<GroundTerm> = g.neq[cx]
                .iter()
                .filter_map(|&o| r.fixed[o].clone())
                .filter(|k| x.domain().contains(k))
                .collect();
            ex.sort();
            ex.dedup();
            return Ok(SolutionSet::Except(ex));
        }
        return Ok(SolutionSet::Explicit(r.cand[cx].clone()));
    }
    let mut out = Vec::new();
    for v in &r.cand[cx] {
        if satisfiable(&f.with(AtomicConstraint::eq(x.clone(), v.clone())))? {
            out.push(v.clone());
        }
    }
    Ok(if out.is_empty() { SolutionSet::Empty } else { SolutionSet::Explicit(out) })
}

pub(super) fn project_ground(
    f: &Formula,
    x: &Var,
    lookup: impl Fn(&Var) -> Option<GroundTerm>,
) -> Option<SolutionSet> {
    let mut eq: Option<GroundTerm> = None;
    let mut excluded: Vec<GroundTerm> = Vec::new();
    let mut conflict = false;
    for atom in f.atoms() {
        let other = if atom.lhs() == x {
            Some(atom.rhs().clone())
        } else if atom.rhs().as_var() == Some(x) {
            Some(Operand::Var(atom.lhs().clone()))
        } else {
            None
        };
        let Some(other) = other else {
            conflict |= !atom.holds(&lookup)?;
            continue;
        };
        let value = match &other {
            Operand::Var(v) if v == x => {
                conflict |= atom.polarity() == Polarity::Neq;
                continue;
            }
            Operand::Var(v) => lookup(v)?,
            Operand::Const(c) => c.clone(),
        };
        match atom.polarity() {
            Polarity::Eq => {
                if eq.as_ref().is_some_and(|e| e != &value) {
                    conflict = true;
                }
                eq = Some(value);
            }
            Polarity::Neq => excluded.push(value),
        }
    }
    if conflict {
        return Some(SolutionSet::Empty);
    }
    if let Some(v) = eq {
        let ok = x.domain().contains(&v) && !excluded.contains(&v);
        return Some(if ok { SolutionSet::Single(v) } else { SolutionSet::Empty });
    }
    excluded.retain(|v| x.domain().contains(v));
    excluded.sort();
    excluded.dedup();
    if excluded.len() == x.domain().len() {
        return Some(SolutionSet::Empty);
    }
    Some(SolutionSet::Except(excluded))
}
