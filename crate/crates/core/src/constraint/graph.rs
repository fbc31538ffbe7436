use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use super::{AtomicConstraint, Formula, Operand, Polarity, VarKey};
use crate::term::GroundTerm;

/// Result of closing a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    Unsatisfiable,
    Graph(ConstraintGraph),
}

impl Closure {
    pub fn graph(&self) -> Option<&ConstraintGraph> {
        match self {
            Closure::Graph(g) => Some(g),
            Closure::Unsatisfiable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Class {
    pub members: Vec<usize>,
    pub constant: Option<GroundTerm>,
}

/// The entailment-closed graph of a satisfiable formula.
///
/// Nodes are kept sorted under the global order. Eq-classes are stored
/// once; neq relations are stored between classes, including the implicit
/// ones between classes bound to distinct constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraph {
    pub(crate) nodes: Vec<Operand>,
    pub(crate) class_of: Vec<usize>,
    pub(crate) classes: Vec<Class>,
    pub(crate) neq: Vec<BTreeSet<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphEdge {
    pub a: Operand,
    pub b: Operand,
    pub label: Polarity,
}

pub(crate) fn close(f: &Formula) -> Closure {
    let set: BTreeSet<Operand> = f
        .atoms()
        .flat_map(|a| [Operand::Var(a.lhs().clone()), a.rhs().clone()])
        .collect();
    let nodes: Vec<Operand> = set.into_iter().collect();
    let idx = |o: &Operand| nodes.binary_search(o).expect("node collected above");

    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let lhs_idx = |a: &AtomicConstraint| idx(&Operand::Var(a.lhs().clone()));
    for a in f.atoms().filter(|a| a.polarity() == Polarity::Eq) {
        let (i, j) = (lhs_idx(a), idx(a.rhs()));
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }

    let mut class_of = vec![usize::MAX; nodes.len()];
    let mut classes: Vec<Class> = Vec::new();
    let mut root_class = vec![usize::MAX; nodes.len()];
    for i in 0..nodes.len() {
        let r = find(&mut parent, i);
        if root_class[r] == usize::MAX {
            root_class[r] = classes.len();
            classes.push(Class { members: Vec::new(), constant: None });
        }
        let c = root_class[r];
        class_of[i] = c;
        classes[c].members.push(i);
        if let Operand::Const(t) = &nodes[i] {
            if classes[c].constant.is_some() {
                return Closure::Unsatisfiable;
            }
            classes[c].constant = Some(t.clone());
        }
    }

    let mut neq = vec![BTreeSet::new(); classes.len()];
    for a in f.atoms().filter(|a| a.polarity() == Polarity::Neq) {
        let (ca, cb) = (class_of[lhs_idx(a)], class_of[idx(a.rhs())]);
        if ca == cb {
            return Closure::Unsatisfiable;
        }
        neq[ca].insert(cb);
        neq[cb].insert(ca);
    }
    let constant_classes: Vec<usize> = (0..classes.len()).filter(|&c| classes[c].constant.is_some()).collect();
    for (k, &ca) in constant_classes.iter().enumerate() {
        for &cb in &constant_classes[k + 1..] {
            neq[ca].insert(cb);
            neq[cb].insert(ca);
        }
    }
    Closure::Graph(ConstraintGraph { nodes, class_of, classes, neq })
}

impl ConstraintGraph {
    pub fn nodes(&self) -> &[Operand] {
        &self.nodes
    }

    pub(crate) fn node_index(&self, o: &Operand) -> Option<usize> {
        self.nodes.binary_search(o).ok()
    }

    /// The entailed relation between two nodes, if any. Two constants are
    /// never related by an edge.
    pub fn relation(&self, a: &Operand, b: &Operand) -> Option<Polarity> {
        if !a.is_var() && !b.is_var() {
            return None;
        }
        if a == b {
            return Some(Polarity::Eq);
        }
        let (i, j) = (self.node_index(a)?, self.node_index(b)?);
        self.relation_idx(i, j)
    }

    pub(crate) fn relation_idx(&self, i: usize, j: usize) -> Option<Polarity> {
        let (ci, cj) = (self.class_of[i], self.class_of[j]);
        if ci == cj {
            Some(Polarity::Eq)
        } else if self.neq[ci].contains(&cj) {
            Some(Polarity::Neq)
        } else {
            None
        }
    }

    /// All edges, sorted by (source, destination, label).
    pub fn edges(&self) -> Vec<GraphEdge> {
        let mut out = Vec::new();
        for i in 0..self.nodes.len() {
            for j in i + 1..self.nodes.len() {
                if !self.nodes[i].is_var() && !self.nodes[j].is_var() {
                    continue;
                }
                if let Some(label) = self.relation_idx(i, j) {
                    out.push(GraphEdge { a: self.nodes[i].clone(), b: self.nodes[j].clone(), label });
                }
            }
        }
        out
    }

    /// The closed graph read back as a formula.
    pub fn to_formula(&self) -> Formula {
        self.edges()
            .into_iter()
            .filter_map(|e| AtomicConstraint::new(e.a, e.b, e.label))
            .collect()
    }
}

/// Canonical serialization of a formula's closed graph. Unsatisfiable
/// formulas share one key that orders after every satisfiable one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalKey {
    edges: Vec<(Operand, Operand, Polarity)>,
    unsat: bool,
}

impl CanonicalKey {
    pub fn of(f: &Formula) -> Self {
        match close(f) {
            Closure::Unsatisfiable => CanonicalKey { edges: Vec::new(), unsat: true },
            Closure::Graph(g) => CanonicalKey {
                edges: g.edges().into_iter().map(|e| (e.a, e.b, e.label)).collect(),
                unsat: false,
            },
        }
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.unsat
    }

    pub fn triples(&self) -> &[(Operand, Operand, Polarity)] {
        &self.edges
    }

    /// Byte encoding whose lexicographic order matches the key order.
    pub fn as_bytes(&self) -> Vec<u8> {
        if self.unsat {
            return vec![0xFF];
        }
        let mut out = Vec::new();
        for (a, b, l) in &self.edges {
            encode_operand(a, &mut out);
            encode_operand(b, &mut out);
            out.push(match l {
                Polarity::Eq => 0,
                Polarity::Neq => 1,
            });
        }
        out
    }
}

impl Ord for CanonicalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.unsat.cmp(&other.unsat).then_with(|| self.edges.cmp(&other.edges))
    }
}

impl PartialOrd for CanonicalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unsat {
            return f.write_str("false");
        }
        f.write_str("[")?;
        for (i, (a, b, l)) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let op = if *l == Polarity::Eq { "=" } else { "!=" };
            write!(f, "({a} {op} {b})")?;
        }
        f.write_str("]")
    }
}

fn encode_str(s: &str, out: &mut Vec<u8>) {
    for &b in s.as_bytes() {
        out.push(b);
        if b == 0 {
            out.push(0xFF);
        }
    }
    out.extend_from_slice(&[0, 0]);
}

fn encode_ground(t: &GroundTerm, out: &mut Vec<u8>) {
    match t {
        GroundTerm::Int(v) => {
            out.push(1);
            out.extend_from_slice(&((*v as u64) ^ (1 << 63)).to_be_bytes());
        }
        GroundTerm::Atom(a) => {
            out.push(2);
            encode_str(a, out);
        }
    }
}

fn encode_operand(o: &Operand, out: &mut Vec<u8>) {
    match o {
        Operand::Const(t) => encode_ground(t, out),
        Operand::Var(v) => {
            out.push(3);
            match v.key() {
                VarKey::Instance(si) => {
                    out.push(1);
                    encode_ground(&si.instance, out);
                    encode_str(&si.switch, out);
                }
                VarKey::Named(n) => {
                    out.push(2);
                    encode_str(n, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::*;
    use super::*;

    #[test]
    fn transitive_eq_closure() {
        let d = dom(3);
        let (x, y, z) = (var("X", &d), var("Y", &d), var("Z", &d));
        let f = Formula::from_atoms([AtomicConstraint::eq(x.clone(), y.clone()), AtomicConstraint::eq(y.clone(), z.clone())]);
        let g = f.close().graph().cloned().unwrap();
        assert_eq!(g.edges().len(), 3);
        assert!(g.edges().iter().all(|e| e.label == Polarity::Eq));
        assert_eq!(g.relation(&x.into(), &z.into()), Some(Polarity::Eq));
    }

    #[test]
    fn neq_propagates_through_eq_class() {
        let d = dom(3);
        let (x, y, z) = (var("X", &d), var("Y", &d), var("Z", &d));
        let f = Formula::from_atoms([AtomicConstraint::eq(x.clone(), y.clone()), AtomicConstraint::neq(y, z.clone())]);
        let g = f.close().graph().cloned().unwrap();
        assert_eq!(g.relation(&x.into(), &z.into()), Some(Polarity::Neq));
    }

    #[test]
    fn distinct_constants_in_one_class_are_unsat() {
        let d = dom(3);
        let x = var("X", &d);
        let f = Formula::from_atoms([AtomicConstraint::eq(x.clone(), c("a")), AtomicConstraint::eq(x, c("b"))]);
        assert_eq!(f.close(), Closure::Unsatisfiable);
    }

    #[test]
    fn var_bound_to_constant_is_neq_other_constants() {
        let d = dom(3);
        let (x, y) = (var("X", &d), var("Y", &d));
        let f = Formula::from_atoms([AtomicConstraint::eq(x.clone(), c("a")), AtomicConstraint::eq(y, c("b"))]);
        let g = f.close().graph().cloned().unwrap();
        assert_eq!(g.relation(&x.into(), &c("b")), Some(Polarity::Neq));
        assert_eq!(g.relation(&c("a"), &c("b")), None);
    }

    #[test]
    fn key_examples() {
        let d = dom(3);
        let (x1, x2) = (var("X1", &d), var("X2", &d));
        assert_eq!(
            Formula::single(AtomicConstraint::eq(x1.clone(), x2.clone())).canonical_key(),
            Formula::single(AtomicConstraint::eq(x2.clone(), x1.clone())).canonical_key()
        );
        assert!(Formula::new().canonical_key().as_bytes().is_empty());
        let keq = Formula::single(AtomicConstraint::eq(x1.clone(), x2.clone())).canonical_key();
        let kneq = Formula::single(AtomicConstraint::neq(x1, x2)).canonical_key();
        assert!(keq < kneq);
        assert!(keq.as_bytes() < kneq.as_bytes());
    }

    #[test]
    fn bytes_order_matches_key_order_for_mixed_operands() {
        let d = dom(3);
        let vars = [var("A", &d), var("B", &d), var("AB", &d)];
        let consts = [c("a"), c("ab"), Operand::Const(GroundTerm::int(-5)), Operand::Const(GroundTerm::int(7))];
        let mut keys = Vec::new();
        for v in &vars {
            for o in consts.iter().cloned().chain(vars.iter().cloned().map(Operand::Var)) {
                for p in [Polarity::Eq, Polarity::Neq] {
                    if let Some(a) = AtomicConstraint::new(Operand::Var(v.clone()), o.clone(), p) {
                        keys.push(Formula::single(a).canonical_key());
                    }
                }
            }
        }
        for a in &keys {
            for b in &keys {
                assert_eq!(a.cmp(b), a.as_bytes().cmp(&b.as_bytes()), "{a} vs {b}");
            }
        }
    }
}
