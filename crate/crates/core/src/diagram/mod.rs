//! Ordered symbolic derivation diagrams.
//!
//! Nodes are hash-consed: every diagram is built through [`Osdd::node`],
//! which sorts edges by the canonical key of their labels, merges
//! complementary sibling edges that share a child and interns the result.
//! Structurally equal diagrams are therefore the same allocation, and
//! equality is pointer equality.

mod dot;
mod mdd;
mod ops;
mod proper;
mod text;
mod validate;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, Mutex, Weak};

use crate::constraint::{CanonicalKey, Formula, Var, VarKey};
use crate::error::{ConstraintError, DiagramError};
use crate::term::SwitchInstance;

pub use mdd::{Mdd, MddNode};
pub use ops::BoolOp;
pub use text::parse_osdd;
pub use validate::{Condition, Violation};

#[derive(Clone, Debug)]
pub struct Edge {
    pub label: Formula,
    pub key: CanonicalKey,
    pub child: Osdd,
}

pub enum Node {
    Leaf(bool),
    Internal {
        var: Var,
        edges: Vec<Edge>,
        /// Label variables of the subtree not bound inside it.
        free: BTreeSet<Var>,
    },
}

/// A shared, interned diagram.
#[derive(Clone)]
pub struct Osdd(Arc<Node>);

type InternKey = (VarKey, Vec<(CanonicalKey, usize)>);

struct Interner {
    table: HashMap<InternKey, Weak<Node>>,
    purge_at: usize,
}

static INTERNER: LazyLock<Mutex<Interner>> =
    LazyLock::new(|| Mutex::new(Interner { table: HashMap::new(), purge_at: 1 << 12 }));
static ZERO: LazyLock<Osdd> = LazyLock::new(|| Osdd(Arc::new(Node::Leaf(false))));
static ONE: LazyLock<Osdd> = LazyLock::new(|| Osdd(Arc::new(Node::Leaf(true))));

impl Osdd {
    pub fn leaf(v: bool) -> Self {
        if v {
            ONE.clone()
        } else {
            ZERO.clone()
        }
    }

    pub fn zero() -> Self {
        Self::leaf(false)
    }

    pub fn one() -> Self {
        Self::leaf(true)
    }

    /// Builds an internal node for the switch instance of `var`.
    ///
    /// Unsatisfiable labels are dropped. A node left without edges is the
    /// 0-leaf. Panics if `var` is not a switch-instance variable.
    pub fn node(var: Var, edges: Vec<(Formula, Osdd)>) -> Result<Self, ConstraintError> {
        assert!(var.switch_instance().is_some(), "node variable must belong to a switch instance");
        let mut out: Vec<Edge> = Vec::with_capacity(edges.len());
        for (label, child) in edges {
            if !label.satisfiable()? {
                continue;
            }
            let key = label.canonical_key();
            out.push(Edge { label, key, child });
        }
        merge_complementary(&var, &mut out);
        if out.is_empty() {
            return Ok(Self::zero());
        }
        out.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.child.id().cmp(&b.child.id())));
        Ok(intern(var, out))
    }

    /// Node with a single unconstrained edge.
    pub fn unconstrained(var: Var, child: Osdd) -> Self {
        Self::node(var, vec![(Formula::new(), child)]).expect("empty label is satisfiable")
    }

    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn get(&self) -> &Node {
        &self.0
    }

    pub fn is_leaf(&self) -> bool {
        matches!(*self.0, Node::Leaf(_))
    }

    pub fn leaf_value(&self) -> Option<bool> {
        match *self.0 {
            Node::Leaf(v) => Some(v),
            Node::Internal { .. } => None,
        }
    }

    pub fn var(&self) -> Option<&Var> {
        match &*self.0 {
            Node::Internal { var, .. } => Some(var),
            Node::Leaf(_) => None,
        }
    }

    pub fn switch_instance(&self) -> Option<&SwitchInstance> {
        self.var().and_then(|v| v.switch_instance())
    }

    pub fn edges(&self) -> &[Edge] {
        match &*self.0 {
            Node::Internal { edges, .. } => edges,
            Node::Leaf(_) => &[],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match &*self.0 {
            Node::Internal { free, .. } => free.clone(),
            Node::Leaf(_) => BTreeSet::new(),
        }
    }

    pub(crate) fn free_ref(&self) -> Option<&BTreeSet<Var>> {
        match &*self.0 {
            Node::Internal { free, .. } => Some(free),
            Node::Leaf(_) => None,
        }
    }

    /// Output variables of all nodes.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(|n| {
            if let Some(v) = n.var() {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Visits every distinct node once, parents before children.
    pub fn visit(&self, mut f: impl FnMut(&Osdd)) {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(n) = stack.pop() {
            if !seen.insert(n.id()) {
                continue;
            }
            f(&n);
            for e in n.edges().iter().rev() {
                stack.push(e.child.clone());
            }
        }
    }

    /// Number of distinct nodes, leaves included.
    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(|_| n += 1);
        n
    }

    /// Number of distinct internal nodes.
    pub fn internal_count(&self) -> usize {
        let mut n = 0;
        self.visit(|d| n += usize::from(!d.is_leaf()));
        n
    }

    /// Rebuilds the diagram through the node constructor.
    pub fn canonicalize(&self) -> Result<Osdd, ConstraintError> {
        fn go(d: &Osdd, memo: &mut HashMap<usize, Osdd>) -> Result<Osdd, ConstraintError> {
            if d.is_leaf() {
                return Ok(d.clone());
            }
            if let Some(r) = memo.get(&d.id()) {
                return Ok(r.clone());
            }
            let mut edges = Vec::new();
            for e in d.edges() {
                edges.push((e.label.clone(), go(&e.child, memo)?));
            }
            let r = Osdd::node(d.var().unwrap().clone(), edges)?;
            memo.insert(d.id(), r.clone());
            Ok(r)
        }
        go(self, &mut HashMap::new())
    }

    pub fn oplus(&self, other: &Osdd, op: BoolOp) -> Result<Osdd, DiagramError> {
        ops::oplus(self, other, op)
    }

    pub fn and(&self, other: &Osdd) -> Result<Osdd, DiagramError> {
        self.oplus(other, BoolOp::And)
    }

    pub fn or(&self, other: &Osdd) -> Result<Osdd, DiagramError> {
        self.oplus(other, BoolOp::Or)
    }

    pub fn apply_constraint(&self, atom: &crate::constraint::AtomicConstraint) -> Result<Osdd, DiagramError> {
        ops::apply_formula(self, &Formula::single(atom.clone()))
    }

    /// Applies a conjunction at the shallowest node binding all its
    /// variables.
    pub fn apply_formula(&self, f: &Formula) -> Result<Osdd, DiagramError> {
        ops::apply_formula(self, f)
    }

    pub fn to_proper(&self) -> Result<Osdd, DiagramError> {
        proper::to_proper(self)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate::validate(self)
    }

    pub fn ground(&self) -> Result<Mdd, DiagramError> {
        mdd::ground(self)
    }

    pub fn to_dot(&self) -> String {
        dot::to_dot(self)
    }
}

/// Sibling edges `g + {b} -> c` and `g + {!b} -> c` become `g -> c`, as
/// long as `g` is empty or still mentions the node variable.
fn merge_complementary(var: &Var, edges: &mut Vec<Edge>) {
    if edges.len() < 2 {
        return;
    }
    edges.sort_by(|a, b| a.key.cmp(&b.key));
    'restart: loop {
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                if edges[i].child.id() != edges[j].child.id() || edges[i].label.len() != edges[j].label.len() {
                    continue;
                }
                let (li, lj) = (&edges[i].label, &edges[j].label);
                let only_i: Vec<_> = li.atoms().filter(|a| !lj.contains(a)).collect();
                if only_i.len() != 1 || !lj.contains(&only_i[0].negated()) {
                    continue;
                }
                let mut rest = li.clone();
                rest.remove(only_i[0]);
                if !rest.is_empty() && !rest.mentions(var) {
                    continue;
                }
                let key = rest.canonical_key();
                let child = edges[i].child.clone();
                edges.remove(j);
                edges[i] = Edge { label: rest, key, child };
                edges.sort_by(|a, b| a.key.cmp(&b.key));
                continue 'restart;
            }
        }
        return;
    }
}

fn intern(var: Var, edges: Vec<Edge>) -> Osdd {
    let key: InternKey = (var.key().clone(), edges.iter().map(|e| (e.key.clone(), e.child.id())).collect());
    let mut tab = INTERNER.lock().unwrap_or_else(|p| p.into_inner());
    if let Some(n) = tab.table.get(&key).and_then(Weak::upgrade) {
        return Osdd(n);
    }
    let mut free = BTreeSet::new();
    for e in &edges {
        free.extend(e.label.vars());
        if let Some(f) = e.child.free_ref() {
            free.extend(f.iter().cloned());
        }
    }
    free.remove(&var);
    let node = Arc::new(Node::Internal { var, edges, free });
    tab.table.insert(key, Arc::downgrade(&node));
    if tab.table.len() >= tab.purge_at {
        tab.table.retain(|_, w| w.strong_count() > 0);
        tab.purge_at = (tab.table.len() * 2).max(1 << 12);
    }
    Osdd(node)
}

impl PartialEq for Osdd {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Osdd {}

impl Hash for Osdd {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state)
    }
}

impl fmt::Debug for Osdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Osdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_osdd(self, f)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::constraint::parse_formula;
    use crate::term::{GroundTerm, TypeDomain};

    pub fn dom(values: &[&str]) -> Arc<TypeDomain> {
        Arc::new(TypeDomain::new("t", values.iter().map(|v| GroundTerm::atom(v)).collect()).unwrap())
    }

    pub fn ivar(switch: &str, k: i64, name: &str, d: &Arc<TypeDomain>) -> Var {
        Var::instance_named(SwitchInstance::new(switch, k), name, d.clone())
    }

    pub fn f(text: &str, vars: &[&Var]) -> Formula {
        parse_formula(text, |n| {
            vars.iter()
                .find(|v| v.name() == n)
                .map(|v| (*v).clone())
                .ok_or_else(|| ConstraintError::Syntax(n.to_string()))
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn interning_shares_equal_subtrees() {
        let d = dom(&["a", "b"]);
        let x1 = ivar("s", 1, "X1", &d);
        let renamed = ivar("s", 1, "Y", &d);
        let a = Osdd::unconstrained(x1, Osdd::one());
        let b = Osdd::unconstrained(renamed, Osdd::one());
        assert_eq!(a, b);
        assert_eq!(a.canonicalize().unwrap(), a);
    }

    #[test]
    fn edges_are_sorted_by_key() {
        let d = dom(&["a", "b"]);
        let (x1, x2) = (ivar("flip", 1, "X1", &d), ivar("flip", 2, "X2", &d));
        let n = Osdd::node(
            x2.clone(),
            vec![(f("X1 != X2", &[&x1, &x2]), Osdd::zero()), (f("X1 = X2", &[&x1, &x2]), Osdd::one())],
        )
        .unwrap();
        assert_eq!(n.edges()[0].child, Osdd::one());
        assert!(n.edges()[0].key < n.edges()[1].key);
    }

    #[test]
    fn complementary_edges_merge() {
        let d = dom(&["a", "b", "c"]);
        let (x1, x2, x3) = (ivar("b", 1, "X1", &d), ivar("b", 2, "X2", &d), ivar("b", 3, "X3", &d));
        let vs = [&x1, &x2, &x3];
        let n = Osdd::node(
            x3.clone(),
            vec![
                (f("X3 = X1, X3 = X2", &vs), Osdd::one()),
                (f("X3 = X1, X3 != X2", &vs), Osdd::one()),
                (f("X3 != X1, X3 = X2", &vs), Osdd::one()),
                (f("X3 != X1, X3 != X2", &vs), Osdd::zero()),
            ],
        )
        .unwrap();
        let labels: Vec<String> = n.edges().iter().map(|e| e.label.to_string()).collect();
        assert_eq!(labels, ["X3 != X1, X3 = X2", "X3 = X1", "X3 != X1, X3 != X2"]);
    }

    #[test]
    fn free_and_bound_vars() {
        let d = dom(&["a", "b"]);
        let x = ivar("s", 1, "X", &d);
        let z = Var::named("Z", d.clone());
        let n = Osdd::node(x.clone(), vec![(f("X = Z", &[&x, &z]), Osdd::one()), (f("X != Z", &[&x, &z]), Osdd::zero())])
            .unwrap();
        assert_eq!(n.free_vars(), [z].into());
        assert_eq!(n.bound_vars(), [x].into());
        assert!(Osdd::one().free_vars().is_empty());
    }
}
