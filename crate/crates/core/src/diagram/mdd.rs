use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, Mutex, Weak};

use super::{BoolOp, Osdd};
use crate::constraint::{Var, VarKey};
use crate::error::DiagramError;
use crate::term::GroundTerm;

pub enum MddNode {
    Leaf(bool),
    /// One child per domain value, in domain order.
    Internal { var: Var, children: Vec<(GroundTerm, Mdd)> },
}

/// A ground decision diagram, hash-consed like [`Osdd`].
#[derive(Clone)]
pub struct Mdd(Arc<MddNode>);

type Key = (VarKey, Vec<(GroundTerm, usize)>);

static TABLE: LazyLock<Mutex<HashMap<Key, Weak<MddNode>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
static LEAVES: LazyLock<[Mdd; 2]> =
    LazyLock::new(|| [Mdd(Arc::new(MddNode::Leaf(false))), Mdd(Arc::new(MddNode::Leaf(true)))]);

impl Mdd {
    pub fn leaf(v: bool) -> Self {
        LEAVES[usize::from(v)].clone()
    }

    pub fn node(var: Var, children: Vec<(GroundTerm, Mdd)>) -> Self {
        let key: Key = (var.key().clone(), children.iter().map(|(v, c)| (v.clone(), c.id())).collect());
        let mut tab = TABLE.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(n) = tab.get(&key).and_then(Weak::upgrade) {
            return Mdd(n);
        }
        let n = Arc::new(MddNode::Internal { var, children });
        tab.insert(key, Arc::downgrade(&n));
        if tab.len() % 4096 == 0 {
            tab.retain(|_, w| w.strong_count() > 0);
        }
        Mdd(n)
    }

    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn get(&self) -> &MddNode {
        &self.0
    }

    pub fn leaf_value(&self) -> Option<bool> {
        match *self.0 {
            MddNode::Leaf(v) => Some(v),
            MddNode::Internal { .. } => None,
        }
    }

    pub fn var(&self) -> Option<&Var> {
        match &*self.0 {
            MddNode::Internal { var, .. } => Some(var),
            MddNode::Leaf(_) => None,
        }
    }

    pub fn children(&self) -> &[(GroundTerm, Mdd)] {
        match &*self.0 {
            MddNode::Internal { children, .. } => children,
            MddNode::Leaf(_) => &[],
        }
    }

    /// Follows the path selected by `world`. `None` if a node's variable
    /// is unassigned.
    pub fn eval(&self, world: impl Fn(&Var) -> Option<GroundTerm>) -> Option<bool> {
        let mut n = self.clone();
        loop {
            if let Some(v) = n.leaf_value() {
                return Some(v);
            }
            let val = world(n.var().unwrap())?;
            let next = n.children().iter().find(|(v, _)| *v == val)?.1.clone();
            n = next;
        }
    }

    pub fn oplus(&self, other: &Mdd, op: BoolOp) -> Mdd {
        combine(self, other, op, &mut HashMap::new())
    }
}

fn combine(a: &Mdd, b: &Mdd, op: BoolOp, memo: &mut HashMap<(usize, usize), Mdd>) -> Mdd {
    if let Some(r) = op.shortcut((a.leaf_value(), a), (b.leaf_value(), b)) {
        return r;
    }
    if a == b {
        return a.clone();
    }
    let key = (a.id().min(b.id()), a.id().max(b.id()));
    if let Some(r) = memo.get(&key) {
        return r.clone();
    }
    let (va, vb) = (a.var().unwrap(), b.var().unwrap());
    let r = if va == vb {
        let children = a
            .children()
            .iter()
            .zip(b.children())
            .map(|((v, ca), (_, cb))| (v.clone(), combine(ca, cb, op, memo)))
            .collect();
        Mdd::node(va.clone(), children)
    } else {
        let (lo, hi) = if va < vb { (a, b) } else { (b, a) };
        let children = lo.children().iter().map(|(v, c)| (v.clone(), combine(c, hi, op, memo))).collect();
        Mdd::node(lo.var().unwrap().clone(), children)
    };
    memo.insert(key, r.clone());
    r
}

type Sigma = BTreeMap<Var, GroundTerm>;

pub(crate) fn ground(d: &Osdd) -> Result<Mdd, DiagramError> {
    let free = d.free_vars();
    if !free.is_empty() {
        let names: Vec<String> = free.iter().map(|v| v.to_string()).collect();
        return Err(DiagramError::FreeVariables(names.join(", ")));
    }
    go(d, &Sigma::new(), &mut HashMap::new())
}

fn go(n: &Osdd, sigma: &Sigma, memo: &mut HashMap<(usize, Vec<(Var, GroundTerm)>), Mdd>) -> Result<Mdd, DiagramError> {
    if let Some(v) = n.leaf_value() {
        return Ok(Mdd::leaf(v));
    }
    let free = n.free_ref().unwrap();
    let relevant: Vec<(Var, GroundTerm)> =
        sigma.iter().filter(|(v, _)| free.contains(v)).map(|(v, t)| (v.clone(), t.clone())).collect();
    let key = (n.id(), relevant);
    if let Some(r) = memo.get(&key) {
        return Ok(r.clone());
    }
    let y = n.var().unwrap();
    let mut children = Vec::with_capacity(y.domain().len());
    for alpha in y.domain().values() {
        let mut next = sigma.clone();
        next.insert(y.clone(), alpha.clone());
        let mut chosen = None;
        for e in n.edges() {
            match e.label.holds(|v| next.get(v).cloned()) {
                Some(true) => {
                    chosen = Some(&e.child);
                    break;
                }
                Some(false) => {}
                None => return Err(DiagramError::FreeVariables(e.label.to_string())),
            }
        }
        let child = chosen.ok_or_else(|| DiagramError::Incomplete {
            node: y.switch_instance().unwrap().clone(),
            value: alpha.to_string(),
        })?;
        children.push((alpha.clone(), go(child, &next, memo)?));
    }
    let r = Mdd::node(y.clone(), children);
    memo.insert(key, r.clone());
    Ok(r)
}

impl PartialEq for Mdd {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Mdd {}

impl Hash for Mdd {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state)
    }
}

impl fmt::Debug for Mdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            MddNode::Leaf(v) => write!(f, "{}", u8::from(*v)),
            MddNode::Internal { var, children } => {
                write!(f, "{}[", var.switch_instance().map(|s| s.to_string()).unwrap_or_default())?;
                for (i, (v, c)) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{v}: {c:?}")?;
                }
                f.write_str("]")
            }
        }
    }
}
