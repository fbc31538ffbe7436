use std::collections::BTreeSet;

use super::graph::{Closure, ConstraintGraph};
use super::{Formula, Operand, Polarity, Var};
use crate::term::GroundTerm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    Count(usize),
    NotMeasurable,
}

impl ConstraintGraph {
    /// Every variable that is not eq-connected to another node has
    /// neq-neighbour classes that are pairwise neq-related.
    pub fn is_saturated(&self) -> bool {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_var()).all(|i| {
            let c = self.class_of[i];
            if self.classes[c].members.len() > 1 {
                return true;
            }
            let nbrs: Vec<usize> = self.neq[c].iter().copied().collect();
            nbrs.iter()
                .enumerate()
                .all(|(k, a)| nbrs[k + 1..].iter().all(|b| self.neq[*a].contains(b)))
        })
    }

    pub fn measure(&self, x: &Var) -> Measure {
        if !self.is_saturated() {
            return Measure::NotMeasurable;
        }
        let Some(i) = self.node_index(&Operand::Var(x.clone())) else {
            return Measure::Count(x.domain().len());
        };
        let c = self.class_of[i];
        if self.classes[c].members.len() > 1 {
            return Measure::Count(1);
        }
        let blocking = self.neq[c]
            .iter()
            .filter(|&&o| match &self.classes[o].constant {
                Some(k) => x.domain().contains(k),
                None => true,
            })
            .count();
        Measure::Count(x.domain().len().saturating_sub(blocking))
    }
}

/// Outcome of conjoining a label to a closed, saturated path formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    Unsatisfiable,
    Measure(Measure),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Cls {
    Old(usize),
    Fresh(GroundTerm),
}

impl ConstraintGraph {
    fn cls_of(&self, o: &Operand) -> Option<Cls> {
        match (self.node_index(o), o) {
            (Some(i), _) => Some(Cls::Old(self.class_of[i])),
            (None, Operand::Const(g)) => Some(Cls::Fresh(g.clone())),
            (None, Operand::Var(_)) => None,
        }
    }

    fn is_const(&self, c: &Cls) -> bool {
        match c {
            Cls::Old(i) => self.classes[*i].constant.is_some(),
            Cls::Fresh(_) => true,
        }
    }

    fn is_lone_var(&self, c: &Cls) -> bool {
        matches!(c, Cls::Old(i) if self.classes[*i].members.len() == 1 && self.classes[*i].constant.is_none())
    }

    fn related(&self, a: &Cls, b: &Cls) -> bool {
        match (a, b) {
            (Cls::Old(i), Cls::Old(j)) => self.neq[*i].contains(j),
            _ => false,
        }
    }

    /// The measure of `y` after conjoining `gamma`, where this graph is the
    /// closure of a saturated formula not mentioning `y` and every atom of
    /// `gamma` mentions `y`. `None` when `gamma` falls outside that shape.
    pub fn extend(&self, y: &Var, gamma: &Formula) -> Option<Extension> {
        let yo = Operand::Var(y.clone());
        if self.node_index(&yo).is_some() {
            return None;
        }
        let mut eqs = BTreeSet::new();
        let mut neqs = BTreeSet::new();
        for a in gamma.atoms() {
            let other = if a.lhs() == y {
                a.rhs().clone()
            } else if a.rhs() == &yo {
                Operand::Var(a.lhs().clone())
            } else {
                return None;
            };
            let c = self.cls_of(&other)?;
            match a.polarity() {
                Polarity::Eq => eqs.insert(c),
                Polarity::Neq => neqs.insert(c),
            };
        }
        if eqs.len() > 1 {
            return None;
        }
        if let Some(x) = eqs.into_iter().next() {
            if neqs.contains(&x) {
                return Some(Extension::Unsatisfiable);
            }
            let x_nbrs = |z: &Cls| self.related(&x, z) || neqs.contains(z) || (self.is_const(&x) && self.is_const(z));
            for d in neqs.iter().filter(|d| self.is_lone_var(d) && !self.related(d, &x)) {
                let Cls::Old(di) = d else { continue };
                if !self.neq[*di].iter().all(|&z| x_nbrs(&Cls::Old(z))) {
                    return Some(Extension::Measure(Measure::NotMeasurable));
                }
            }
            return Some(Extension::Measure(Measure::Count(1)));
        }
        let nbrs: Vec<Cls> = neqs.into_iter().collect();
        for (k, a) in nbrs.iter().enumerate() {
            for b in &nbrs[k + 1..] {
                if !(self.related(a, b) || (self.is_const(a) && self.is_const(b))) {
                    return Some(Extension::Measure(Measure::NotMeasurable));
                }
            }
            if let Cls::Old(ai) = a {
                if self.is_lone_var(a) && !self.neq[*ai].iter().all(|&z| nbrs.contains(&Cls::Old(z))) {
                    return Some(Extension::Measure(Measure::NotMeasurable));
                }
            }
        }
        let blocking = nbrs
            .iter()
            .filter(|c| match c {
                Cls::Old(i) => self.classes[*i].constant.as_ref().is_none_or(|k| y.domain().contains(k)),
                Cls::Fresh(k) => y.domain().contains(k),
            })
            .count();
        Some(Extension::Measure(Measure::Count(y.domain().len().saturating_sub(blocking))))
    }
}

/// [`ConstraintGraph::extend`] with a fallback to closing `phi` and
/// `gamma` together.
pub fn extend_measure(graph: &ConstraintGraph, phi: &Formula, y: &Var, gamma: &Formula) -> Extension {
    if let Some(e) = graph.extend(y, gamma) {
        return e;
    }
    match phi.and(gamma).close() {
        Closure::Unsatisfiable => Extension::Unsatisfiable,
        Closure::Graph(g) => Extension::Measure(g.measure(y)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::*;
    use crate::term::{GroundTerm, TypeDomain};
    use std::sync::Arc;

    #[test]
    fn saturation_examples() {
        let d = dom(4);
        let (x, y, z) = (var("X", &d), var("Y", &d), var("Z", &d));
        assert!(Formula::single(AtomicConstraint::neq(x.clone(), y.clone())).is_saturated());
        let open = Formula::from_atoms([AtomicConstraint::neq(x.clone(), y.clone()), AtomicConstraint::neq(x.clone(), z.clone())]);
        assert!(!open.is_saturated());
        assert_eq!(open.measure(&x), Measure::NotMeasurable);
        let tri = open.with(AtomicConstraint::neq(y, z));
        assert!(tri.is_saturated());
    }

    #[test]
    fn measure_examples() {
        let days = Arc::new(TypeDomain::range("days", 1, 365).unwrap());
        let (x1, x2, x3) = (var("X1", &days), var("X2", &days), var("X3", &days));
        let f = Formula::from_atoms([AtomicConstraint::neq(x1.clone(), x3.clone()), AtomicConstraint::eq(x2.clone(), x3.clone())]);
        assert_eq!(f.measure(&x3), Measure::Count(1));
        let f = Formula::from_atoms([
            AtomicConstraint::neq(x1.clone(), x3.clone()),
            AtomicConstraint::neq(x2.clone(), x3.clone()),
            AtomicConstraint::neq(x1, x2),
        ]);
        assert_eq!(f.measure(&x3), Measure::Count(363));

        let d = dom(4);
        let x = var("X", &d);
        let f = Formula::from_atoms([AtomicConstraint::neq(x.clone(), c("a")), AtomicConstraint::neq(x.clone(), c("b"))]);
        assert_eq!(f.measure(&x), Measure::Count(2));
        let f = Formula::single(AtomicConstraint::neq(x.clone(), GroundTerm::int(99)));
        assert_eq!(f.measure(&x), Measure::Count(4));
    }
}
