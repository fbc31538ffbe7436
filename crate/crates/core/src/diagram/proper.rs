use std::collections::{HashMap, VecDeque};

use super::Osdd;
use crate::constraint::{AtomicConstraint, CanonicalKey, Closure, Formula, Var};
use crate::error::{ConstraintError, DiagramError};

/// An atom over constants and `scope` variables entailed by `label` but not
/// by the path formula `phi`.
pub(crate) fn implicit_atom(phi: &Formula, label: &Formula, scope: &[Var]) -> Option<AtomicConstraint> {
    let Closure::Graph(g) = label.close() else { return None };
    let in_scope = |o: &crate::constraint::Operand| o.as_var().is_none_or(|v| scope.binary_search(v).is_ok());
    let edges = g.edges();
    let candidates: Vec<_> = edges.into_iter().filter(|e| in_scope(&e.a) && in_scope(&e.b)).collect();
    if candidates.is_empty() {
        return None;
    }
    let base = phi.close();
    candidates.into_iter().find_map(|e| {
        let entailed = base.graph().is_some_and(|b| b.relation(&e.a, &e.b) == Some(e.label));
        if entailed {
            None
        } else {
            AtomicConstraint::new(e.a, e.b, e.label)
        }
    })
}

enum Step {
    Done(Osdd),
    Split(AtomicConstraint),
}

type MemoKey = (usize, CanonicalKey, Vec<Var>);

pub(crate) fn to_proper(d: &Osdd) -> Result<Osdd, DiagramError> {
    let mut memo = HashMap::new();
    match go(d, &Formula::new(), &[], &mut memo)? {
        Step::Done(r) => Ok(r),
        Step::Split(b) => unreachable!("implicit atom {b} escaped the root"),
    }
}

fn go(n: &Osdd, phi: &Formula, scope: &[Var], memo: &mut HashMap<MemoKey, Osdd>) -> Result<Step, ConstraintError> {
    let Some(free) = n.free_ref() else { return Ok(Step::Done(n.clone())) };
    // Only the part of the path formula over variables used below matters.
    let phi = phi.project(|v| free.contains(v)).expect("path formula is satisfiable");
    let local: Vec<Var> = scope.iter().filter(|v| free.contains(v)).cloned().collect();
    let key = (n.id(), phi.canonical_key(), local.clone());
    if let Some(r) = memo.get(&key) {
        return Ok(Step::Done(r.clone()));
    }
    let y = n.var().unwrap();
    let mut inner: Vec<Var> = local.clone();
    inner.push(y.clone());
    inner.sort();

    let mut work: VecDeque<(Formula, Osdd)> = n.edges().iter().map(|e| (e.label.clone(), e.child.clone())).collect();
    let mut out = Vec::new();
    while let Some((label, child)) = work.pop_front() {
        let path = phi.and(&label);
        if !path.satisfiable()? {
            continue;
        }
        if let Some(b) = implicit_atom(&phi, &label, &local) {
            return Ok(Step::Split(b));
        }
        match go(&child, &path, &inner, memo)? {
            Step::Done(c) => out.push((label, c)),
            Step::Split(b) => {
                if b.mentions(y) && b.vars().all(|v| inner.binary_search(v).is_ok()) {
                    work.push_front((label.with(b.negated()), child.clone()));
                    work.push_front((label.with(b), child));
                } else {
                    return Ok(Step::Split(b));
                }
            }
        }
    }
    let r = Osdd::node(y.clone(), out)?;
    memo.insert(key, r.clone());
    Ok(Step::Done(r))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::*;

    /// The improper diagram over X, Y, Z with four leaf placeholders.
    fn fig5a() -> (Osdd, [Var; 3], [Osdd; 3]) {
        let d = dom(&["a", "b", "c"]);
        let (x, y, z) = (ivar("s", 1, "X", &d), ivar("s", 2, "Y", &d), ivar("s", 3, "Z", &d));
        // Distinct sub-diagrams standing in for the three placeholders.
        let w = |k: i64| ivar("w", 10 + k, &format!("W{k}"), &d);
        let psi: [Osdd; 3] = std::array::from_fn(|k| {
            let wk = w(k as i64);
            let a = crate::term::GroundTerm::atom(["a", "b", "c"][k]);
            let lab = Formula::single(crate::constraint::AtomicConstraint::eq(wk.clone(), a.clone()));
            let neg = Formula::single(crate::constraint::AtomicConstraint::neq(wk.clone(), a));
            Osdd::node(wk, vec![(lab, Osdd::one()), (neg, Osdd::zero())]).unwrap()
        });
        let vs = [&x, &y, &z];
        let zn = Osdd::node(
            z.clone(),
            vec![
                (f("Z = X, Z = Y", &vs), psi[0].clone()),
                (f("Z = X, Z != Y", &vs), psi[1].clone()),
                (f("Z != X, Z = Y", &vs), psi[2].clone()),
                (f("Z != X, Z != Y", &vs), Osdd::zero()),
            ],
        )
        .unwrap();
        let root = Osdd::unconstrained(x.clone(), Osdd::unconstrained(y.clone(), zn));
        (root, [x, y, z], psi)
    }

    #[test]
    fn improper_example_is_rewritten() {
        let (d, [x, y, z], psi) = fig5a();
        let p = d.to_proper().unwrap();
        assert!(p.validate().is_empty(), "{:?}", p.validate());
        let yn = &p.edges()[0].child;
        let labels: Vec<String> = yn.edges().iter().map(|e| e.label.to_string()).collect();
        assert_eq!(labels, ["Y = X", "Y != X"]);
        let vs = [&x, &y, &z];
        let z1 = &yn.edges()[0].child;
        let z2 = &yn.edges()[1].child;
        let z1_edges: Vec<(Formula, Osdd)> = z1.edges().iter().map(|e| (e.label.clone(), e.child.clone())).collect();
        assert_eq!(
            z1_edges,
            vec![(f("Z = X, Z = Y", &vs), psi[0].clone()), (f("Z != X, Z != Y", &vs), Osdd::zero())]
        );
        let z2_children: Vec<&Osdd> = z2.edges().iter().map(|e| &e.child).collect();
        assert_eq!(z2_children.len(), 3);
        assert!(z2_children.contains(&&psi[1]) && z2_children.contains(&&psi[2]));
        assert_eq!(p.ground().unwrap(), d.ground().unwrap());
    }

    #[test]
    fn proper_input_is_a_fixpoint() {
        let (d, ..) = fig5a();
        let p = d.to_proper().unwrap();
        assert_eq!(p.to_proper().unwrap(), p);
    }
}
