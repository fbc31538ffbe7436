//! Small generated diagram families for exhaustive algebra checks.

use std::sync::Arc;

use rand::Rng;

use crate::constraint::{parse_formula, AtomicConstraint, Formula, Operand, Polarity, Var};
use crate::diagram::{BoolOp, Osdd};
use crate::term::{GroundTerm, SwitchInstance, TypeDomain};

/// Instance variables `(s,1) .. (s,n)` over `domain`.
pub fn instance_vars(n: usize, domain: &Arc<TypeDomain>) -> Vec<Var> {
    (1..=n as i64)
        .map(|k| Var::instance_named(SwitchInstance::new("s", k), &format!("X{k}"), domain.clone()))
        .collect()
}

/// The unconstrained chain over `vars` ending in the 1-leaf.
pub fn chain(vars: &[Var]) -> Osdd {
    vars.iter().rev().fold(Osdd::one(), |acc, v| Osdd::unconstrained(v.clone(), acc))
}

/// Atoms over `vars` and the first domain value.
pub fn atoms_over(vars: &[Var]) -> Vec<AtomicConstraint> {
    let mut out = Vec::new();
    let a = Operand::Const(vars[0].domain().values()[0].clone());
    for (i, x) in vars.iter().enumerate() {
        for p in [Polarity::Eq, Polarity::Neq] {
            out.push(AtomicConstraint::new(Operand::Var(x.clone()), a.clone(), p).unwrap());
            for y in &vars[..i] {
                out.push(AtomicConstraint::new(Operand::Var(x.clone()), Operand::Var(y.clone()), p).unwrap());
            }
        }
    }
    out
}

/// Both leaves, plus every chain over a nonempty subset of `vars` with at
/// most one atom applied.
pub fn family(vars: &[Var]) -> Vec<Osdd> {
    let mut out = vec![Osdd::zero(), Osdd::one()];
    for mask in 1u32..(1 << vars.len()) {
        let sub: Vec<Var> = (0..vars.len()).filter(|i| mask & (1 << i) != 0).map(|i| vars[i].clone()).collect();
        let c = chain(&sub);
        out.push(c.clone());
        for a in atoms_over(&sub) {
            out.push(c.apply_constraint(&a).expect("atom over chain variables"));
        }
    }
    out
}

/// A random proper diagram: a disjunction or conjunction of up to three
/// constrained chains.
pub fn random_osdd<R: Rng>(rng: &mut R, vars: &[Var]) -> Osdd {
    let parts = rng.gen_range(1..=3);
    let mut acc: Option<Osdd> = None;
    for _ in 0..parts {
        let sub: Vec<Var> = vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        if sub.is_empty() {
            continue;
        }
        let mut d = chain(&sub);
        let atoms = atoms_over(&sub);
        let mut f = Formula::new();
        for _ in 0..rng.gen_range(0..=2) {
            f.insert(atoms[rng.gen_range(0..atoms.len())].clone());
        }
        if f.satisfiable().unwrap_or(false) {
            d = d.apply_formula(&f).expect("formula over chain variables");
        }
        let op = if rng.gen_bool(0.5) { BoolOp::Or } else { BoolOp::And };
        acc = Some(match acc {
            None => d,
            Some(a) => a.oplus(&d, op).expect("proper operands"),
        });
    }
    acc.unwrap_or_else(|| Osdd::leaf(rng.gen_bool(0.5)))
}

/// A `{a, b, c, ...}` domain with `n` values.
pub fn letters(n: usize) -> Arc<TypeDomain> {
    let vals = (0..n).map(|i| GroundTerm::atom(&((b'a' + i as u8) as char).to_string())).collect();
    Arc::new(TypeDomain::new("t", vals).expect("distinct letters"))
}

/// The improper diagram over `X`, `Y`, `Z` whose `Z` edges imply
/// constraints between `X` and `Y`, and its proper rewriting. The three
/// sub-diagrams are distinct single-node diagrams over a second switch.
pub fn improper_example() -> (Osdd, Osdd) {
    let d = letters(3);
    let v = |k: i64, name: &str| Var::instance_named(SwitchInstance::new("s", k), name, d.clone());
    let (x, y, z) = (v(1, "X"), v(2, "Y"), v(3, "Z"));
    let f = |text: &str| {
        parse_formula(text, |n| Ok([&x, &y, &z].into_iter().find(|w| w.name() == n).expect("known name").clone()))
            .expect("well-formed label")
    };
    let psi: Vec<Osdd> = (0..3)
        .map(|k| {
            let w = Var::instance_named(SwitchInstance::new("w", k as i64 + 4), &format!("W{k}"), d.clone());
            let a = d.values()[k].clone();
            Osdd::node(
                w.clone(),
                vec![
                    (Formula::single(AtomicConstraint::eq(w.clone(), a.clone())), Osdd::one()),
                    (Formula::single(AtomicConstraint::neq(w, a)), Osdd::zero()),
                ],
            )
            .expect("satisfiable labels")
        })
        .collect();
    let node = |var: &Var, edges: Vec<(&str, Osdd)>| {
        Osdd::node(var.clone(), edges.into_iter().map(|(t, c)| (f(t), c)).collect()).expect("satisfiable labels")
    };
    let improper = node(
        &z,
        vec![
            ("Z = X, Z = Y", psi[0].clone()),
            ("Z = X, Z != Y", psi[1].clone()),
            ("Z != X, Z = Y", psi[2].clone()),
            ("Z != X, Z != Y", Osdd::zero()),
        ],
    );
    let improper = Osdd::unconstrained(x.clone(), Osdd::unconstrained(y.clone(), improper));
    let same = node(&z, vec![("Z = X, Z = Y", psi[0].clone()), ("Z != X, Z != Y", Osdd::zero())]);
    let differ = node(
        &z,
        vec![("Z = X, Z != Y", psi[1].clone()), ("Z != X, Z = Y", psi[2].clone()), ("Z != X, Z != Y", Osdd::zero())],
    );
    let proper = Osdd::unconstrained(x.clone(), node(&y, vec![("Y = X", same), ("Y != X", differ)]));
    (improper, proper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improper_example_rewrites_to_its_proper_form() {
        let (a, b) = improper_example();
        assert!(!a.validate().is_empty());
        assert!(b.validate().is_empty(), "{:?}", b.validate());
        let p = a.to_proper().unwrap();
        assert!(p.validate().is_empty());
        assert_eq!(p.ground().unwrap(), b.ground().unwrap());
        assert_eq!(p, b);
    }
}
