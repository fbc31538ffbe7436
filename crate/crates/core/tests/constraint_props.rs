use std::sync::Arc;

use osdd::constraint::{extend_measure, AtomicConstraint, Closure, Extension, Formula, Operand, Polarity, Var};
use osdd::term::{GroundTerm, TypeDomain};
use proptest::prelude::*;

fn domain(n: usize) -> Arc<TypeDomain> {
    let vals = (0..n).map(|i| GroundTerm::atom(&((b'a' + i as u8) as char).to_string())).collect();
    Arc::new(TypeDomain::new("t", vals).unwrap())
}

fn vars(d: &Arc<TypeDomain>, n: usize) -> Vec<Var> {
    (0..n).map(|i| Var::named(&format!("V{i}"), d.clone())).collect()
}

/// (lhs var, rhs: var index or constant index, eq?)
type RawAtom = (usize, Result<usize, usize>, bool);

fn raw_atoms(nvars: usize, nconst: usize) -> impl Strategy<Value = Vec<RawAtom>> {
    let rhs = prop_oneof![(0..nvars).prop_map(Ok), (0..nconst).prop_map(Err)];
    prop::collection::vec((0..nvars, rhs, any::<bool>()), 0..6)
}

fn build(d: &Arc<TypeDomain>, vs: &[Var], raw: &[RawAtom]) -> Formula {
    raw.iter()
        .map(|(l, r, eq)| {
            let rhs = match r {
                Ok(j) => Operand::Var(vs[*j].clone()),
                Err(k) => Operand::Const(d.values()[*k].clone()),
            };
            let pol = if *eq { Polarity::Eq } else { Polarity::Neq };
            AtomicConstraint::new(Operand::Var(vs[*l].clone()), rhs, pol).unwrap()
        })
        .collect()
}

fn assignments(d: &TypeDomain, n: usize) -> Vec<Vec<GroundTerm>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                d.values().iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    out
}

fn eval(f: &Formula, vs: &[Var], a: &[GroundTerm]) -> bool {
    f.holds(|v| vs.iter().position(|w| w == v).map(|i| a[i].clone())).unwrap()
}

proptest! {
    #[test]
    fn extension_agrees_with_full_closure(
        raw in raw_atoms(4, 4),
        label in prop::collection::vec((prop_oneof![(0..4usize).prop_map(Ok), (0..4usize).prop_map(Err)], any::<bool>()), 0..5),
    ) {
        let d = domain(4);
        let vs = vars(&d, 5);
        let phi = build(&d, &vs[..4], &raw);
        let g = match phi.close() {
            Closure::Graph(g) if g.is_saturated() => g,
            _ => return Ok(()),
        };
        let gamma: Formula = label.iter().map(|(r, eq)| (4usize, *r, *eq)).map(|a| build(&d, &vs, &[a])).flat_map(|f| f.atoms().cloned().collect::<Vec<_>>()).collect();
        let y = &vs[4];
        let full = match phi.and(&gamma).close() {
            Closure::Unsatisfiable => Extension::Unsatisfiable,
            Closure::Graph(h) => Extension::Measure(h.measure(y)),
        };
        prop_assert_eq!(extend_measure(&g, &phi, y, &gamma), full, "phi {} gamma {}", phi, gamma);
    }

    #[test]
    fn closure_is_idempotent(raw in raw_atoms(3, 3)) {
        let d = domain(4);
        let vs = vars(&d, 3);
        let f = build(&d, &vs, &raw);
        match f.close() {
            Closure::Unsatisfiable => {}
            Closure::Graph(g) => {
                let again = g.to_formula().close();
                prop_assert_eq!(again.graph().map(|h| h.edges()), Some(g.edges()));
            }
        }
    }

    #[test]
    fn satisfiable_matches_enumeration(raw in raw_atoms(3, 2), n in 2usize..=4) {
        let d = domain(n);
        let vs = vars(&d, 3);
        let f = build(&d, &vs, &raw);
        let brute = assignments(&d, 3).iter().any(|a| eval(&f, &vs, a));
        prop_assert_eq!(f.satisfiable().unwrap(), brute);
    }

    #[test]
    fn solutions_match_enumeration(raw in raw_atoms(3, 2), n in 2usize..=4) {
        let d = domain(n);
        let vs = vars(&d, 3);
        let f = build(&d, &vs, &raw);
        let brute: std::collections::BTreeSet<GroundTerm> = assignments(&d, 3)
            .into_iter()
            .filter(|a| eval(&f, &vs, a))
            .map(|a| a[0].clone())
            .collect();
        prop_assert_eq!(f.solutions(&vs[0], &Formula::new()).unwrap(), brute);
    }

    #[test]
    fn negate_partitions_the_complement(raw in raw_atoms(3, 2), n in 2usize..=4) {
        let d = domain(n);
        let vs = vars(&d, 3);
        let f = build(&d, &vs, &raw);
        let members = f.negate().unwrap();
        for a in assignments(&d, 3) {
            let hits = members.iter().filter(|m| eval(m, &vs, &a)).count();
            prop_assert_eq!(hits, usize::from(!eval(&f, &vs, &a)));
        }
    }

    #[test]
    fn canonical_keys_are_semantic_and_totally_ordered(
        a in raw_atoms(3, 2), b in raw_atoms(3, 2), c in raw_atoms(3, 2)
    ) {
        let d = domain(4);
        let vs = vars(&d, 3);
        let fs = [build(&d, &vs, &a), build(&d, &vs, &b), build(&d, &vs, &c)];
        let keys: Vec<_> = fs.iter().map(|f| f.canonical_key()).collect();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(keys[i].cmp(&keys[j]), keys[j].cmp(&keys[i]).reverse());
                prop_assert_eq!(keys[i].cmp(&keys[j]), keys[i].as_bytes().cmp(&keys[j].as_bytes()));
                for k in 0..3 {
                    if keys[i] <= keys[j] && keys[j] <= keys[k] {
                        prop_assert!(keys[i] <= keys[k]);
                    }
                }
            }
        }
        // A formula and its closure share a key.
        if let Some(g) = fs[0].close().graph() {
            prop_assert_eq!(g.to_formula().canonical_key(), keys[0].clone());
        }
        let mut sorted = fs.to_vec();
        sorted.sort_by_key(|f| f.canonical_key());
        let mut twice = sorted.clone();
        twice.sort_by_key(|f| f.canonical_key());
        prop_assert_eq!(sorted, twice);
    }
}
