use osdd::diagram::{BoolOp, Osdd};
use osdd::oracle::diagrams::{family, instance_vars, letters, random_osdd};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(seed: u64, n: usize) -> (Osdd, Osdd, Osdd) {
    let d = letters(n);
    let vars = instance_vars(3, &d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_osdd(&mut rng, &vars), random_osdd(&mut rng, &vars), random_osdd(&mut rng, &vars))
}

#[test]
fn family_members_are_proper() {
    for n in [2, 3] {
        let vars = instance_vars(3, &letters(n));
        for d in family(&vars) {
            assert!(d.validate().is_empty(), "{d}: {:?}", d.validate());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combination_is_closed_and_grounding_compatible(seed in any::<u64>(), n in 2usize..=3) {
        let (a, b, _) = pair(seed, n);
        for op in [BoolOp::And, BoolOp::Or] {
            let c = a.oplus(&b, op).unwrap();
            prop_assert!(c.validate().is_empty(), "{}: {:?}", c, c.validate());
            prop_assert_eq!(c.ground().unwrap(), a.ground().unwrap().oplus(&b.ground().unwrap(), op));
        }
    }

    #[test]
    fn combination_is_commutative_and_associative(seed in any::<u64>(), n in 2usize..=3) {
        let (a, b, c) = pair(seed, n);
        for op in [BoolOp::And, BoolOp::Or] {
            prop_assert_eq!(a.oplus(&b, op).unwrap(), b.oplus(&a, op).unwrap());
            let left = a.oplus(&b, op).unwrap().oplus(&c, op).unwrap();
            let right = a.oplus(&b.oplus(&c, op).unwrap(), op).unwrap();
            prop_assert_eq!(left.ground().unwrap(), right.ground().unwrap());
        }
    }

    #[test]
    fn every_path_of_a_proper_diagram_is_satisfiable(seed in any::<u64>(), n in 2usize..=3) {
        let (a, b, _) = pair(seed, n);
        let c = a.or(&b).unwrap();
        fn walk(d: &Osdd, phi: &osdd::constraint::Formula) -> bool {
            d.edges().iter().all(|e| {
                let next = phi.and(&e.label);
                next.satisfiable().unwrap() && walk(&e.child, &next)
            })
        }
        prop_assert!(walk(&c, &osdd::constraint::Formula::new()));
    }

    #[test]
    fn canonical_form_is_a_fixpoint(seed in any::<u64>()) {
        let (a, _, _) = pair(seed, 3);
        prop_assert_eq!(a.canonicalize().unwrap(), a.clone());
        prop_assert_eq!(a.to_proper().unwrap(), a);
    }
}
