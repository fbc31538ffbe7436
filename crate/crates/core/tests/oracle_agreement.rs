use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use osdd::frontend::{evaluate, parse_query};
use osdd::inference::{exact_conditional, exact_prob, exact_prob_measurable, exact_prob_with, mdd_prob, measurability};
use osdd::oracle::random::{random_program, GenConfig};
use osdd::oracle::worlds::{brute_force, WORLD_LIMIT};
use osdd::prolog::Program;
use proptest::prelude::*;

fn load(seed: u64, cfg: GenConfig) -> Program {
    Program::parse(&random_program(seed, cfg).source).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_matches_possible_worlds(seed in any::<u64>()) {
        let p = load(seed, GenConfig::default());
        let (q, e) = (parse_query("q").unwrap(), parse_query("e").unwrap());
        let worlds = brute_force(&p, &q, None, WORLD_LIMIT).unwrap();
        prop_assert_eq!(&worlds.total, &BigRational::from_integer(1.into()));
        let d = evaluate(&p, &q).unwrap();
        let exact: BigRational = exact_prob(&d, p.switches()).unwrap();
        prop_assert_eq!(&exact, &worlds.joint);
        let f: f64 = exact_prob(&d, p.switches()).unwrap();
        prop_assert!((f - worlds.joint.to_f64().unwrap()).abs() < 1e-9);

        let de = evaluate(&p, &e).unwrap();
        let cond = brute_force(&p, &q, Some(&e), WORLD_LIMIT).unwrap();
        prop_assert_eq!(exact_conditional(&d, &de, p.switches()).unwrap(), cond.conditional());
    }

    #[test]
    fn symmetry_and_grounding_agree(seed in any::<u64>()) {
        let p = load(seed, GenConfig::default());
        let d = evaluate(&p, &parse_query("q").unwrap()).unwrap();
        let with: BigRational = exact_prob_with(&d, p.switches(), true).unwrap();
        let without: BigRational = exact_prob_with(&d, p.switches(), false).unwrap();
        prop_assert_eq!(&with, &without);
        let grounded: BigRational = mdd_prob(&d.ground().unwrap(), p.switches()).unwrap();
        prop_assert_eq!(&with, &grounded);
    }

    #[test]
    fn measurable_path_agrees_when_applicable(seed in any::<u64>()) {
        let cfg = GenConfig { uniform_only: true, ..GenConfig::default() };
        let p = load(seed, cfg);
        let d = evaluate(&p, &parse_query("q").unwrap()).unwrap();
        if measurability(&d).measurable {
            let fast: BigRational = exact_prob_measurable(&d, p.switches()).unwrap();
            let general: BigRational = exact_prob(&d, p.switches()).unwrap();
            prop_assert_eq!(fast, general);
        }
    }

    #[test]
    fn disjunction_is_monotone(seed in any::<u64>()) {
        let p = load(seed, GenConfig::default());
        let q = evaluate(&p, &parse_query("q").unwrap()).unwrap();
        let e = evaluate(&p, &parse_query("e").unwrap()).unwrap();
        let both = q.or(&e).unwrap();
        let pq: BigRational = exact_prob(&q, p.switches()).unwrap();
        let pe: BigRational = exact_prob(&e, p.switches()).unwrap();
        let pb: BigRational = exact_prob(&both, p.switches()).unwrap();
        prop_assert!(pb >= pq && pb >= pe);
        prop_assert!(pb <= &pq + &pe);
        prop_assert!(!pb.is_zero() || (pq.is_zero() && pe.is_zero()));
    }
}
