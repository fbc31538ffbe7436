use std::sync::Arc;

use osdd::diagram::{parse_osdd, Osdd};
use osdd::frontend::{evaluate, parse_query};
use osdd::oracle::programs::{BIRTHDAY, PALINDROME};
use osdd::prolog::Program;
use osdd::term::TypeDomain;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn run(p: &Program, q: &str) -> Osdd {
    evaluate(p, &parse_query(q).unwrap()).unwrap()
}

#[test]
fn birthday_of_three_is_the_shared_birthday_diagram() {
    let p = Program::parse(BIRTHDAY).unwrap();
    let d = Arc::new(TypeDomain::range("b", 1, 365).unwrap());
    let expect = parse_osdd(
        "(b, 1, X1)[true : (b, 2, X2)[X2 = X1 : 1 ; X2 != X1 : (b, 3, X3)[\
         X3 != X1, X3 = X2 : 1 ; X3 = X1 : 1 ; X3 != X1, X3 != X2 : 0]]]",
        |_| Some(d.clone()),
    )
    .unwrap();
    assert_eq!(run(&p, "same_birthday(3)"), expect);
    assert_eq!(run(&p, "same_birthday(1)"), Osdd::zero());
}

#[test]
fn palindrome_evidence_has_three_constrained_levels() {
    let p = Program::parse(PALINDROME).unwrap();
    let e = run(&p, "evidence(6)");
    assert_eq!(e.internal_count(), 6);
    let mut constrained = 0;
    e.visit(|n| {
        if n.edges().iter().any(|x| !x.label.is_empty()) {
            constrained += 1;
        }
    });
    assert_eq!(constrained, 3);
    assert!(e.validate().is_empty());
    assert!(e.free_vars().is_empty());
}

#[test]
fn evaluation_is_repeatable() {
    let p = Program::parse(PALINDROME).unwrap();
    let a = run(&p, "query(5, 2)");
    let b = run(&p, "query(5, 2)");
    assert_eq!(a, b);
    assert_eq!(a.id(), b.id());
}

#[test]
fn clause_order_does_not_matter() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for (src, queries) in [
        (BIRTHDAY, &["same_birthday(4)"][..]),
        (PALINDROME, &["evidence(5)", "query(4, 2)", "query(3, 0)"][..]),
    ] {
        let p = Program::parse(src).unwrap();
        let base: Vec<Osdd> = queries.iter().map(|q| run(&p, q)).collect();
        for _ in 0..4 {
            let mut order: Vec<usize> = (0..p.clauses().len()).collect();
            order.shuffle(&mut rng);
            let shuffled = p.with_clause_order(&order);
            for (q, b) in queries.iter().zip(&base) {
                assert_eq!(&run(&shuffled, q), b, "{q} with order {order:?}");
            }
        }
    }
}

#[test]
fn symbolic_conditions_split_into_both_branches() {
    let p = Program::parse(
        "values(c, [r, g, b]).\n\
         colour(K) :- msw(c, 1, X), (X = r -> K = warm ; K = cold).\n",
    )
    .unwrap();
    let warm = run(&p, "colour(warm)");
    let cold = run(&p, "colour(cold)");
    assert_eq!(warm.to_string(), "(c, 1, X_c_1)[X_c_1 = r : 1 ; X_c_1 != r : 0]");
    assert_eq!(cold.to_string(), "(c, 1, X_c_1)[X_c_1 = r : 0 ; X_c_1 != r : 1]");
    assert_eq!(warm.or(&cold).unwrap().to_string(), "(c, 1, X_c_1)[true : 1]");
}
