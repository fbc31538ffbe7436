use std::sync::Arc;

use osdd::constraint::{parse_formula, AtomicConstraint, Var};
use osdd::diagram::{parse_osdd, Condition, Osdd};
use osdd::error::ConstraintError;
use osdd::oracle::diagrams::letters;
use osdd::term::{GroundTerm, SwitchInstance, TypeDomain};

fn parse(text: &str, d: &Arc<TypeDomain>) -> Osdd {
    parse_osdd(text, |_| Some(d.clone())).unwrap()
}

const FIG2B: &str = "(b, 1, X1)[true : (b, 2, X2)[X2 = X1 : 1 ; X2 != X1 : (b, 3, X3)[\
                     X3 != X1, X3 = X2 : 1 ; X3 = X1 : 1 ; X3 != X1, X3 != X2 : 0]]]";

#[test]
fn birthday_diagram_is_proper_and_closed() {
    let d = Arc::new(TypeDomain::range("days", 1, 365).unwrap());
    let o = parse(FIG2B, &d);
    assert!(o.validate().is_empty(), "{:?}", o.validate());
    assert!(o.free_vars().is_empty());
}

#[test]
fn birthday_grounding_matches_enumeration() {
    let d = Arc::new(TypeDomain::range("days", 1, 3).unwrap());
    let o = parse(FIG2B, &d);
    let m = o.ground().unwrap();
    let vars: Vec<Var> = o.bound_vars().into_iter().collect();
    let mut shared = 0;
    for a in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                let world = [a, b, c];
                let expect = a == b || a == c || b == c;
                let got = m
                    .eval(|v| vars.iter().position(|w| w == v).map(|i| GroundTerm::int(world[i])))
                    .unwrap();
                assert_eq!(got, expect, "{world:?}");
                shared += usize::from(got);
            }
        }
    }
    assert_eq!(shared, 21);
}

#[test]
fn improper_diagram_has_one_explicit_constraint_violation() {
    let d = letters(3);
    let o = parse(
        "(s, 1, X)[true : (s, 2, Y)[true : (s, 3, Z)[Z = X, Z = Y : 1 ; Z = X, Z != Y : 1 ; \
         Z != X, Z = Y : 1 ; Z != X, Z != Y : 0]]]",
        &d,
    );
    let v = o.validate();
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].condition, Condition::ExplicitConstraints);
    assert_eq!(v[0].path.last(), Some(&SwitchInstance::new("s", 3)));
    let p = o.to_proper().unwrap();
    assert!(p.validate().is_empty());
    assert_eq!(p.ground().unwrap(), o.ground().unwrap());
}

#[test]
fn disjunction_example_then_birthday() {
    let d = Arc::new(TypeDomain::range("days", 1, 365).unwrap());
    let left = parse("(b, 1, X1)[true : (b, 2, X2)[X2 = X1 : 1 ; X2 != X1 : 0]]", &d);
    let right = parse("(b, 1, X1)[true : (b, 3, X3)[X3 = X1 : 1 ; X3 != X1 : 0]]", &d);
    let or = left.or(&right).unwrap();
    let fig4b = parse(
        "(b, 1, X1)[true : (b, 2, X2)[X2 = X1 : 1 ; X2 != X1 : (b, 3, X3)[X3 = X1 : 1 ; X3 != X1 : 0]]]",
        &d,
    );
    assert_eq!(or, fig4b);
    let third = parse("(b, 2, X2)[true : (b, 3, X3)[X3 = X2 : 1 ; X3 != X2 : 0]]", &d);
    let all = or.or(&third).unwrap();
    assert_eq!(all, parse(FIG2B, &d));
    let names: Vec<String> = left.bound_vars().iter().map(|v| v.to_string()).collect();
    assert_eq!(names, ["X1", "X2"]);
}

#[test]
fn constraint_application_examples() {
    let d = letters(2);
    let (x1, x2) = (
        Var::instance_named(SwitchInstance::new("flip", 1), "X1", d.clone()),
        Var::instance_named(SwitchInstance::new("flip", 2), "X2", d.clone()),
    );
    let chain = Osdd::unconstrained(x1.clone(), Osdd::unconstrained(x2.clone(), Osdd::one()));
    let applied = chain.apply_constraint(&AtomicConstraint::eq(x1.clone(), x2.clone())).unwrap();
    let fig3a = parse("(flip, 1, X1)[true : (flip, 2, X2)[X2 = X1 : 1 ; X2 != X1 : 0]]", &d);
    assert_eq!(applied, fig3a);

    let x = Var::instance_named(SwitchInstance::new("s", 1), "X", d.clone());
    let single = Osdd::unconstrained(x.clone(), Osdd::one());
    let a = single.apply_constraint(&AtomicConstraint::eq(x.clone(), GroundTerm::atom("a"))).unwrap();
    assert_eq!(a, parse("(s, 1, X)[X = a : 1 ; X != a : 0]", &d));

    assert_eq!(Osdd::one().apply_constraint(&AtomicConstraint::eq(x.clone(), GroundTerm::atom("a"))).unwrap(), Osdd::one());

    let z = Var::named("Z", d.clone());
    assert!(single.apply_constraint(&AtomicConstraint::eq(x, z)).is_err());
}

#[test]
fn free_variables_of_open_node() {
    let d = letters(2);
    let o = parse("(s, 1, X)[X = Z : 1 ; X != Z : 0]", &d);
    let free: Vec<String> = o.free_vars().iter().map(|v| v.to_string()).collect();
    assert_eq!(free, ["Z"]);
    let resolve = |n: &str| -> Result<Var, ConstraintError> { Ok(Var::named(n, d.clone())) };
    assert_eq!(o.edges()[0].label, parse_formula("X = Z", |n| {
        if n == "X" {
            Ok(o.var().unwrap().clone())
        } else {
            resolve(n)
        }
    })
    .unwrap());
    assert!(o.ground().is_err());
}

#[test]
fn canonicalize_is_idempotent() {
    let d = letters(3);
    let o = parse(FIG2B, &d);
    let c = o.canonicalize().unwrap();
    assert_eq!(c, o);
    assert_eq!(c.canonicalize().unwrap(), c);
}
