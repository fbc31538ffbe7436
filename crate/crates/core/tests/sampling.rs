use num_traits::ToPrimitive;
use osdd::frontend::{evaluate, parse_query};
use osdd::inference::exact_prob;
use osdd::oracle::programs::{BIRTHDAY, PALINDROME};
use osdd::oracle::random::{random_program, GenConfig};
use osdd::oracle::worlds::{brute_force, closed_form_birthday, WORLD_LIMIT};
use osdd::prolog::Program;
use osdd::sampling::{estimate, rng, LwSampler, LwWeight, Mode, SampleConfig};
use proptest::prelude::*;

fn q(text: &str) -> osdd::prolog::Term {
    parse_query(text).unwrap()
}

#[test]
fn palindrome_samples_share_one_weight() {
    let p = Program::parse(PALINDROME).unwrap();
    let d = evaluate(&p, &q("evidence(6)")).unwrap();
    let s = LwSampler::new(&d, p.switches()).unwrap();
    let literal = LwSampler::new(&d, p.switches()).unwrap().with_weighting(LwWeight::Outcome);
    let mut r = rng(3);
    assert_eq!(literal.sample(&mut r).unwrap().weight, 0.125);
    for _ in 0..500 {
        let x = s.sample(&mut r).unwrap();
        assert!(x.is_consistent());
        assert_eq!(x.weight, 0.125);
        assert_eq!(x.restricted.len(), 3);
        assert_eq!(x.assignment.len(), 6);
    }
    let run = estimate(&p, &q("evidence(6)"), None, &SampleConfig::new(Mode::Lw, 1000, 1)).unwrap();
    assert_eq!((run.rejected, run.state.estimate()), (0, Some(0.125)));
    assert_eq!(run.weights, vec![0.125]);
}

#[test]
fn no_failure_means_unit_weight() {
    let p = Program::parse("values(c, [r, g, b]).\nset_sw(c, [0.2, 0.3, 0.5]).\nany :- msw(c, 1, _).\n").unwrap();
    let run = estimate(&p, &q("any"), None, &SampleConfig::new(Mode::Lw, 200, 0)).unwrap();
    assert_eq!(run.weights, vec![1.0]);
    assert_eq!(run.state.estimate(), Some(1.0));
}

#[test]
fn birthday_samples_share_one_weight() {
    let p = Program::parse(BIRTHDAY).unwrap();
    let run = estimate(&p, &q("same_birthday(6)"), None, &SampleConfig::new(Mode::Lw, 2000, 5)).unwrap();
    assert_eq!(run.rejected, 0);
    let mut w = run.weights.clone();
    w.sort_by(f64::total_cmp);
    assert_eq!(w, vec![5.0 / 365.0, 1.0]);
    let exact = closed_form_birthday(6, 365).to_f64().unwrap();
    let (est, se) = (run.state.estimate().unwrap(), run.state.std_error().unwrap());
    assert!((est - exact).abs() <= 4.0 * se + 1e-12, "{est} vs {exact} (se {se})");
}

#[test]
fn independent_sampler_rates() {
    let p = Program::parse(PALINDROME).unwrap();
    let run = estimate(&p, &q("evidence(6)"), None, &SampleConfig::new(Mode::Independent, 20_000, 11)).unwrap();
    let (est, se) = (run.state.estimate().unwrap(), run.state.std_error().unwrap());
    assert!((est - 0.125).abs() <= 4.0 * se, "{est} (se {se})");

    let b = Program::parse(BIRTHDAY).unwrap();
    let run = estimate(&b, &q("same_birthday(2)"), None, &SampleConfig::new(Mode::Independent, 20_000, 2)).unwrap();
    let (est, se) = (run.state.estimate().unwrap(), run.state.std_error().unwrap());
    assert!((est - 1.0 / 365.0).abs() <= 4.0 * se.max(1e-4), "{est} (se {se})");

    let det = Program::parse("t.\n").unwrap();
    let run = estimate(&det, &q("t"), None, &SampleConfig::new(Mode::Independent, 50, 0)).unwrap();
    assert_eq!((run.state.n_consistent, run.state.estimate()), (50, Some(1.0)));
}

#[test]
fn query_equal_to_evidence() {
    let p = Program::parse(PALINDROME).unwrap();
    for mode in [Mode::Lw, Mode::Independent] {
        let run = estimate(&p, &q("evidence(4)"), Some(&q("evidence(4)")), &SampleConfig::new(mode, 300, 9)).unwrap();
        assert_eq!(run.state.estimate(), Some(1.0), "{mode:?}");
    }
}

#[test]
fn conditional_estimate_converges() {
    let p = Program::parse(PALINDROME).unwrap();
    let cfg = SampleConfig { stride: 1000, ..SampleConfig::new(Mode::Lw, 20_000, 4) };
    let run = estimate(&p, &q("query(8, 4)"), Some(&q("evidence(8)")), &cfg).unwrap();
    let exact = brute_force(&p, &q("query(8, 4)"), Some(&q("evidence(8)")), WORLD_LIMIT).unwrap().probability();
    let exact = exact.to_f64().unwrap();
    let (est, se) = (run.state.estimate().unwrap(), run.state.std_error().unwrap());
    assert!((est - exact).abs() <= 4.0 * se, "{est} vs {exact} (se {se})");
    assert_eq!(run.rows.len(), 20);
    assert_eq!(run.rows.last().unwrap().samples, 20_000);
}

#[test]
fn undefined_without_consistent_evidence() {
    let p = Program::parse(PALINDROME).unwrap();
    let run = estimate(&p, &q("evidence(6)"), Some(&q("query(1, 5)")), &SampleConfig::new(Mode::Independent, 100, 0))
        .unwrap();
    assert_eq!(run.state.n_consistent, 0);
    assert_eq!(run.state.estimate(), None);
    assert!(estimate(&p, &q("evidence(6)"), None, &SampleConfig::new(Mode::Lw, 0, 0)).is_err());
}

#[test]
fn seeded_runs_repeat() {
    let p = Program::parse(PALINDROME).unwrap();
    for mode in [Mode::Lw, Mode::Independent] {
        let cfg = SampleConfig { stride: 50, ..SampleConfig::new(mode, 400, 21) };
        let a = estimate(&p, &q("query(6, 2)"), Some(&q("evidence(6)")), &cfg).unwrap();
        let b = estimate(&p, &q("query(6, 2)"), Some(&q("evidence(6)")), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weights_are_products_of_restricted_outcomes(seed in any::<u64>()) {
        let p = Program::parse(&random_program(seed, GenConfig::default()).source).unwrap();
        let d = evaluate(&p, &q("e")).unwrap();
        let s = LwSampler::new(&d, p.switches()).unwrap().with_weighting(LwWeight::Outcome);
        let mut r = rng(seed);
        for _ in 0..50 {
            let x = s.sample(&mut r).unwrap();
            if x.is_consistent() {
                let w: f64 = x.restricted.iter().map(|si| {
                    let decl = p.switches().get(&si.switch).unwrap();
                    decl.probs_f64()[decl.domain.position(&x.assignment[si]).unwrap()]
                }).product();
                prop_assert_eq!(w, x.weight);
            }
        }
    }

    #[test]
    fn importance_weights_are_unbiased(seed in any::<u64>()) {
        let p = Program::parse(&random_program(seed, GenConfig::default()).source).unwrap();
        let d = evaluate(&p, &q("e")).unwrap();
        let exact: f64 = exact_prob(&d, p.switches()).unwrap();
        let n = 4000;
        let cfg = SampleConfig::new(Mode::Lw, n, seed);
        let run = estimate(&p, &q("e"), None, &cfg).unwrap();
        let est = run.state.estimate().unwrap();
        let se = run.state.std_error().unwrap_or(0.0);
        // Outcomes below 3/n mass may never be drawn, leaving se at 0.
        let unseen = 3.0 / n as f64;
        prop_assert!((est - exact).abs() <= 4.0 * se + unseen, "{} vs {} (se {})", est, exact, se);
    }
}
