//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::ToPrimitive;

use osdd::diagram::BoolOp;
use osdd::frontend::{evaluate, parse_query};
use osdd::inference::{exact_conditional, exact_prob, measurability};
use osdd::oracle::diagrams::{family, improper_example, instance_vars, letters};
use osdd::oracle::programs::{BIRTHDAY, PALINDROME};
use osdd::oracle::random::{random_program, GenConfig};
use osdd::oracle::saturation::check_saturation;
use osdd::oracle::worlds::{brute_force, closed_form_birthday, WORLD_LIMIT};
use osdd::prolog::Program;
use osdd::sampling::{estimate, Mode, SampleConfig, SampleRun};
use osdd_cli::reproduce::birthday_row;

type Outcome = Result<String, String>;

const RANDOM_PROGRAMS: u64 = 200;
const ORACLE_TOLERANCE: f64 = 1e-9;
const ORACLE_BUDGET: Duration = Duration::from_secs(300);
const SAMPLES: u64 = 100_000;
const STANDARD_ERRORS: f64 = 4.0;
const MAX_SLOPE: f64 = 3.0;
const TIMING_RUNS: usize = 5;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn program(src: &str) -> Program {
    Program::parse(src).expect("bundled program parses")
}

fn exact_palindrome_evidence() -> Outcome {
    let t = Instant::now();
    let p = program(PALINDROME);
    let d = evaluate(&p, &parse_query("evidence(6)").unwrap()).map_err(|e| e.to_string())?;
    let pr: BigRational = exact_prob(&d, p.switches()).map_err(|e| e.to_string())?;
    let took = t.elapsed();
    ensure(pr == rat(1, 8) && took < Duration::from_secs(1), format!("P = {pr} in {took:?}"))
}

fn birthday_exact() -> Outcome {
    let p = program(BIRTHDAY);
    let d = evaluate(&p, &parse_query("same_birthday(3)").unwrap()).map_err(|e| e.to_string())?;
    let pr: BigRational = exact_prob(&d, p.switches()).map_err(|e| e.to_string())?;
    let closed = closed_form_birthday(3, 365);
    let measures = measurability(&d).constrained_measures();
    let want = [1, 364, 1, 1, 363].map(Some).to_vec();
    ensure(
        pr == rat(1093, 133225) && pr == closed && measures == want,
        format!("P = {pr}, closed form {closed}, measures {measures:?}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..RANDOM_PROGRAMS {
        let p = program(&random_program(seed, GenConfig::default()).source);
        let q = parse_query("q").unwrap();
        let d = evaluate(&p, &q).map_err(|e| format!("seed {seed}: {e}"))?;
        let exact: f64 = exact_prob(&d, p.switches()).map_err(|e| format!("seed {seed}: {e}"))?;
        let worlds = brute_force(&p, &q, None, WORLD_LIMIT).map_err(|e| format!("seed {seed}: {e}"))?;
        worst = worst.max((exact - worlds.joint.to_f64().unwrap()).abs());
    }
    let took = t.elapsed();
    ensure(
        worst <= ORACLE_TOLERANCE && took < ORACLE_BUDGET,
        format!("{RANDOM_PROGRAMS} programs, max |diff| = {worst:e}, {took:?}"),
    )
}

fn grounding_compatibility() -> Outcome {
    let mut pairs = 0usize;
    for n in 1..=3 {
        let ds = family(&instance_vars(3, &letters(n)));
        let grounded: Vec<_> = ds.iter().map(|d| d.ground().unwrap()).collect();
        for (i, a) in ds.iter().enumerate() {
            for (j, b) in ds.iter().enumerate() {
                for op in [BoolOp::And, BoolOp::Or] {
                    let c = a.oplus(b, op).map_err(|e| e.to_string())?;
                    if c.ground().unwrap() != grounded[i].oplus(&grounded[j], op) {
                        return Err(format!("{op:?} differs for {a} and {b}"));
                    }
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} combinations agree"))
}

fn saturation_equivalence() -> Outcome {
    let r = check_saturation(3, 4);
    ensure(
        r.mismatches == 0,
        format!(
            "{} formulas, {} mismatches ({} unsatisfiable), pigeonhole-free class {} with {} mismatches",
            r.formulas, r.mismatches, r.unsatisfiable_mismatches, r.in_class, r.in_class_mismatches
        ),
    )
}

fn improper_to_proper() -> Outcome {
    let (a, b) = improper_example();
    let p = a.to_proper().map_err(|e| e.to_string())?;
    let violations = p.validate();
    let same = p.ground().unwrap() == b.ground().unwrap();
    ensure(same && violations.is_empty(), format!("grounding equal: {same}, violations: {}", violations.len()))
}

fn run(p: &Program, query: &str, evidence: Option<&str>, mode: Mode) -> Result<SampleRun, String> {
    let q = parse_query(query).unwrap();
    let e = evidence.map(|e| parse_query(e).unwrap());
    estimate(p, &q, e.as_ref(), &SampleConfig::new(mode, SAMPLES, 1)).map_err(|e| e.to_string())
}

fn lw_palindrome() -> Outcome {
    let p = program(PALINDROME);
    let d = evaluate(&p, &parse_query("evidence(8)").unwrap()).map_err(|e| e.to_string())?;
    let exact: f64 = exact_prob(&d, p.switches()).map_err(|e| e.to_string())?;
    let r = run(&p, "evidence(8)", None, Mode::Lw)?;
    let est = r.state.estimate().ok_or("no estimate")?;
    let se = r.state.std_error().ok_or("no standard error")?;
    let within = (est - exact).abs() <= STANDARD_ERRORS * se.max(f64::EPSILON);
    let weights_ok = r.weights == [0.5f64.powi(4)];
    ensure(
        within && weights_ok && r.rejected == 0,
        format!("estimate {est} vs {exact} (SE {se:e}), weights {:?}, rejected {}", r.weights, r.rejected),
    )
}

fn variance_dominance() -> Outcome {
    let p = program(PALINDROME);
    let (q, e) = ("query(12, 3)", "evidence(12)");
    let dq = evaluate(&p, &parse_query(q).unwrap()).map_err(|e| e.to_string())?;
    let de = evaluate(&p, &parse_query(e).unwrap()).map_err(|e| e.to_string())?;
    let reference = exact_conditional(&dq.and(&de).map_err(|e| e.to_string())?, &de, p.switches())
        .map_err(|e| e.to_string())?
        .ok_or("evidence is impossible")?;
    let lw = run(&p, q, Some(e), Mode::Lw)?;
    let ind = run(&p, q, Some(e), Mode::Independent)?;
    let (vl, vi) = (lw.state.variance(), ind.state.variance());
    let dominated = ind.state.n_consistent == 0 || matches!((vl, vi), (Some(a), Some(b)) if a < b);
    ensure(
        dominated,
        format!(
            "exact {reference}, lw {:?} (var {vl:?}), independent {:?} (var {vi:?}, {} consistent)",
            lw.state.estimate(),
            ind.state.estimate(),
            ind.state.n_consistent
        ),
    )
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn birthday_scaling() -> Outcome {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for n in (6..=16).step_by(2) {
        let row = birthday_row(n, TIMING_RUNS).map_err(|e| e.to_string())?;
        if row.measurable != Some(true) {
            return Err(format!("same_birthday({n}) is not measurable"));
        }
        xs.push((n as f64).ln());
        ys.push(row.prob_ms.unwrap().max(1e-6).ln());
    }
    let s = slope(&xs, &ys);
    let times: Vec<String> = ys.iter().map(|y| format!("{:.3}", y.exp())).collect();
    ensure(s <= MAX_SLOPE, format!("slope {s:.2}, median ms [{}]", times.join(", ")))
}

fn sample_csv(dir: &std::path::Path, program: &std::path::Path, tag: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("{tag}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_osdd"))
        .args(["sample", "--program"])
        .arg(program)
        .args(["--query", "query(8, 2)", "--evidence", "evidence(8)", "--samples", "5000", "--seed", "42", "--stride", "500"])
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("osdd-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let prog = dir.join("palindrome.pl");
    std::fs::write(&prog, PALINDROME).map_err(|e| e.to_string())?;
    let a = sample_csv(&dir, &prog, "a")?;
    let b = sample_csv(&dir, &prog, "b")?;
    let _ = std::fs::remove_dir_all(&dir);
    ensure(a == b && !a.is_empty(), format!("{} and {} bytes, identical: {}", a.len(), b.len(), a == b))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("palindrome evidence(6) is 1/8", exact_palindrome_evidence),
        ("birthday n=3 exact with measures", birthday_exact),
        ("random programs match possible worlds", oracle_equivalence),
        ("grounding commutes with and/or", grounding_compatibility),
        ("saturation iff constant counts", saturation_equivalence),
        ("improper diagram made proper", improper_to_proper),
        ("likelihood weighting on palindrome", lw_palindrome),
        ("likelihood weighting variance dominance", variance_dominance),
        ("birthday probability time at most cubic", birthday_scaling),
        ("seeded sampling is byte identical", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} [{secs:.1}s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
