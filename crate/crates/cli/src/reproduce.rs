use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use osdd::diagram::Osdd;
use osdd::frontend::{evaluate, parse_query};
use osdd::inference::{exact_prob, exact_prob_measurable, measurability};
use osdd::oracle::programs::{BIRTHDAY, PALINDROME};
use osdd::prolog::Program;

use crate::commands::with_timeout;
use crate::error::CliError;

/// Substring count used by the Palindrome query.
pub const PALINDROME_K: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Birthday,
    Palindrome,
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "birthday" => Ok(Experiment::Birthday),
            "palindrome" => Ok(Experiment::Palindrome),
            "" => Err(CliError::user("missing experiment name; expected `birthday` or `palindrome`")),
            other => Err(CliError::user(format!("unknown experiment `{other}`; expected `birthday` or `palindrome`"))),
        }
    }
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Birthday => "birthday",
            Experiment::Palindrome => "palindrome",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReproduceConfig {
    pub sizes: Vec<u64>,
    pub runs: usize,
    pub timeout_s: Option<u64>,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig { sizes: (6..=16).step_by(2).collect(), runs: 5, timeout_s: Some(600) }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Row {
    pub size: u64,
    pub status: String,
    /// Median diagram construction time; for Palindrome the evidence diagram.
    pub osdd_ms: Option<f64>,
    /// Palindrome only: the query-and-evidence diagram.
    pub qe_osdd_ms: Option<f64>,
    pub prob_ms: Option<f64>,
    pub measurable: Option<bool>,
    pub nodes: Option<usize>,
    /// Palindrome only: probability of the evidence.
    pub evidence_probability: Option<f64>,
    pub probability: Option<f64>,
    pub exact: Option<String>,
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed().as_secs_f64() * 1e3)
}

fn prob(d: &Osdd, p: &Program, measurable: bool) -> Result<BigRational, CliError> {
    Ok(if measurable { exact_prob_measurable(d, p.switches())? } else { exact_prob(d, p.switches())? })
}

pub fn birthday_row(n: u64, runs: usize) -> Result<Row, CliError> {
    let p = Program::parse(BIRTHDAY)?;
    let q = parse_query(&format!("same_birthday({n})"))?;
    let (mut build, mut infer) = (Vec::new(), Vec::new());
    let mut last = None;
    for _ in 0..runs.max(1) {
        let (d, b) = timed(|| evaluate(&p, &q));
        let d = d?;
        let (r, t) = timed(|| -> Result<_, CliError> {
            let m = measurability(&d).measurable;
            Ok((m, prob(&d, &p, m)?))
        });
        build.push(b);
        infer.push(t);
        last = Some((d, r?));
    }
    let (d, (m, pr)) = last.expect("at least one run");
    Ok(Row {
        size: n,
        status: "ok".into(),
        osdd_ms: Some(median(build)),
        prob_ms: Some(median(infer)),
        measurable: Some(m),
        nodes: Some(d.internal_count()),
        probability: pr.to_f64(),
        exact: Some(pr.to_string()),
        ..Row::default()
    })
}

pub fn palindrome_row(n: u64, runs: usize) -> Result<Row, CliError> {
    let p = Program::parse(PALINDROME)?;
    let e = parse_query(&format!("evidence({n})"))?;
    let qe = parse_query(&format!("query({n}, {PALINDROME_K}), evidence({n})"))?;
    let (mut be, mut bqe, mut infer) = (Vec::new(), Vec::new(), Vec::new());
    let mut last = None;
    for _ in 0..runs.max(1) {
        let (de, t1) = timed(|| evaluate(&p, &e));
        let (dqe, t2) = timed(|| evaluate(&p, &qe));
        let (de, dqe) = (de?, dqe?);
        let (r, t3) = timed(|| -> Result<_, CliError> {
            let (me, mqe) = (measurability(&de).measurable, measurability(&dqe).measurable);
            let pe = prob(&de, &p, me)?;
            let pqe = prob(&dqe, &p, mqe)?;
            Ok((me && mqe, pe, pqe))
        });
        be.push(t1);
        bqe.push(t2);
        infer.push(t3);
        last = Some((dqe, r?));
    }
    let (dqe, (m, pe, pqe)) = last.expect("at least one run");
    let cond = &pqe / &pe;
    Ok(Row {
        size: n,
        status: "ok".into(),
        osdd_ms: Some(median(be)),
        qe_osdd_ms: Some(median(bqe)),
        prob_ms: Some(median(infer)),
        measurable: Some(m),
        nodes: Some(dqe.internal_count()),
        evidence_probability: pe.to_f64(),
        probability: cond.to_f64(),
        exact: Some(cond.to_string()),
    })
}

/// Runs the size sweep. A size that exceeds the timeout is recorded and
/// the larger sizes are skipped.
pub fn sweep(exp: Experiment, cfg: &ReproduceConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    let mut timed_out = false;
    for &n in &cfg.sizes {
        if timed_out {
            rows.push(Row { size: n, status: "skipped".into(), ..Row::default() });
            continue;
        }
        let runs = cfg.runs;
        let r = with_timeout(cfg.timeout_s, move || match exp {
            Experiment::Birthday => birthday_row(n, runs),
            Experiment::Palindrome => palindrome_row(n, runs),
        });
        match r {
            Ok(row) => rows.push(row),
            Err(CliError::User(msg)) if msg.starts_with("timed out") => {
                timed_out = true;
                rows.push(Row { size: n, status: "timeout".into(), ..Row::default() });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

pub fn write_rows(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn cell(x: Option<f64>, digits: usize) -> String {
    x.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "-".into())
}

/// Table in the layout of the timing table: times in seconds.
pub fn render(exp: Experiment, rows: &[Row]) -> String {
    let s = |x: Option<f64>| cell(x.map(|v| v / 1e3), 4);
    let mut out = String::new();
    match exp {
        Experiment::Birthday => {
            out.push_str("Size  osdd      M. prob   probability  measurable  status\n");
            for r in rows {
                out.push_str(&format!(
                    "{:<5} {:<9} {:<9} {:<12} {:<11} {}\n",
                    r.size,
                    s(r.osdd_ms),
                    s(r.prob_ms),
                    cell(r.probability, 7),
                    r.measurable.map_or("-".into(), |m| m.to_string()),
                    r.status
                ));
            }
        }
        Experiment::Palindrome => {
            out.push_str("Size  evid. osdd  qe osdd   M. prob   P(evidence)  P(query|evidence)  measurable  status\n");
            for r in rows {
                out.push_str(&format!(
                    "{:<5} {:<11} {:<9} {:<9} {:<12} {:<18} {:<11} {}\n",
                    r.size,
                    s(r.osdd_ms),
                    s(r.qe_osdd_ms),
                    s(r.prob_ms),
                    cell(r.evidence_probability, 7),
                    cell(r.probability, 7),
                    r.measurable.map_or("-".into(), |m| m.to_string()),
                    r.status
                ));
            }
        }
    }
    out
}

pub fn output_path(dir: &Path, exp: Experiment) -> PathBuf {
    dir.join(format!("{}.csv", exp.name()))
}
