use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use osdd::diagram::{parse_osdd, Osdd};
use osdd::frontend::{evaluate, parse_query};
use osdd::inference::{diagnostics, exact_prob, exact_prob_measurable, measurability};
use osdd::oracle::worlds::{brute_force, WORLD_LIMIT};
use osdd::prolog::{Program, Term};
use osdd::sampling::{self, SampleConfig, SampleRun, RNG_NAME};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    ExactMeasurable,
    Lw,
    Independent,
    Oracle,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::ExactMeasurable => "exact-measurable",
            Mode::Lw => "lw",
            Mode::Independent => "independent",
            Mode::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Inputs {
    pub program: Program,
    pub query: Term,
    pub evidence: Option<Term>,
}

impl Inputs {
    pub fn load(program: &Path, query: &str, evidence: Option<&str>) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(program)
            .map_err(|e| CliError::user(format!("cannot read {}: {e}", program.display())))?;
        Self::from_source(&src, query, evidence)
    }

    pub fn from_source(src: &str, query: &str, evidence: Option<&str>) -> Result<Self, CliError> {
        Ok(Inputs {
            program: Program::parse(src)?,
            query: parse_query(query)?,
            evidence: evidence.map(parse_query).transpose()?,
        })
    }
}

/// Runs `f` on a worker thread, giving up after `secs` seconds.
pub fn with_timeout<T: Send + 'static>(
    secs: Option<u64>,
    f: impl FnOnce() -> Result<T, CliError> + Send + 'static,
) -> Result<T, CliError> {
    let Some(secs) = secs else { return f() };
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(f());
    });
    match rx.recv_timeout(Duration::from_secs(secs)) {
        Ok(r) => r,
        Err(mpsc::RecvTimeoutError::Timeout) => Err(CliError::user(format!("timed out after {secs} s"))),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(CliError::Internal("worker thread panicked".into())),
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Clone, Debug, Serialize)]
pub struct CompileStats {
    pub node_count: usize,
    pub build_ms: f64,
}

pub fn compile(inputs: &Inputs) -> Result<(Osdd, CompileStats), CliError> {
    let t = Instant::now();
    let d = evaluate(&inputs.program, &inputs.query)?;
    let stats = CompileStats { node_count: d.internal_count(), build_ms: ms(t.elapsed()) };
    Ok((d, stats))
}

/// Reads a diagram written by `compile`, typing its variables by the
/// program's switch declarations.
pub fn read_diagram(program: &Program, path: &Path) -> Result<Osdd, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_osdd(text.trim(), |s| program.switches().get(s).map(|d| d.domain.clone()))?)
}

#[derive(Clone, Debug, Serialize)]
pub struct InferReport {
    pub mode: &'static str,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rational: Option<String>,
    pub measurable: bool,
    pub node_count: usize,
    pub max_free_vars: usize,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_difference: Option<f64>,
}

fn prob(d: &Osdd, program: &Program, mode: Mode) -> Result<BigRational, CliError> {
    Ok(match mode {
        Mode::ExactMeasurable => exact_prob_measurable(d, program.switches())?,
        _ => exact_prob(d, program.switches())?,
    })
}

/// Exact `P(query | evidence)`, optionally starting from a compiled query
/// diagram.
pub fn infer(inputs: &Inputs, mode: Mode, rational: bool, compiled: Option<&Path>) -> Result<InferReport, CliError> {
    if matches!(mode, Mode::Lw | Mode::Independent) {
        return Err(CliError::user(format!("mode `{}` is a sampling mode; use `osdd sample`", mode.name())));
    }
    let t = Instant::now();
    let p = &inputs.program;
    let q = match compiled {
        Some(path) => read_diagram(p, path)?,
        None => evaluate(p, &inputs.query)?,
    };
    let (target, e) = match &inputs.evidence {
        Some(ev) => {
            let e = evaluate(p, ev)?;
            (q.and(&e)?, Some(e))
        }
        None => (q, None),
    };
    let report = measurability(&target);
    if mode == Mode::ExactMeasurable && !report.measurable {
        let at = report.offending.unwrap_or_default().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" > ");
        return Err(CliError::user(format!(
            "the diagram is not measurable (first offending edge below {at}); rerun with --mode exact"
        )));
    }
    let joint = prob(&target, p, mode)?;
    let exact = match &e {
        Some(e) => {
            let pe = prob(e, p, mode)?;
            if pe.is_zero() {
                return Err(CliError::user("the evidence has probability 0"));
            }
            joint / pe
        }
        None => joint,
    };
    let diag = diagnostics(&target);
    let mut out = InferReport {
        mode: mode.name(),
        probability: exact.to_f64().unwrap_or(f64::NAN),
        rational: rational.then(|| exact.to_string()),
        measurable: report.measurable,
        node_count: diag.n,
        max_free_vars: diag.v,
        elapsed_ms: 0.0,
        oracle_probability: None,
        oracle_difference: None,
    };
    if mode == Mode::Oracle {
        let w = brute_force(p, &inputs.query, inputs.evidence.as_ref(), WORLD_LIMIT)?;
        let o = w.conditional().ok_or_else(|| CliError::user("the evidence has probability 0"))?;
        out.oracle_probability = o.to_f64();
        out.oracle_difference = (&exact - &o).to_f64().map(f64::abs);
    }
    out.elapsed_ms = ms(t.elapsed());
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSummary {
    pub mode: &'static str,
    pub samples: u64,
    pub consistent: u64,
    pub rejected: u64,
    pub consistency_rate: f64,
    pub estimate: Option<f64>,
    pub variance: Option<f64>,
    pub seed: u64,
    pub rng: &'static str,
    pub elapsed_ms: f64,
}

pub fn sample(inputs: &Inputs, cfg: &SampleConfig) -> Result<(SampleRun, SampleSummary), CliError> {
    let t = Instant::now();
    let run = sampling::estimate(&inputs.program, &inputs.query, inputs.evidence.as_ref(), cfg)?;
    let s = &run.state;
    let summary = SampleSummary {
        mode: cfg.mode.name(),
        samples: s.n_total,
        consistent: s.n_consistent,
        rejected: run.rejected,
        consistency_rate: s.n_consistent as f64 / s.n_total as f64,
        estimate: s.estimate(),
        variance: s.variance(),
        seed: cfg.seed,
        rng: RNG_NAME,
        elapsed_ms: ms(t.elapsed()),
    };
    Ok((run, summary))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes convergence rows with header `samples,consistent,estimate,variance,mode,seed`.
pub fn write_csv<W: Write>(out: W, run: &SampleRun, mode: &str, seed: u64) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["samples", "consistent", "estimate", "variance", "mode", "seed"])?;
    for r in &run.rows {
        w.write_record([
            r.samples.to_string(),
            r.consistent.to_string(),
            opt(r.estimate),
            opt(r.variance),
            mode.to_string(),
            seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).map_err(|e| CliError::user(format!("cannot write {}: {e}", path.display())))
}
