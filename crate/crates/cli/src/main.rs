use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use osdd::sampling::{self, SampleConfig};
use osdd_cli::commands::{self, with_timeout, Inputs, Mode};
use osdd_cli::reproduce::{self, Experiment, ReproduceConfig};
use osdd_cli::CliError;

/// Ordered symbolic derivation diagrams for probabilistic logic programs.
#[derive(Parser)]
#[command(name = "osdd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the diagram of a ground query and write it as text and DOT.
    Compile(CompileArgs),
    /// Exact probability of a query, optionally given evidence.
    Infer(InferArgs),
    /// Estimate a probability by sampling and write a convergence CSV.
    Sample(SampleArgs),
    /// Run the Birthday or Palindrome size sweep.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct Input {
    /// Program file.
    #[arg(long)]
    program: PathBuf,
    /// Ground query goal, e.g. `evidence(6)`.
    #[arg(long)]
    query: String,
    /// Ground evidence goal.
    #[arg(long)]
    evidence: Option<String>,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    input: Input,
    /// Diagram output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// DOT output file.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    timeout_s: Option<u64>,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Also print the probability as an exact fraction.
    #[arg(long)]
    rational: bool,
    /// Start from a diagram written by `compile` instead of the query.
    #[arg(long)]
    osdd: Option<PathBuf>,
    #[arg(long)]
    timeout_s: Option<u64>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "lw")]
    mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples between convergence rows.
    #[arg(long, default_value_t = 1000)]
    stride: u64,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timeout_s: Option<u64>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// `birthday` or `palindrome`.
    experiment: String,
    /// Output directory for the table CSV.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Timed repetitions per size; medians are reported.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Per-size time limit.
    #[arg(long, default_value_t = 600)]
    timeout_s: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Compile(a) => {
            let inputs = Inputs::load(&a.input.program, &a.input.query, a.input.evidence.as_deref())?;
            let (d, stats) = with_timeout(a.timeout_s, move || commands::compile(&inputs))?;
            if let Some(dot) = &a.dot {
                commands::write_file(dot, &d.to_dot())?;
            }
            let stats = serde_json::to_string(&stats)?;
            match &a.out {
                Some(path) => {
                    commands::write_file(path, &format!("{d}\n"))?;
                    writeln!(stdout, "{stats}")?;
                }
                None => {
                    writeln!(stdout, "{d}")?;
                    eprintln!("{stats}");
                }
            }
        }
        Command::Infer(a) => {
            let inputs = Inputs::load(&a.input.program, &a.input.query, a.input.evidence.as_deref())?;
            let (mode, rational, osdd) = (a.mode, a.rational, a.osdd.clone());
            let report = with_timeout(a.timeout_s, move || commands::infer(&inputs, mode, rational, osdd.as_deref()))?;
            writeln!(stdout, "{}", serde_json::to_string(&report)?)?;
        }
        Command::Sample(a) => {
            let mode = match a.mode {
                Mode::Lw => sampling::Mode::Lw,
                Mode::Independent => sampling::Mode::Independent,
                m => return Err(CliError::user(format!("mode `{}` is not a sampling mode; use lw or independent", m.name()))),
            };
            if a.samples == 0 {
                return Err(CliError::user("--samples must be at least 1"));
            }
            let inputs = Inputs::load(&a.input.program, &a.input.query, a.input.evidence.as_deref())?;
            let cfg = SampleConfig { stride: a.stride, ..SampleConfig::new(mode, a.samples, a.seed) };
            let (run, summary) = with_timeout(a.timeout_s, move || commands::sample(&inputs, &cfg))?;
            let summary_line = serde_json::to_string(&summary)?;
            match &a.out {
                Some(path) => {
                    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                        std::fs::create_dir_all(dir)?;
                    }
                    let file = std::fs::File::create(path)?;
                    commands::write_csv(file, &run, mode.name(), a.seed)?;
                    writeln!(stdout, "{summary_line}")?;
                }
                None => {
                    commands::write_csv(&mut stdout, &run, mode.name(), a.seed)?;
                    eprintln!("{summary_line}");
                }
            }
            if summary.estimate.is_none() {
                eprintln!("estimate undefined: no sample satisfied the evidence");
            }
        }
        Command::Reproduce(a) => {
            let exp: Experiment = a.experiment.parse()?;
            let cfg = ReproduceConfig { runs: a.runs, timeout_s: Some(a.timeout_s), ..ReproduceConfig::default() };
            let rows = reproduce::sweep(exp, &cfg)?;
            let path = reproduce::output_path(&a.out, exp);
            reproduce::write_rows(&path, &rows)?;
            write!(stdout, "{}", reproduce::render(exp, &rows))?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("osdd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(2),
    }
}
