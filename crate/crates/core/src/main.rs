use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ulab::harness::{self, ReportFormat, RunConfig, RunOptions, Suite};
use ulab::{GridSpec, StateSpec};

#[derive(Parser)]
#[command(name = "ulab", version, about = "Numeric and symbolic checks for time and energy operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a report.
    Verify {
        /// Suite to run; defaults to the suites listed in the config.
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[arg(long)]
        config: PathBuf,
        /// Report destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
        /// Write null wall times so reports can be compared byte for byte.
        #[arg(long)]
        no_timings: bool,
        /// Suppress progress lines on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Exact operator algebra.
    Symbolic {
        #[command(subcommand)]
        command: SymbolicCommand,
    },
    /// Expectation and variance of an expression on one state.
    Eval {
        #[arg(long)]
        expr: String,
        /// State as JSON, e.g. '{"family":"gaussian","p0":[3,0,0],"sigma":0.5}'.
        #[arg(long)]
        state: String,
        #[arg(long = "t", allow_negative_numbers = true)]
        t: f64,
        /// Grid as `n,L` or `n,L,hbar`; the reference grid when absent.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Tabulate uncertainty quantities over states × t as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, short)]
        quiet: bool,
    },
}

#[derive(Subcommand)]
enum SymbolicCommand {
    /// Print the normal form of an expression.
    Reduce {
        #[arg(long, required_unless_present = "expr_file", conflicts_with = "expr_file")]
        expr: Option<String>,
        #[arg(long)]
        expr_file: Option<PathBuf>,
    },
}

/// Failure carrying the process exit code.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(2, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ULAB_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("ULAB_THREADS must be a nonnegative integer, got '{raw}'"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure(2, format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_grid(text: &str) -> Result<GridSpec, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Failure(2, format!("grid must be 'n,L' or 'n,L,hbar', got '{text}'"));
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let n = parts[0].parse().map_err(|_| bad())?;
    let l = parts[1].parse().map_err(|_| bad())?;
    let hbar = parts.get(2).map_or(Ok(1.0), |h| h.parse()).map_err(|_| bad())?;
    Ok(GridSpec::new(n, l, hbar)?)
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Verify { suite, config, out, format, no_timings, quiet } => {
            let cfg = RunConfig::load(&config)?;
            let suites = suite.map_or_else(|| cfg.suites.clone(), |s| vec![s]);
            let opts = RunOptions { timings: !no_timings, progress: !quiet };
            let reports = harness::run_suites(&cfg, &suites, &opts)?;
            let dest = out.or_else(|| cfg.output.as_ref().map(|o| o.path.clone()));
            let format = format.or_else(|| cfg.output.as_ref().map(|o| o.format)).unwrap_or_default();
            let mut w = open_output(dest.as_deref())?;
            harness::write_reports(&reports, format, &mut w)?;
            w.flush()?;
            let failed = reports.iter().filter(|r| !r.pass).count();
            if !quiet {
                eprintln!("{} checks, {} failed", reports.len(), failed);
            }
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Symbolic { command: SymbolicCommand::Reduce { expr, expr_file } } => {
            let text = match (expr, expr_file) {
                (Some(e), _) => e,
                (None, Some(p)) => std::fs::read_to_string(&p)
                    .map_err(|e| Failure(2, format!("cannot read {}: {e}", p.display())))?,
                (None, None) => return Err(Failure(2, "either --expr or --expr-file is required".into())),
            };
            let normal = ulab::dsl::reduce(&text).map_err(|e| Failure(2, e))?;
            println!("{normal}");
            Ok(0)
        }
        Command::Eval { expr, state, t, grid } => {
            let spec: StateSpec =
                serde_json::from_str(&state).map_err(|e| Failure(2, format!("invalid state JSON: {e}")))?;
            let grid = grid.as_deref().map_or(Ok(GridSpec::reference()), parse_grid)?;
            let r = harness::eval_expression(&expr, &spec, &grid, t)?;
            println!("expectation: {:e}", r.expectation);
            println!("variance: {:e}", r.variance);
            println!("imaginary_leak: {:e}", r.imaginary_leak);
            Ok(0)
        }
        Command::Sweep { config, out, quiet } => {
            let cfg = RunConfig::load(&config)?;
            let rows = harness::sweep_table(&cfg, &RunOptions { timings: false, progress: !quiet })?;
            let w = open_output(Some(&out))?;
            harness::write_sweep_csv(&rows, w)?;
            Ok(0)
        }
    }
}
