use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use unsat_cache::harness::{
    emit_report, generate_synthetic_suite, render_report, run_suite, ConfigEcho, GenParams, Mode, ReportFormat,
    RunConfig, SuiteReport,
};
use unsat_cache::smtlib::load_suite;
use unsat_cache::solver::{InputMode, ProcessSolver, ScriptedOracle, Solver};
use unsat_cache::StrategyConfig;

#[derive(Parser)]
#[command(name = "unsat-cache", version, about = "Replay SMT suites through an unsat-core cache")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run suites through cache and solver and report metrics.
    Run(RunArgs),
    /// Write a synthetic suite with an oracle manifest.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

impl OnOff {
    fn on(self) -> bool {
        matches!(self, OnOff::On)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Cachealot,
    Utopia,
    Nocache,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputArg {
    Stdin,
    File,
}

#[derive(Args)]
struct RunArgs {
    /// Suite directory; repeat for several suites, each with its own store.
    #[arg(long, required = true)]
    suite: Vec<PathBuf>,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "on")]
    canonize: OnOff,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    bloom_bits: u64,
    #[arg(long, value_enum, default_value = "on")]
    o1: OnOff,
    #[arg(long, value_enum, default_value = "on")]
    o2: OnOff,
    #[arg(long, value_enum, default_value = "on")]
    o3: OnOff,
    #[arg(long, default_value_t = 100)]
    lookup_timeout_ms: u64,
    /// Solver command line, e.g. "z3 -in".
    #[arg(long, conflicts_with = "oracle", required_unless_present = "oracle")]
    solver_cmd: Option<String>,
    /// How the query reaches the solver command.
    #[arg(long, value_enum, default_value = "stdin")]
    solver_input: InputArg,
    /// JSON manifest of scripted results keyed by suite-relative path.
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    solver_timeout_ms: u64,
    /// Re-solve every cache hit and report unconfirmed ones.
    #[arg(long)]
    audit: bool,
    /// Report destination; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    files: usize,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> Result<bool> {
    let mode = match args.mode {
        ModeArg::Cachealot => Mode::Cachealot,
        ModeArg::Utopia => Mode::Utopia,
        ModeArg::Nocache => Mode::NoCache,
    };
    let cfg = RunConfig {
        mode,
        strategy: StrategyConfig {
            canonize: args.canonize.on(),
            bloom_bits: args.bloom_bits as usize,
            o1: args.o1.on(),
            o2: args.o2.on(),
            o3: args.o3.on(),
            lookup_deadline: Duration::from_millis(args.lookup_timeout_ms),
            ..StrategyConfig::cachealot()
        },
        solver_timeout: Duration::from_millis(args.solver_timeout_ms),
        audit: args.audit,
    };
    let (solver, label): (Box<dyn Solver>, String) = match (&args.solver_cmd, &args.oracle) {
        (Some(cmd), None) => {
            let input = match args.solver_input {
                InputArg::Stdin => InputMode::Stdin,
                InputArg::File => InputMode::TempFile,
            };
            (Box::new(ProcessSolver::from_command(cmd, input)?), cmd.clone())
        }
        (None, Some(path)) => (Box::new(ScriptedOracle::load(path)?), format!("oracle:{}", path.display())),
        _ => bail!("exactly one of --solver-cmd and --oracle is required"),
    };

    let mut reports = Vec::new();
    let mut unsound = false;
    for dir in &args.suite {
        let suite = load_suite(dir).with_context(|| format!("loading suite {}", dir.display()))?;
        let result = run_suite(&suite, &cfg, solver.as_ref()).with_context(|| format!("running suite {}", suite.id))?;
        let m = &result.metrics;
        eprintln!(
            "{}: {} formulae, {} sat, {} unsat, {} unknown, {} cache hits ({:.2}% of unsat), {} timeouts",
            m.suite_id, m.formula_count, m.sat_count, m.unsat_count, m.unknown_count, m.cache_hits, m.unsat_reuse_ratio, m.timeout_misses
        );
        for f in &result.findings {
            let kind = if f.unsound { "UNSOUND" } else { "unconfirmed" };
            eprintln!("  audit {kind}: {} (core {}, {}) solver says {}", f.path, f.core_id, f.substitution, f.solver_status);
        }
        unsound |= result.has_unsound_hits();
        reports.push(SuiteReport { metrics: result.metrics, config: ConfigEcho::new(&cfg, label.clone()) });
    }
    let format = match args.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
    };
    match &args.report {
        Some(path) => emit_report(&reports, format, path)?,
        None => print!("{}", render_report(&reports, format)?),
    }
    Ok(unsound)
}

fn gen(args: GenArgs) -> Result<()> {
    let files = generate_synthetic_suite(args.seed, &GenParams::with_files(args.files), &args.out)?;
    eprintln!("wrote {} files and oracle manifest to {}", files.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Gen(args) => gen(args).map(|()| false),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
