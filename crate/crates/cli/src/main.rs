use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use discop::bench::{self, ModeSpec, SweepSpec};
use discop::gen::{generate, GenParams};
use discop::io::{read_problem, write_problem};
use discop::kernel::ScheduleMode;
use discop::{solve, Algorithm, Error, Execution, RunConfig};

#[derive(Parser)]
#[command(
    name = "discop",
    version,
    about = "Generate, solve and benchmark DisCOP instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random Max-DisCSP instance.
    Gen(GenArgs),
    /// Solve one problem file and print a result record.
    Solve(SolveArgs),
    /// Run every algorithm over a grid of generated instances and write CSV.
    Sweep(SweepArgs),
    /// Aggregate sweep CSV into mean/median per (algorithm, p2).
    Summary(SummaryArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    p1: f64,
    #[arg(long)]
    p2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Highest violation cost; costs are drawn uniformly from 1..=max-cost.
    #[arg(long, default_value_t = 1)]
    max_cost: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Deterministic,
    Async,
    Threaded,
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value_t = Mode::Deterministic)]
    mode: Mode,
    /// Upper bound on the random per-message delay in async mode.
    #[arg(long, default_value_t = 0)]
    max_delay: u32,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, default_value = "afb")]
    alg: Algorithm,
    #[command(flatten)]
    mode: ModeArgs,
    /// Scheduler seed for async mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the message trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = discop::kernel::DEFAULT_MESSAGE_BUDGET)]
    message_budget: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    p1: f64,
    /// Comma-separated constraint tightness values.
    #[arg(long, value_delimiter = ',', required = true)]
    p2_list: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Comma-separated algorithms; all when omitted.
    #[arg(long, value_delimiter = ',')]
    algs: Vec<Algorithm>,
    #[command(flatten)]
    mode: ModeArgs,
    /// Base seed from which every instance seed is derived.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add a wall_ms column with per-run wall-clock time.
    #[arg(long)]
    timing: bool,
    /// Run sweep cells on the current thread only.
    #[arg(long)]
    sequential: bool,
    /// Leaf budget for the exact cross-check; 0 disables it.
    #[arg(long, default_value_t = discop::oracle::DEFAULT_BUDGET)]
    oracle_budget: u128,
}

#[derive(Args)]
struct SummaryArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write gnuplot data blocks, one index per algorithm.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn mode_spec(args: &ModeArgs) -> ModeSpec {
    match args.mode {
        Mode::Deterministic => ModeSpec::Deterministic,
        Mode::Async => ModeSpec::Async {
            max_delay: args.max_delay,
        },
        Mode::Threaded => ModeSpec::Threaded,
    }
}

fn run_gen(args: GenArgs) -> Result<()> {
    let params =
        GenParams::new(args.n, args.d, args.p1, args.p2, args.seed).with_max_cost(args.max_cost);
    let problem = generate(&params)?;
    let mut sink = output(args.out.as_deref())?;
    write_problem(&problem, &mut sink)?;
    sink.flush()?;
    Ok(())
}

fn run_solve(args: SolveArgs) -> Result<()> {
    let file = File::open(&args.problem)
        .with_context(|| format!("cannot open {}", args.problem.display()))?;
    let problem = read_problem(BufReader::new(file))?;
    let schedule = match args.mode.mode {
        Mode::Deterministic => ScheduleMode::Deterministic,
        Mode::Async => ScheduleMode::Async {
            seed: args.seed,
            max_delay: args.mode.max_delay,
        },
        Mode::Threaded => ScheduleMode::Threaded,
    };
    let config = RunConfig {
        trace: args.trace.is_some(),
        message_budget: args.message_budget,
        ..RunConfig::with_mode(schedule)
    };
    let report = solve(&problem, args.alg, &config)?;
    let assignment: Vec<String> = report
        .solution
        .values
        .iter()
        .map(|v| (v + 1).to_string())
        .collect();
    let m = &report.metrics;
    println!(
        "algorithm={} cost={} assignment={} nc_steps={} ncccs={} msgs_total={}",
        args.alg,
        report.solution.cost,
        assignment.join(","),
        m.nc_steps,
        m.ncccs,
        m.messages_total
    );
    if let (Some(path), Some(trace)) = (args.trace, report.trace) {
        let mut sink = output(Some(&path))?;
        write!(sink, "{trace}")?;
        sink.flush()?;
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let mut spec = SweepSpec::new(args.n, args.d, args.p1, args.p2_list, args.reps);
    spec.base_seed = args.seed;
    if !args.algs.is_empty() {
        spec.algorithms = args.algs;
    }
    spec.mode = mode_spec(&args.mode);
    spec.timing = args.timing;
    spec.oracle_budget = args.oracle_budget;
    if args.sequential {
        spec.execution = Execution::Sequential;
    }
    let rows = bench::run_sweep(&spec)?;
    let mut sink = output(args.out.as_deref())?;
    bench::write_csv(&rows, &mut sink)?;
    sink.flush()?;
    Ok(())
}

fn run_summary(args: SummaryArgs) -> Result<()> {
    let file =
        File::open(&args.input).with_context(|| format!("cannot open {}", args.input.display()))?;
    let rows = bench::read_csv(BufReader::new(file))?;
    let summary = bench::summarize(&rows);
    let mut sink = output(args.out.as_deref())?;
    bench::write_summary_csv(&summary, &mut sink)?;
    sink.flush()?;
    if let Some(path) = args.gnuplot {
        let mut sink = output(Some(&path))?;
        bench::write_gnuplot(&summary, &mut sink)?;
        sink.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Summary(a) => run_summary(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Disagreement { .. }) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
