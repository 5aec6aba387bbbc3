//! `gr1kit` command-line entry point.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 strategy hole,
//! 4 check failure, 5 capacity exceeded, 10 unrealizable.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use gr1kit::arena::{build_arena, ArenaError, GameArena};
use gr1kit::check::{
    check_recurrence, check_safety, lasso_check, verify_strategy_closure, LassoAdversary, Verdict,
};
use gr1kit::gr1::{brute_force_oracle, extract_strategy, is_realizable, solve_spec, OracleError, Strategy};
use gr1kit::randspec::{random_spec_seeded, RandomSpecConfig};
use gr1kit::sim::{
    parse_events, read_csv, run, standard_adversary, write_csv, AdversaryKind, EventSchedule, Interactive,
    RunOptions, SimError, Trace,
};
use gr1kit::speclang::{parse_spec, SpecDocument};
use gr1kit::workdelivery::{emit_spec_text, WorkDeliveryParams};

const EXIT_PARSE: u8 = 2;
const EXIT_HOLE: u8 = 3;
const EXIT_CHECK: u8 = 4;
const EXIT_CAPACITY: u8 = 5;
const EXIT_UNREALIZABLE: u8 = 10;

#[derive(Parser)]
#[command(name = "gr1kit", version, about = "GR(1) synthesis, simulation and checking toolkit")]
struct Cli {
    /// Print timings and sizes to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the work-delivery specification.
    Emit(EmitArgs),
    /// Solve a specification and write a strategy.
    Synth(SynthArgs),
    /// Run a strategy against an adversary and write a CSV trace.
    Simulate(SimulateArgs),
    /// Check a trace or a strategy against a specification.
    Check(CheckArgs),
    /// Compare the fixpoint solver with the parity-game reference.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct EmitArgs {
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter override, applied after the config file.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Output path (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    spec: PathBuf,
    /// Strategy output path (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    strategy: PathBuf,
    /// Specification used to enumerate legal environment moves.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "random")]
    adversary: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 180)]
    steps: usize,
    #[arg(long)]
    events: Option<PathBuf>,
    /// Seconds per step in the trace.
    #[arg(long, default_value_t = 10)]
    td: u32,
    /// Sleep one step duration between steps.
    #[arg(long)]
    pace: bool,
    /// Independent runs; run k uses seed + k. Requires --output as a directory when above 1.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// CSV output path (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckMode {
    Safety,
    Recurrence,
    Lasso,
    Closure,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    spec: PathBuf,
    /// CSV trace (safety, recurrence).
    #[arg(long, conflicts_with = "strategy")]
    trace: Option<PathBuf>,
    /// Strategy file (lasso, closure).
    #[arg(long)]
    strategy: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: CheckMode,
    /// Recurrence window in steps.
    #[arg(long)]
    window: Option<usize>,
    /// Lasso adversary: all, min-bl or max-bl.
    #[arg(long, default_value = "all")]
    adversary: String,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Specification to compare (omit to use a random corpus).
    spec: Option<PathBuf>,
    /// Size of the random corpus.
    #[arg(long, default_value_t = 100)]
    random: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    max_states: u64,
    #[arg(long, default_value_t = 2)]
    max_goals: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl ToString) -> Failure {
        Failure::new(EXIT_PARSE, message.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::new(1, e.to_string())
    }
}

impl From<ArenaError> for Failure {
    fn from(e: ArenaError) -> Failure {
        Failure::new(EXIT_CAPACITY, e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Emit(a) => cmd_emit(a),
        Command::Synth(a) => cmd_synth(a, cli.verbose),
        Command::Simulate(a) => cmd_simulate(a, cli.verbose),
        Command::Check(a) => cmd_check(a),
        Command::Oracle(a) => cmd_oracle(a, cli.verbose),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(1, format!("{}: {e}", p.display()))),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn load_spec(path: &Path) -> Result<SpecDocument, Failure> {
    parse_spec(&read(path)?).map_err(|d| Failure::usage(format!("{}: {d}", path.display())))
}

fn load_strategy(path: &Path) -> Result<Strategy, Failure> {
    Strategy::from_json_str(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_emit(a: EmitArgs) -> CmdResult {
    let mut params = WorkDeliveryParams::default();
    if let Some(path) = &a.config {
        params.apply_config(&read(path)?).map_err(Failure::usage)?;
    }
    for kv in &a.params {
        params.apply_assignment(kv).map_err(Failure::usage)?;
    }
    let text = emit_spec_text(&params).map_err(Failure::usage)?;
    write_output(a.output.as_deref(), &text)?;
    Ok(0)
}

fn cmd_synth(a: SynthArgs, verbose: bool) -> CmdResult {
    let doc = load_spec(&a.spec)?;
    let start = Instant::now();
    let arena = build_arena(&doc)?;
    let result = solve_spec(&arena);
    let realizable = is_realizable(&result, &arena);
    eprintln!(
        "{}: {} ({} states, {} winning, {:.3} s)",
        a.spec.display(),
        if realizable { "realizable" } else { "unrealizable" },
        arena.num_states(),
        result.winning.count_ones(..),
        start.elapsed().as_secs_f64()
    );
    if verbose {
        eprintln!("edges: {}, outer iterations: {}", arena.num_edges(), result.z_iterations);
    }
    if !realizable {
        return Ok(EXIT_UNREALIZABLE);
    }
    let strategy = extract_strategy(&result, &arena).map_err(|e| Failure::new(1, e.to_string()))?;
    if verbose {
        eprintln!("strategy nodes: {}", strategy.nodes.len());
    }
    write_output(a.output.as_deref(), &strategy.to_json_string())?;
    Ok(0)
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::StrategyHole { .. } | SimError::NoInitialMove => Failure::new(EXIT_HOLE, e.to_string()),
        SimError::VarMismatch => Failure::usage(e),
        _ => Failure::new(1, e.to_string()),
    }
}

fn trace_csv(trace: &Trace) -> Result<String, Failure> {
    let mut out = Vec::new();
    write_csv(trace, &mut out).map_err(|e| Failure::new(1, e.to_string()))?;
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

fn cmd_simulate(a: SimulateArgs, verbose: bool) -> CmdResult {
    let kind = AdversaryKind::parse(&a.adversary)
        .ok_or_else(|| Failure::usage(format!("unknown adversary `{}`", a.adversary)))?;
    if a.runs == 0 {
        return Err(Failure::usage("--runs must be positive"));
    }
    if a.runs > 1 && (kind == AdversaryKind::Interactive || a.output.is_none()) {
        return Err(Failure::usage("--runs above 1 needs --output <dir> and a non-interactive adversary"));
    }
    let strategy = load_strategy(&a.strategy)?;
    let arena: Option<GameArena> = match &a.spec {
        Some(p) => {
            let doc = load_spec(p)?;
            if doc.vars != strategy.vars {
                return Err(Failure::usage("strategy and specification declare different variables"));
            }
            Some(build_arena(&doc)?)
        }
        None => None,
    };
    let schedule = match &a.events {
        Some(p) => EventSchedule::new(
            &parse_events(&read(p)?).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        ),
        None => EventSchedule::default(),
    };
    let opts = RunOptions {
        max_steps: a.steps,
        schedule,
        arena: arena.as_ref(),
        td_seconds: a.td,
        pace: a.pace.then(|| Duration::from_secs(u64::from(a.td))),
    };

    if kind == AdversaryKind::Interactive {
        let stdin = io::stdin();
        let mut adversary = Interactive::new(stdin.lock(), io::stderr());
        let trace = run(&strategy, &mut adversary, &opts).map_err(sim_failure)?;
        write_output(a.output.as_deref(), &trace_csv(&trace)?)?;
        return Ok(0);
    }

    let start = Instant::now();
    let traces: Vec<Result<Trace, SimError>> = (0..a.runs)
        .into_par_iter()
        .map(|k| {
            let seed = a.seed.wrapping_add(k as u64);
            let mut adversary = standard_adversary(kind, seed, &opts.schedule).expect("non-interactive adversary");
            run(&strategy, adversary.as_mut(), &opts)
        })
        .collect();
    if verbose {
        eprintln!("{} runs in {:.3} s", a.runs, start.elapsed().as_secs_f64());
    }
    if a.runs == 1 {
        let trace = traces.into_iter().next().unwrap().map_err(sim_failure)?;
        write_output(a.output.as_deref(), &trace_csv(&trace)?)?;
        return Ok(0);
    }
    let dir = a.output.as_deref().unwrap();
    fs::create_dir_all(dir)?;
    let mut first_error = None;
    for (k, t) in traces.into_iter().enumerate() {
        match t {
            Ok(trace) => fs::write(dir.join(format!("run_{k:04}.csv")), trace_csv(&trace)?)?,
            Err(e) => {
                eprintln!("run {k} (seed {}): {e}", a.seed.wrapping_add(k as u64));
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) => Err(sim_failure(e)),
        None => Ok(0),
    }
}

fn print_verdict(v: &Verdict, json: bool) {
    if json {
        println!("{}", v.to_json());
    } else {
        print!("{}", v.report());
    }
}

fn cmd_check(a: CheckArgs) -> CmdResult {
    let doc = load_spec(&a.spec)?;
    let verdict = match a.mode {
        CheckMode::Safety | CheckMode::Recurrence => {
            let path = a.trace.as_ref().ok_or_else(|| Failure::usage("this mode needs --trace"))?;
            let trace = read_csv(&read(path)?, &doc).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            if a.mode == CheckMode::Safety {
                check_safety(&trace, &doc)
            } else {
                let window = a.window.filter(|w| *w > 0).ok_or_else(|| Failure::usage("recurrence needs --window > 0"))?;
                let mut violations = Vec::new();
                for goal in &doc.sys_liveness {
                    violations.extend(check_recurrence(&trace, goal, &doc.show(goal), window).violations);
                }
                Verdict::from_violations(violations)
            }
        }
        CheckMode::Lasso | CheckMode::Closure => {
            let path = a.strategy.as_ref().ok_or_else(|| Failure::usage("this mode needs --strategy"))?;
            let strategy = load_strategy(path)?;
            if a.mode == CheckMode::Closure {
                verify_strategy_closure(&strategy, &build_arena(&doc)?)
            } else {
                let adversary = match a.adversary.as_str() {
                    "all" => LassoAdversary::AllMoves,
                    other => {
                        let kind = AdversaryKind::parse(other)
                            .ok_or_else(|| Failure::usage(format!("unknown adversary `{other}`")))?;
                        LassoAdversary::try_from(kind).map_err(Failure::usage)?
                    }
                };
                lasso_check(&strategy, adversary, &doc).map_err(Failure::usage)?
            }
        }
    };
    print_verdict(&verdict, a.json);
    Ok(if verdict.passed { 0 } else { EXIT_CHECK })
}

/// Compare both solvers on one arena; `Ok(false)` on disagreement.
fn compare(arena: &GameArena) -> Result<bool, OracleError> {
    let reference = brute_force_oracle(arena)?;
    let fast = solve_spec(arena);
    Ok(fast.winning == reference.winning && fast.realizable == reference.realizable)
}

fn cmd_oracle(a: OracleArgs, verbose: bool) -> CmdResult {
    let capacity = |e: OracleError| Failure::new(EXIT_CAPACITY, e.to_string());
    if let Some(path) = &a.spec {
        let arena = build_arena(&load_spec(path)?)?;
        let equal = compare(&arena).map_err(capacity)?;
        println!("{}: {}", path.display(), if equal { "equal" } else { "MISMATCH" });
        return Ok(if equal { 0 } else { EXIT_CHECK });
    }
    let cfg = RandomSpecConfig {
        max_states: a.max_states,
        max_goals: a.max_goals,
        ..Default::default()
    };
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for k in 0..a.random {
        let seed = a.seed.wrapping_add(k);
        let arena = build_arena(&random_spec_seeded(seed, cfg))?;
        if !compare(&arena).map_err(capacity)? {
            mismatches.push(seed);
        }
    }
    if verbose {
        eprintln!("{:.3} s", start.elapsed().as_secs_f64());
    }
    if mismatches.is_empty() {
        println!("{} random arenas: all equal", a.random);
        Ok(0)
    } else {
        println!("{} of {} random arenas differ, seeds {:?}", mismatches.len(), a.random, mismatches);
        Ok(EXIT_CHECK)
    }
}
