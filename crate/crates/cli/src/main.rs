//! `temgrid`: load, price, build, solve, verify and report community schedules.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use temgrid_core::domain::{validate_scenario, CommunityScenario, TimeGrid};
use temgrid_core::ev_contract::CompensationMode;
use temgrid_core::model::{build, write_lp, RunMode, TerminalSoc};
use temgrid_core::reporting::{export_dispatch_csv, export_prices_csv, fixed, summarize};
use temgrid_core::scenario_io::{load_scenario_seeded, parse_scenario_str, sample_sessions, EVRequestStats};
use temgrid_core::solver::{solve, verify, DispatchSolution};
use temgrid_core::tariff::{price_community, CommunityPrices};
use temgrid_core::Error;

#[derive(Parser)]
#[command(name = "temgrid", version, about = "Day-ahead scheduling for energy communities with batteries and EV parking")]
struct Cli {
    /// Increase log detail (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and list every violation.
    Validate { scenario: PathBuf },
    /// Print the community tariffs of each step.
    Price {
        scenario: PathBuf,
        /// Also write prices.csv into this directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve the requested modes and write cost tables and dispatch series.
    Run(RunArgs),
    /// Sample EV parking sessions and print them as JSON.
    SampleEvs(SampleArgs),
    /// Write the model of one mode in LP text format.
    DumpLp {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Community)]
        mode: Mode,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Baseline,
    Individual,
    Community,
}

impl From<Mode> for RunMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Baseline => RunMode::Baseline,
            Mode::Individual => RunMode::Individual,
            Mode::Community => RunMode::Community,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Compensation {
    PaperLiteral,
    RoundTrip,
}

#[derive(Clone, Copy, ValueEnum)]
enum Terminal {
    Free,
    Restore,
}

#[derive(Args)]
struct ModelArgs {
    /// Override the EV sampling seeds of the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    compensation: Option<Compensation>,
    /// Price flows with the net-load residual form instead of explicit grid flows.
    #[arg(long)]
    eq2_verbatim: bool,
    #[arg(long, value_enum)]
    terminal_soc: Option<Terminal>,
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Mode::Baseline, Mode::Individual, Mode::Community])]
    modes: Vec<Mode>,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    comp_tol: Option<f64>,
    #[arg(long)]
    feas_tol: Option<f64>,
    /// Wall-clock limit per mode in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 30)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    step_hours: f64,
    #[arg(long, default_value_t = 24)]
    steps: usize,
    #[arg(long, default_value_t = 0.0)]
    start_hour: f64,
    /// JSON file with parking, charging, discharging and start statistics.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Validation(_) | Error::Domain(_) | Error::Build(_) | Error::ContractViolation(_) => 1,
            Error::Limit { .. } | Error::NotOptimal(_) | Error::Numerical { .. } => 2,
            Error::CostMismatch { .. } | Error::ModeMismatch(_) => 2,
            Error::Io { .. } | Error::Parse { .. } => 3,
        };
        let message = match e {
            Error::Validation(v) => {
                let lines: Vec<String> = v.iter().map(|x| format!("  {x}")).collect();
                format!("scenario is invalid:\n{}", lines.join("\n"))
            }
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult = Result<u8, Failure>;

fn load(path: &Path, model: &ModelArgs) -> Result<CommunityScenario, Failure> {
    let mut s = load_scenario_seeded(path, model.seed)?;
    let m = &mut s.options.model;
    if let Some(c) = model.compensation {
        m.compensation = match c {
            Compensation::PaperLiteral => CompensationMode::PaperLiteral,
            Compensation::RoundTrip => CompensationMode::RoundTrip,
        };
    }
    if model.eq2_verbatim {
        m.eq2_verbatim = true;
    }
    if let Some(t) = model.terminal_soc {
        m.terminal_soc = match t {
            Terminal::Free => TerminalSoc::Free,
            Terminal::Restore => TerminalSoc::Restore,
        };
    }
    Ok(s)
}

fn validate(path: &Path) -> CliResult {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let s = parse_scenario_str(&text, base).map_err(|e| match e {
        Error::Parse { message, .. } => Failure {
            code: 3,
            message: format!("{}: {message}", path.display()),
        },
        other => other.into(),
    })?;
    let violations = validate_scenario(&s);
    if violations.is_empty() {
        let sessions: usize = s.buildings.iter().map(|b| b.sessions.len()).sum();
        println!(
            "ok: {} buildings, {} steps of {} h, {sessions} EV sessions",
            s.buildings.len(),
            s.time.steps,
            s.time.step_hours
        );
        Ok(0)
    } else {
        Err(Error::Validation(violations).into())
    }
}

fn price_table(prices: &CommunityPrices) -> String {
    let mut out = format!("{:>4}  {:>8}  {:>14}  {:>14}\n", "step", "ratio", "C_EC EUR/MWh", "C_IC EUR/MWh");
    for h in 0..prices.steps() {
        out.push_str(&format!(
            "{h:>4}  {:>8.4}  {:>14.3}  {:>14.3}\n",
            prices.surplus_ratio[h],
            prices.export_eur_per_kwh[h] * 1e3,
            prices.import_eur_per_kwh[h] * 1e3
        ));
    }
    out
}

fn price(path: &Path, out: Option<&Path>) -> CliResult {
    let s = load_scenario_seeded(path, None)?;
    let prices = price_community(&s)?;
    print!("{}", price_table(&prices));
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        export_prices_csv(&prices, dir.join("prices.csv"))?;
    }
    Ok(0)
}

fn run(args: &RunArgs) -> CliResult {
    let mut modes: Vec<RunMode> = Vec::new();
    for m in &args.modes {
        let m = RunMode::from(*m);
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    if modes.is_empty() {
        return Err(Failure {
            code: 3,
            message: "--modes needs at least one mode".into(),
        });
    }
    modes.sort();
    let mut scenario = load(&args.scenario, &args.model)?;
    let solver = &mut scenario.options.solver;
    if let Some(t) = args.comp_tol {
        solver.comp_tol = t;
    }
    if let Some(t) = args.feas_tol {
        solver.feas_tol = t;
    }
    if args.time_limit.is_some() {
        solver.time_limit_seconds = args.time_limit;
    }
    let scenario = scenario;
    let prices = price_community(&scenario)?;

    let results: Vec<Result<DispatchSolution, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = modes
            .iter()
            .map(|&mode| {
                let (scenario, prices) = (&scenario, &prices);
                scope.spawn(move || {
                    let model = build(scenario, prices, mode)?;
                    let solution = solve(&model, &scenario.options.solver)?;
                    let report = verify(&model, &solution, scenario.options.solver.comp_tol);
                    let failures = report.failures(1e-6);
                    if !failures.is_empty() {
                        warn!("{mode}: verification flagged {}", failures.join(", "));
                    }
                    info!(
                        "{mode}: objective {:.6} EUR, {} nodes, {} LP iterations",
                        solution.objective_eur, solution.nodes, solution.lp_iterations
                    );
                    Ok(solution)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let solutions: Vec<DispatchSolution> = results.into_iter().collect::<Result<_, _>>()?;

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    for s in &solutions {
        export_dispatch_csv(s, out.join(format!("dispatch_{}.csv", s.mode)))?;
    }
    export_prices_csv(&prices, out.join("prices.csv"))?;
    let refs: Vec<&DispatchSolution> = solutions.iter().collect();
    let table = summarize(&scenario, &prices, &refs)?;
    let text = table.to_text();
    let write = |name: &str, body: &str| {
        let path = out.join(name);
        fs::write(&path, body).map_err(|e| io_failure(&path, e))
    };
    write("costs.txt", &text)?;
    write("costs.json", &(table.to_json()? + "\n"))?;
    print!("{text}");

    let limited: Vec<String> = solutions
        .iter()
        .filter(|s| s.limit_reached)
        .map(|s| format!("{} (gap {} EUR)", s.mode, fixed(s.objective_eur - s.best_bound_eur)))
        .collect();
    if limited.is_empty() {
        Ok(0)
    } else {
        eprintln!("search limit reached before optimality was proven: {}", limited.join(", "));
        Ok(2)
    }
}

fn sample_evs(args: &SampleArgs) -> CliResult {
    let stats = match &args.stats {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            serde_json::from_str::<EVRequestStats>(&text).map_err(|e| io_failure(path, e))?
        }
        None => EVRequestStats::default(),
    };
    let time = TimeGrid::new(args.step_hours, args.steps, args.start_hour);
    let sessions = sample_sessions(&stats, args.count, args.seed, &time)?;
    let json = serde_json::to_string_pretty(&sessions).expect("sessions serialize") + "\n";
    match &args.out {
        Some(path) => fs::write(path, json).map_err(|e| io_failure(path, e))?,
        None => print!("{json}"),
    }
    Ok(0)
}

fn dump_lp(path: &Path, mode: Mode, out: Option<&Path>, model_args: &ModelArgs) -> CliResult {
    let s = load(path, model_args)?;
    let prices = price_community(&s)?;
    let model = build(&s, &prices, mode.into())?;
    let text = write_lp(&model);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Validate { scenario } => validate(scenario),
        Command::Price { scenario, out } => price(scenario, out.as_deref()),
        Command::Run(args) => run(args),
        Command::SampleEvs(args) => sample_evs(args),
        Command::DumpLp {
            scenario,
            mode,
            out,
            model,
        } => dump_lp(scenario, *mode, out.as_deref(), model),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
