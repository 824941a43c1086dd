use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cbf_swarm::io::{self, RunConfig};
use cbf_swarm::sim::{self, CIRCLE_SCENARIO, ONE_D_SCENARIO, TABLE_GAMMAS};
use cbf_swarm::{CbfError, Result, StrategyKind};

const EXIT_INVALID: u8 = 2;
const EXIT_FATAL: u8 = 3;

/// Decentralized barrier-function collision avoidance experiments.
///
/// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 simulation
/// aborted.
#[derive(Parser)]
#[command(name = "cbf-swarm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace.
    Run(RunArgs),
    /// Run perturbed trials of one strategy over one or more gammas.
    Batch(BatchArgs),
    /// Run every strategy over the table gammas and tabulate no-solution trials.
    Table3(Table3Args),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: one_d_three_robots or circle_20.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// symmetric, previous or proposed.
    #[arg(long)]
    strategy: Option<StrategyKind>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Robot whose input interval is written for 1D runs.
    #[arg(long, default_value_t = 1)]
    robot: usize,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    strategy: Option<StrategyKind>,
    /// Repeat to sweep several values; defaults to the scenario's gamma.
    #[arg(long)]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Args)]
struct Table3Args {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

fn resolve(common: &Common, default_scenario: &str) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => io::read_config(path)?,
        None => RunConfig::named(common.scenario.as_deref().unwrap_or(default_scenario)),
    };
    if let (Some(_), Some(name)) = (&common.config, &common.scenario) {
        config.scenario = io::ScenarioSource::Named(name.clone());
    }
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    if common.out.is_some() {
        config.output = common.out.clone();
    }
    Ok(config)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let mut config = resolve(&args.common, ONE_D_SCENARIO)?;
    config.strategy = args.strategy.or(config.strategy);
    config.gamma = args.gamma.or(config.gamma);
    let scenario = config.scenario()?;
    let out = config.output_dir();
    let trace = sim::run_scenario(&scenario)?;

    if config.emit.trace {
        io::export_trace(&trace, &out.join("trace.csv"))?;
        if scenario.dim() == 1 {
            io::export_feasible_bounds(&trace, args.robot, &out.join("bounds.csv"))?;
        }
    }
    if config.emit.margins {
        io::export_margins(&trace, &out.join("margins.csv"))?;
    }
    let summary = serde_json::json!({
        "scenario": scenario.name,
        "strategy": scenario.strategy,
        "gamma": scenario.cbf.gamma,
        "steps": trace.records.len(),
        "no_solution_steps": trace.no_solution_steps,
        "first_infeasible_time": trace.first_infeasible_time,
        "min_constraint_lhs": trace.min_constraint_lhs(),
        "min_pair_distance": trace.min_pair_distance(),
    });
    if config.emit.report {
        io::export_json(&summary, &out.join("summary.json"))?;
    }
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(ExitCode::SUCCESS)
}

fn write_report(config: &RunConfig, report: &sim::BatchReport, dt: f64) -> Result<ExitCode> {
    let out = config.output_dir();
    if config.emit.report {
        io::export_json(report, &out.join("report.json"))?;
        io::export_report_csv(report, &out.join("table.csv"))?;
        io::export_trials_csv(report, &out.join("trials.csv"))?;
        write_text(&out.join("table.md"), &io::table3_markdown(report))?;
    }
    if config.emit.trace {
        io::export_min_lhs_series(report, dt, &out.join("min_lhs.csv"))?;
    }
    print!("{}", io::table3_markdown(report));
    let fatal: usize = report.cells.iter().map(|c| c.fatal_trials).sum();
    if fatal > 0 {
        let first = report
            .cells
            .iter()
            .flat_map(|c| c.summaries.iter())
            .find_map(|s| s.fatal.clone())
            .unwrap_or_default();
        eprintln!("{fatal} trial(s) aborted; first: {first}");
        return Ok(ExitCode::from(EXIT_FATAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CbfError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CbfError::io(path, e))
}

fn cmd_batch(args: BatchArgs) -> Result<ExitCode> {
    let mut config = resolve(&args.common, CIRCLE_SCENARIO)?;
    config.strategy = args.strategy.or(config.strategy);
    let scenario = config.scenario()?;
    let gammas = if args.gamma.is_empty() { vec![scenario.cbf.gamma] } else { args.gamma };
    let report = sim::run_batch(&scenario, args.trials, &gammas)?;
    write_report(&config, &report, scenario.dt)
}

fn cmd_table3(args: Table3Args) -> Result<ExitCode> {
    let mut config = resolve(&args.common, CIRCLE_SCENARIO)?;
    config.seed = config.seed.or(Some(42));
    let scenario = config.scenario()?;
    let gammas = if args.gamma.is_empty() { TABLE_GAMMAS.to_vec() } else { args.gamma };
    let report = sim::run_table3(&scenario, args.trials, &gammas)?;
    write_report(&config, &report, scenario.dt)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Table3(a) => cmd_table3(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CbfError::Fatal { .. } => ExitCode::from(EXIT_FATAL),
                e if e.is_validation() => ExitCode::from(EXIT_INVALID),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
