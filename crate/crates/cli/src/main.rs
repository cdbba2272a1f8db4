use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use viscid_cli::config::ScenarioConfig;
use viscid_cli::tolerance::{Engine, Tolerances};
use viscid_cli::{compare_dir, exit, presets, run_scenario, CliError, ComparisonReport};

#[derive(Parser)]
#[command(name = "viscid", version, about = "Damped quantum wave packets: scenario runner and comparator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario with every requested engine and compare the engines.
    Run(RunArgs),
    /// Compare the engine outputs already present in a run directory.
    Compare {
        #[arg(long)]
        dir: PathBuf,
        /// Tolerance rules, one `engine:engine.quantity = bound` per line.
        #[arg(long)]
        tol: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario: fig1 to fig5.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// Scenario config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated engines overriding the scenario's list.
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<Engine>>,
    /// Number of Bohmian trajectories.
    #[arg(long)]
    traj: Option<usize>,
    /// Seed for random trajectory sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra tolerance rules, taking precedence over the scenario's.
    #[arg(long)]
    tol: Option<PathBuf>,
}

fn load_tolerances(path: &Option<PathBuf>) -> Result<Tolerances, CliError> {
    match path {
        None => Ok(Tolerances::default()),
        Some(p) => Ok(Tolerances::parse(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?),
    }
}

fn load_scenario(args: &RunArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), _) => presets::preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let name = path.file_stem().map_or("config".into(), |s| s.to_string_lossy().into_owned());
            ScenarioConfig::from_toml(&text, &name)?
        }
        (None, None) => unreachable!("clap requires --preset or --config"),
    };
    if let Some(engines) = &args.engines {
        cfg.set_engines(engines)?;
    }
    if let Some(n) = args.traj {
        cfg.trajectories.count = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        if let viscid_core::bohm::SamplingMode::Random { seed: s } = &mut cfg.trajectories.sampling {
            *s = seed;
        }
    }
    Ok(cfg)
}

fn summarize(report: &ComparisonReport) -> i32 {
    print!("{}", report.to_text());
    let failures = report.failures().count();
    if failures == 0 {
        println!("all {} comparisons within tolerance", report.entries.len());
        exit::PASS
    } else {
        println!("{failures} of {} comparisons exceed their tolerance", report.entries.len());
        exit::TOLERANCE
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load_scenario(&args)?;
            let extra = load_tolerances(&args.tol)?;
            let out = args
                .out
                .clone()
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("viscid-out").join(&cfg.name));
            log::info!("running {} into {}", cfg.name, out.display());
            let report = run_scenario(&cfg, &out, &extra)?;
            Ok(summarize(&report))
        }
        Command::Compare { dir, tol } => {
            let tolerances = load_tolerances(&tol)?;
            let report = compare_dir(&dir, &tolerances)?;
            Ok(summarize(&report))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors; help and version are not
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
