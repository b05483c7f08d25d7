use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covplan::experiment::{compare_runs, run_experiment, ExperimentConfig, ExperimentError};
use covplan::simulator::PlannerKind;

/// Adaptive-range coverage planning experiments.
#[derive(Parser)]
#[command(name = "covplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run missions for every planner and seed, writing logs and a report.
    Run(RunArgs),
    /// Compare completed run directories.
    Compare {
        #[arg(required = true, num_args = 1..)]
        dirs: Vec<PathBuf>,
    },
    /// Print the default config.
    Config,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    map: Option<String>,
    /// Comma-separated planners: adaptive, lf4, lf8, decoupled.
    #[arg(long, value_delimiter = ',')]
    planner: Vec<PlannerKind>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    /// Override one config value, e.g. `--set planner.max_depth=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Dump a PPM map frame every N steps.
    #[arg(long)]
    frames: Option<usize>,
}

fn resolve(args: RunArgs) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path, &args.set)?,
        None => ExperimentConfig::parse_with("", &args.set)?,
    };
    if let Some(map) = args.map {
        cfg.experiment.map = map;
    }
    if !args.planner.is_empty() {
        cfg.experiment.planners = args.planner;
    }
    if !args.seeds.is_empty() {
        cfg.experiment.seeds = args.seeds;
    }
    if let Some(steps) = args.steps {
        cfg.mission.step_limit = steps;
    }
    if let Some(out) = args.out {
        cfg.experiment.out = out;
    }
    if let Some(frames) = args.frames {
        cfg.experiment.frames = frames;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => resolve(args).and_then(|cfg| run_experiment(&cfg)).map(|out| {
            print!("{}", out.report.to_table());
            println!("wrote {}", out.out_dir.display());
        }),
        Command::Compare { dirs } => compare_runs(&dirs).map(|r| print!("{}", r.to_table())),
        Command::Config => {
            print!("{}", ExperimentConfig::default().to_text());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("covplan: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
