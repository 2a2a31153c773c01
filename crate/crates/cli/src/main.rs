//! `hub-integrity` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 config error, 3 runtime error.
//! Failures print a single `error[<kind>]: <message>` line on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hub_integrity::figures::{reproduce_figure, FigureId, FigureOptions};
use hub_integrity::harness::parse_values;
use hub_integrity::output::{output_dir, sweep_csv, write_file, write_replications};
use hub_integrity::{run_scenario, sweep, Error, Execution, ScenarioConfig, SweepAxis};

#[derive(Debug, Parser)]
#[command(name = "hub-integrity", version, about = "Simulate and score IoT hub data integrity under manipulation attacks")]
struct Cli {
    /// Print the files written.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every replication of a scenario and write one CSV per replication.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
    },
    /// Sweep one parameter and write a summary CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
        /// p_a, p_detect, w2, lambda, gamma, rho or omega.
        #[arg(long)]
        axis: String,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        values: String,
    },
    /// Reproduce a named figure's data (CSVs and manifest).
    Figure {
        /// Figure id, e.g. awma-vs-cwma.
        id: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
    },
    /// Validate a config and print the effective settings without running.
    ValidateConfig {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config key, e.g. `--set attack.p_a=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Debug, Args)]
struct Output {
    /// Output directory (default: $HUB_INTEGRITY_OUT, else ./results).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Clone, Copy)]
enum Failure {
    Usage = 1,
    Config = 2,
    Runtime = 3,
}

impl Failure {
    fn label(self) -> &'static str {
        match self {
            Failure::Usage => "usage",
            Failure::Config => "config",
            Failure::Runtime => "runtime",
        }
    }
}

type CliResult<T> = Result<T, (Failure, String)>;

fn config_err(e: Error) -> (Failure, String) {
    (Failure::Config, e.to_string())
}

fn classify(e: Error) -> (Failure, String) {
    let kind = if e.is_config_error() {
        Failure::Config
    } else {
        Failure::Runtime
    };
    (kind, e.to_string())
}

fn load(common: &Common) -> CliResult<ScenarioConfig> {
    let mut config =
        ScenarioConfig::load_with_overrides(common.config.as_deref(), &common.sets).map_err(config_err)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config.validate().map_err(config_err)?;
    Ok(config)
}

fn report(verbose: bool, paths: &[PathBuf]) {
    if verbose {
        for p in paths {
            println!("{}", p.display());
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { common, output } => {
            let config = load(&common)?;
            let runs = run_scenario(&config, Execution::with_jobs(output.jobs)).map_err(classify)?;
            let dir = output_dir(output.out.as_deref());
            let paths = write_replications(&dir, &config.name, &runs, config.n_devices).map_err(classify)?;
            report(cli.verbose, &paths);
        }
        Command::Sweep {
            common,
            output,
            axis,
            values,
        } => {
            let axis: SweepAxis = axis.parse().map_err(|e: Error| (Failure::Usage, e.to_string()))?;
            let values = parse_values(&values).map_err(|e| (Failure::Usage, e.to_string()))?;
            let config = load(&common)?;
            let rows = sweep(&config, axis, &values, Execution::with_jobs(output.jobs)).map_err(classify)?;
            let dir = output_dir(output.out.as_deref());
            let path = dir.join(format!("{}_sweep_{}.csv", config.name, axis.name()));
            write_file(&path, &sweep_csv(axis.name(), &rows)).map_err(classify)?;
            report(cli.verbose, &[path]);
        }
        Command::Figure { id, common, output } => {
            let id: FigureId = id.parse().map_err(|e: Error| (Failure::Usage, e.to_string()))?;
            let base = match &common.config {
                Some(path) => Some(ScenarioConfig::load(path).map_err(config_err)?),
                None => None,
            };
            let options = FigureOptions {
                base,
                seed: common.seed,
                sets: common.sets.clone(),
            };
            let dir = output_dir(output.out.as_deref());
            let written = reproduce_figure(id, &dir, &options, Execution::with_jobs(output.jobs)).map_err(classify)?;
            let mut paths = written.files;
            paths.push(written.manifest);
            report(cli.verbose, &paths);
        }
        Command::ValidateConfig { common } => {
            let config = load(&common)?;
            print!("{}", config.to_toml_string());
        }
    }
    Ok(())
}

fn one_line(msg: &str) -> String {
    msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" | ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("error[usage]: {}", one_line(&e.kind().to_string()));
            let _ = e.print();
            return ExitCode::from(Failure::Usage as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((kind, msg)) => {
            eprintln!("error[{}]: {}", kind.label(), one_line(&msg));
            ExitCode::from(kind as u8)
        }
    }
}

