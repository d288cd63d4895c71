use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drivesim::{
    cmd_compare, cmd_fleet, cmd_simulate, cmd_size, FleetReport, FleetRun, Overrides, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "drivesim",
    version,
    about = "Drive-cycle inverter and motor loss studies and fleet statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, replacing the configured one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Specific battery cost in €/kWh.
    #[arg(long, global = true)]
    battery_price: Option<f64>,

    /// Driving ranges in km.
    #[arg(long, global = true, value_delimiter = ',')]
    ranges: Option<Vec<f64>>,

    /// Seed recorded with Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Cycle losses per topology.
    Simulate,
    /// Chip-area sizing of every topology.
    Size,
    /// Energy and battery-cost comparison against the SiC two-level bridge.
    Compare,
    /// Correlation, cohort and quartile reports of a fleet dataset.
    Fleet {
        /// Fleet CSV, replacing the configured one.
        #[arg(long)]
        dataset: Option<PathBuf>,

        /// Reports to produce.
        #[arg(long, value_delimiter = ',', default_value = "corr,cohorts,quartiles")]
        report: Vec<FleetReport>,
    },
}

fn run(cli: Cli) -> drivesim::Result<Vec<PathBuf>> {
    let overrides = Overrides {
        output_dir: cli.out,
        battery_price: cli.battery_price,
        ranges: cli.ranges,
        seed: cli.seed,
    };
    let need_config = || {
        cli.config
            .clone()
            .ok_or_else(|| drivesim::Error::config("", "--config is required for this command"))
    };
    match cli.command {
        Command::Simulate => cmd_simulate(RunConfig::load(need_config()?, overrides)?),
        Command::Size => cmd_size(RunConfig::load(need_config()?, overrides)?),
        Command::Compare => cmd_compare(RunConfig::load(need_config()?, overrides)?),
        Command::Fleet { dataset, report } => {
            let run = match &cli.config {
                Some(p) => FleetRun::load(p, overrides)?,
                None => FleetRun::standalone(overrides),
            };
            let mut report = report;
            report.sort();
            report.dedup();
            cmd_fleet(run, dataset.as_deref(), &report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
