use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deco_cli::presets::{expand, run_plan, Preset};
use deco_cli::{compare, output_root, run_to_dir, sweep_dogd, ConfigSource};
use deco_core::{Error, ErrorClass, Result};

/// Decentralized coin-betting simulations.
#[derive(Parser)]
#[command(name = "deco", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Start from the small profile (T=300, N=10).
    #[arg(long)]
    quick: bool,
    /// Output directory (default: a name under $DECO_OUTPUT_ROOT).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn source(&self) -> ConfigSource {
        ConfigSource {
            file: self.config.clone(),
            overrides: self.overrides.clone(),
            quick: self.quick,
        }
    }

    fn out_dir(&self, default_name: &str) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| output_root().join(default_name))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write metrics.csv and meta.
    Run(Common),
    /// Sweep DOGD's base learning rate over a grid.
    SweepDogd {
        #[command(flatten)]
        common: Common,
        /// Comma-separated eta0 values.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
    },
    /// Run several configs with a shared horizon and seed and summarize them.
    Compare {
        /// Config files; `--set` and `--quick` apply to each.
        #[arg(num_args = 2.., required = true)]
        configs: Vec<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named experiment preset.
    Preset {
        /// sensitivity, connectivity, gossip-tradeoff or real-data.
        name: String,
        #[command(flatten)]
        common: Common,
        /// Number of seeds per setting, starting at the configured seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
    },
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(common) => {
            let cfg = common.source().resolve()?;
            let dir = common.out_dir(&format!("run-{}-seed{}", cfg.learner.name(), cfg.seed));
            let r = run_to_dir(&cfg, &dir)?;
            println!(
                "{}: cumulative network loss {:.6} over {} rounds",
                dir.display(),
                r.cumulative_network_loss(),
                r.horizon()
            );
        }
        Command::SweepDogd { common, grid } => {
            let cfg = common.source().resolve()?;
            let dir = common.out_dir("sweep-dogd");
            for (eta0, loss) in sweep_dogd(&cfg, &grid, &dir)? {
                println!("eta0 {eta0:e}: cumulative network loss {loss:.6}");
            }
        }
        Command::Compare {
            configs,
            overrides,
            quick,
            out,
        } => {
            let mut labelled = Vec::with_capacity(configs.len());
            for (i, path) in configs.iter().enumerate() {
                let source = ConfigSource {
                    file: Some(path.clone()),
                    overrides: overrides.clone(),
                    quick,
                };
                labelled.push((format!("run-{i}"), source.resolve()?));
            }
            let dir = out.unwrap_or_else(|| output_root().join("compare"));
            for row in compare(&labelled, &dir)? {
                println!(
                    "{}: cumulative network loss {:.6}",
                    row.label, row.cum_network_loss
                );
            }
        }
        Command::Preset {
            name,
            common,
            seeds,
        } => {
            let preset: Preset = name.parse()?;
            let base = common.source().resolve()?;
            let plan = expand(preset, &base, seeds)?;
            let dir = common.out_dir(&preset.to_string());
            for (group, m) in run_plan(&plan, &dir)? {
                println!("{group}: median cumulative network loss {m:.6}");
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 1,
        ErrorClass::Invariant => 2,
        ErrorClass::Io => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
