use clap::{Parser, Subcommand};
use qfcsim_cli::scenarios::{run_scenario, run_sweep};
use qfcsim_cli::{CliResult, Config};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "qfcsim",
    version,
    about = "Trapped-ion single-photon source and frequency-conversion simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario and write its artifacts.
    Run {
        /// One of: fig2-efficiency, fig3-tuning, fig4-unconverted,
        /// fig4-converted, budget-range, pump-optimize, custom.
        scenario: String,
        /// Parameter file (flat dotted-key JSON); defaults apply if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed; all randomness derives from it.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override the scenario's measurement time (seconds).
        #[arg(long)]
        duration: Option<f64>,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a config file and echo the full normalized parameter set.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep one parameter over a linear grid, writing derived quantities.
    Sweep {
        /// Config key to vary (e.g. qfc.pump_mw).
        param: String,
        from: f64,
        to: f64,
        steps: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(config: &Option<PathBuf>) -> CliResult<Config> {
    match config {
        Some(path) => Config::from_file(path),
        None => Ok(Config::default()),
    }
}

fn real_main() -> CliResult<()> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            config,
            seed,
            duration,
            out,
        } => {
            let cfg = load(&config)?;
            run_scenario(&scenario, &cfg, seed, duration, &out)?;
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = Config::from_file(&config)?;
            println!("{}", cfg.echo_json());
            Ok(())
        }
        Command::Sweep {
            param,
            from,
            to,
            steps,
            config,
            out,
        } => {
            let cfg = load(&config)?;
            run_sweep(&param, from, to, steps, &cfg, &out)?;
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
