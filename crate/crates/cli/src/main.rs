use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vlc_agc_cli::commands::{
    cmd_ber, cmd_dynamic_range, cmd_gmax_sweep, cmd_loop_step, cmd_mobile, cmd_snr_curves,
    CommandContext,
};
use vlc_agc_cli::config::RunConfig;

const EXIT_RUNTIME_ERROR: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;

/// Simulator of a mobile visible-light link with automatic gain control.
#[derive(Parser)]
#[command(name = "vlc-agc-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (TOML; an empty file selects all defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV files and reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium-state output SNR curves over the AGC index.
    SnrCurves,
    /// Output SNR across a channel-gain grid for each maximum VGA gain.
    GmaxSweep,
    /// Equilibrium thresholds, dynamic ranges and channel inversions.
    DynamicRange,
    /// Monte Carlo OOK bit-error-rate curve.
    Ber,
    /// Feedback-loop step response and time-constant fit.
    LoopStep,
    /// Mobile rail run with windowed BER.
    Mobile,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let config = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let config = match config {
        Ok(config) => config,
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };

    let ctx = CommandContext::new(config, cli.seed, &cli.out);
    let outcome = match cli.command {
        Command::SnrCurves => cmd_snr_curves(&ctx).map(|p| vec![p]),
        Command::GmaxSweep => cmd_gmax_sweep(&ctx).map(|p| vec![p]),
        Command::DynamicRange => cmd_dynamic_range(&ctx).map(|(path, text)| {
            print!("{text}");
            vec![path]
        }),
        Command::Ber => cmd_ber(&ctx).map(|p| vec![p]),
        Command::LoopStep => cmd_loop_step(&ctx).map(|p| vec![p]),
        Command::Mobile => cmd_mobile(&ctx).map(|p| vec![p]),
    };

    match outcome {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_RUNTIME_ERROR)
        }
    }
}
