//! evmforge: batch forensics over video clips via Eulerian magnification.
//!
//! Exit codes: 0 on success, 1 when at least one clip failed (the rest of
//! the batch still completes), 2 on configuration errors. Set EVMFORGE_LOG
//! (error/warn/info/debug/trace) to control diagnostics on stderr.

mod args;
mod cmd;
mod emit;
mod manifest;
mod run;

use std::process::ExitCode;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "evmforge",
    version,
    about = "Amplify, measure and classify subtle temporal variation in video clips"
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(clap::Subcommand)]
enum Commands {
    /// Generate a synthetic fixture clip.
    Synth(cmd::SynthCmd),
    /// Magnify band-limited temporal variation in each manifest clip.
    Magnify(cmd::MagnifyCmd),
    /// Adjacent-frame SSIM series for each clip, as received.
    Ssim(cmd::SsimCmd),
    /// SSIM series and summary features for original and magnified tracks.
    Features(cmd::FeaturesCmd),
    /// Estimate pulse rate per clip from periodic color variation.
    Pulse(cmd::PulseCmd),
    /// Train classifiers on a features table and score the TEST split.
    Train(cmd::TrainCmd),
    /// Score a saved model on a features table.
    Eval(cmd::EvalCmd),
    /// Render clips at several amplification factors and summarize SSIM.
    Sweep(cmd::SweepCmd),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EVMFORGE_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    let outcome = match &cli.command {
        Commands::Synth(c) => c.run(),
        Commands::Magnify(c) => c.run(),
        Commands::Ssim(c) => c.run(),
        Commands::Features(c) => c.run(),
        Commands::Pulse(c) => c.run(),
        Commands::Train(c) => c.run(),
        Commands::Eval(c) => c.run(),
        Commands::Sweep(c) => c.run(),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            log::error!("{failed} clip(s) failed");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
