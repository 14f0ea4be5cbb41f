//! `crf-atlas`: train, search, fit, calibrate and benchmark camera response
//! models from the command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 runtime or numeric failure.

mod args;
mod assets;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{Settings, UsageError};

const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match (cli.global.quiet, cli.global.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let settings = Settings::load(&cli.global)?;
    if let Some(workers) = settings.workers {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()?;
    }
    match cli.command {
        Command::Train(a) => commands::train::run(&settings, a),
        Command::Nas(a) => commands::nas::run(&settings, a),
        Command::Fit(a) => commands::fit::run(&settings, a),
        Command::Calibrate(a) => commands::calibrate::run(&settings, a),
        Command::Bench(a) => commands::bench::run(&settings, a),
        Command::Synth(a) => commands::util::synth(&settings, a),
        Command::Surrogate(a) => commands::util::surrogate(&settings, a),
        Command::Basis(a) => commands::util::basis(&settings, a),
    }
}
