mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    /// Inconsistent flags or config; exit 2 like clap's own usage errors.
    Usage(String),
    Run(sleepsig::Error),
}

impl From<sleepsig::Error> for CliError {
    fn from(e: sleepsig::Error) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Run(e) => (e.kind(), e.to_string()),
        };
        serde_json::json!({ "error": kind, "message": message })
    }
}

fn init_logging() {
    let env = env_logger::Env::new()
        .filter_or("SLEEPSIG_LOG", "info")
        .write_style("SLEEPSIG_LOG_STYLE");
    env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .format_target(false)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    let result = match cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Synth(a) => commands::synth(a),
        Command::Train(a) => commands::train(a),
        Command::MaskSweep(a) => commands::mask_sweep(a),
        Command::SeparateSweep(a) => commands::separate_sweep(a),
        Command::BaselineClassical(a) => commands::baseline_classical(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
