mod args;
mod commands;
mod config;
mod errors;
mod manifest;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::errors::{CliError, CliResult};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!(
            "{}",
            serde_json::json!({ "category": e.category.name(), "message": e.message })
        );
        std::process::exit(e.category.exit_code());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads(&cli.command)?;
    match cli.command {
        Command::Ingest(a) => commands::cmd_ingest(a),
        Command::Resample(a) => commands::cmd_resample(a),
        Command::Mfdfa(a) => commands::cmd_mfdfa(a),
        Command::Rolling(a) => commands::cmd_rolling(a),
        Command::Illiq(a) => commands::cmd_illiq(a),
        Command::Synth(a) => commands::cmd_synth(a),
        Command::Align(a) => commands::cmd_align(a),
    }
}

fn init_threads(command: &Command) -> CliResult<()> {
    let threads = match command {
        Command::Ingest(a) => a.common.threads,
        Command::Resample(a) => a.common.threads,
        Command::Mfdfa(a) => a.common.threads,
        Command::Rolling(a) => a.common.threads,
        Command::Illiq(a) => a.common.threads,
        Command::Synth(a) => a.common.threads,
        Command::Align(a) => a.common.threads,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}
