use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod error;
mod format;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = config::Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("magdde: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
