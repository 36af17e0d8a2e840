use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COLDID_LOG", "warn")).init();
    ExitCode::from(cold_cli::run(cold_cli::args::Cli::parse()))
}
