mod args;
mod commands;
mod input;
mod output;
mod signal_config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(run_args) => commands::run(run_args),
        Command::Generate(generate_args) => commands::generate(generate_args),
        Command::VerifyIdentities { max_order } => commands::verify_identities(*max_order),
        Command::OracleCheck(oracle_args) => commands::oracle_check(oracle_args),
        Command::VarianceCheck(variance_args) => commands::variance_check(variance_args),
        Command::ExtractCoeffs(extract_args) => commands::extract_coeffs(extract_args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
