use std::process::ExitCode;

use clap::Parser;
use maxcorr_privacy::cli::{run, Cli, INPUT_ERROR_EXIT};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR_EXIT as u8)
        }
    }
}
