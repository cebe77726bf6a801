use std::process::ExitCode;

use clap::Parser;
use selfsim::cli::{exit_code, run, Cli, Outcome};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::OracleFailure(worst)) => {
            eprintln!("oracle failure: {worst}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
