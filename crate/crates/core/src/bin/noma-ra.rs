use std::process::ExitCode;

use clap::Parser;
use noma_ra::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    match cli::run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("noma-ra: {e}");
            ExitCode::from(cli::exit_code(&e))
        }
    }
}
