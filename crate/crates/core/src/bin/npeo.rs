use std::process::ExitCode;

use clap::Parser;
use npeo::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("npeo: {e}");
            ExitCode::FAILURE
        }
    }
}
