use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = efjsp_cli::Cli::parse();
    match efjsp_cli::execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
