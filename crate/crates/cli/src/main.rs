use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args = torsolv::cli::Cli::parse();
    match torsolv::cli::run(&args) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
