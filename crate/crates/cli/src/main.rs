use std::process::ExitCode;

use clap::Parser;
use ctxent::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match ctxent::commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
