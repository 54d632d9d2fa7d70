use std::process::ExitCode;

use clap::Parser;

use gumbel_cli::cli::Cli;
use gumbel_cli::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
