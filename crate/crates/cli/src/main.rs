use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    fivenum_cli::run(fivenum_cli::args::Cli::parse())
}
