//! Command-line front end and HTTP API over `fivenum-skew`.

pub mod api;
pub mod args;
pub mod commands;
pub mod service;

use std::process::ExitCode;

use fivenum_skew::Error;

use args::{Cli, Command};

/// Exit status for an error: 1 for failures on valid input, 2 for bad input.
pub fn exit_status(err: &Error) -> u8 {
    match err {
        Error::DegenerateRange(_) | Error::Io(_) | Error::NoStudies => 1,
        _ => 2,
    }
}

/// Runs one parsed command, writing its output to `out`.
pub fn execute(cli: &Cli, out: &mut impl std::io::Write) -> Result<(), Error> {
    let f = cli.format;
    match &cli.command {
        Command::Test(a) => commands::test(a, f, out),
        Command::Estimate(a) => commands::estimate(a, f, out),
        Command::Meta(a) => commands::meta(a, f, out),
        Command::Critval(a) => commands::critval(a, f, out),
        Command::Table(a) => commands::table(a, f, out),
        Command::Density(a) => commands::density(a, f, out),
        Command::Simulate(a) => commands::simulate(a, f, out),
        Command::Serve(a) => {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(api::serve(&a.bind, a.port, a.cors_origin.as_deref()))
        }
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let mut buf = Vec::new();
    let result = execute(&cli, &mut buf);
    if let Err(e) = commands::emit(&buf) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}
