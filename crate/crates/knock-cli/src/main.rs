//! `knock`: knock-intensity extraction, distribution fitting with calibrated
//! acceptance, and stochastic spark-control simulation.
//!
//! Exit codes: 0 success, 2 usage, 3 malformed input (file/format), 4
//! numeric failure (domain, precondition, degeneracy). Errors print one
//! machine-parseable line: `knock: [FORMAT|NUMERIC] <message>`.

mod commands;
mod opts;

use clap::Parser;

use knock_core::Error;

#[derive(Parser)]
#[command(
    name = "knock",
    version,
    about = "Knock-intensity statistics and stochastic spark-control toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: opts::Command,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = commands::run(cli.command) {
        let class = match &err {
            Error::Format(_) | Error::Io(_) | Error::Json(_) => "FORMAT",
            _ => "NUMERIC",
        };
        eprintln!("knock: [{class}] {err}");
        std::process::exit(match class {
            "FORMAT" => 3,
            _ => 4,
        });
    }
}
