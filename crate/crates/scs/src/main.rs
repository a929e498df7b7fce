use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    scs::cli::run(scs::cli::Cli::parse())
}
