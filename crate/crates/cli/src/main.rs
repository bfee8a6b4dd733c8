// SPDX-License-Identifier: MIT OR Apache-2.0

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    msbz_cli::main_with(msbz_cli::Cli::parse())
}
