//! `psub`: photon-subtraction entanglement concentration from the command line.
//!
//! Exit status: 0 on success, 2 for bad flags or out-of-domain values, 1 for
//! I/O failures and internal inconsistencies (including a failed `verify`).

// `!(x <= y)` is used on purpose: it also catches NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{dispatch, Io};

fn main() -> ExitCode {
    // clap exits with 2 on parse errors and 0 for --help/--version.
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let result = dispatch(
        cli,
        &mut Io {
            out: &mut out,
            err: &mut err,
        },
    );
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
