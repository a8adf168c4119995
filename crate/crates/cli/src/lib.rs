//! Command-line front end: one subcommand per invocation, one report out.
//!
//! Exit codes: 0 success, 2 usage error, 3 domain or evaluation error,
//! 4 inconclusive classification.

pub mod args;
pub mod commands;
pub mod render;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

use args::Cli;
use commands::{execute, CliError, Status};
use luroth_dim::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Core(Error::Syntax { .. } | Error::UnknownIdentifier { .. }) => EXIT_USAGE,
        CliError::Core(Error::Inconclusive(_)) => EXIT_INCONCLUSIVE,
        CliError::Core(_) => EXIT_DOMAIN,
    }
}

fn error_value(e: &CliError) -> Value {
    match e {
        CliError::Usage(msg) => json!({"kind": "usage", "message": msg}),
        CliError::Core(err) => {
            let mut v = json!({"kind": err.kind(), "message": err.to_string()});
            if let Some(off) = err.offset() {
                v["offset"] = json!(off);
            }
            v
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let workers = cli
        .workers
        .map(|w| w as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let config = json!({
        "argv": argv.iter().skip(1).map(|a| a.to_string_lossy()).collect::<Vec<_>>(),
        "format": cli.format,
        "output": cli.output,
        "workers": workers,
        "command": cli.command,
    });

    let (code, doc, table) = match execute(&cli.command, workers) {
        Ok(out) => {
            let (code, status) = match out.status {
                Status::Ok => (EXIT_OK, "ok"),
                Status::Inconclusive => (EXIT_INCONCLUSIVE, "inconclusive"),
            };
            let doc = json!({
                "tool": "luroth-dim",
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "status": status,
                "result": out.result,
            });
            (code, doc, out.table)
        }
        Err(e) => {
            let err = error_value(&e);
            eprintln!("error: {}", err["message"].as_str().unwrap_or_default());
            let doc = json!({
                "tool": "luroth-dim",
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "status": "error",
                "result": null,
                "error": err,
            });
            (exit_code(&e), doc, None)
        }
    };

    let text = render::render(&doc, table.as_ref(), cli.format);
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return EXIT_DOMAIN;
    }
    code
}
