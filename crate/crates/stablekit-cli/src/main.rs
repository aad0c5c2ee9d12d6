mod cli;
mod commands;
mod input;
mod output;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use std::io::Write;
use std::process::ExitCode;

use cli::{Cli, Command};

const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Stability { .. } => "stability",
        Command::Homog { .. } => "homog",
        Command::Puiseux { .. } => "puiseux",
        Command::Regularity { .. } => "regularity",
        Command::Numerator { .. } => "numerator",
        Command::Integrability { .. } => "integrability",
        Command::Trace { .. } => "trace",
        Command::Horn { .. } => "horn",
        Command::Realize { .. } => "realize",
        Command::Full { .. } => "full",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    let out = match commands::run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    };

    let mut csv_to_stdout = None;
    if let Some((path, text)) = &out.csv {
        match path {
            Some(path) => {
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("error: writing {path}: {e}");
                    return ExitCode::from(EXIT_ERROR);
                }
            }
            None if !cli.json && !cli.pretty => csv_to_stdout = Some(text.clone()),
            None => {}
        }
    }

    let status = if out.failure.is_some() {
        "failed"
    } else if out.inconclusive {
        "inconclusive"
    } else {
        "ok"
    };
    let mut report = json!({
        "tool": "stablekit",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "input": out.input,
        "config": out.config,
        "result": out.result,
        "status": status,
    });
    if cli.timings {
        report["timings"] = json!(out.timings.iter().map(|(k, t)| json!({ "stage": k, "seconds": t })).collect::<Vec<_>>());
    }
    let text = match csv_to_stdout {
        Some(text) => text,
        None if cli.pretty => output::pretty(&report),
        None => output::canonical(&report) + "\n",
    };
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        // a closed pipe (`| head`) is not an error of ours
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing output: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }

    if let Some(f) = out.failure {
        eprintln!("error: {f}");
        ExitCode::from(EXIT_ERROR)
    } else if out.inconclusive {
        ExitCode::from(EXIT_INCONCLUSIVE)
    } else {
        ExitCode::SUCCESS
    }
}
