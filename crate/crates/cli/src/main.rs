mod app;
mod cli;
mod input;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use app::{AppResult, Failure};
use cli::{Cli, Command};

/// Caps rayon's worker count from `ASSAYQC_THREADS`.
fn configure_threads() -> AppResult<()> {
    let Ok(raw) = std::env::var("ASSAYQC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure {
            code: 2,
            message: format!("ASSAYQC_THREADS must be a positive integer, got '{raw}'"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure {
            code: 3,
            message: format!("configuring worker threads: {e}"),
        })
}

fn emit(text: &str) -> AppResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| Failure {
            code: 2,
            message: format!("writing to stdout: {e}"),
        })
}

fn run(cli: Cli) -> AppResult<()> {
    configure_threads()?;
    if let Command::Replay { manifest } = &cli.command {
        let report = app::replay(manifest, cli.global.out_dir.as_deref())?;
        emit(&output::to_json(&report)?)?;
        if !report.reproduced {
            return Err(Failure {
                code: 3,
                message: "replay did not reproduce the recorded outputs".into(),
            });
        }
        return Ok(());
    }

    let inv = app::resolve(&cli.command, &cli.global)?;
    let artifacts = app::execute(&inv)?;
    // Simulations always produce files; other commands print to stdout
    // unless an output directory is given.
    let out_dir = match (&inv, &cli.global.out_dir) {
        (_, Some(dir)) => Some(dir.clone()),
        (app::Invocation::Simulate { .. }, None) => Some(".".into()),
        _ => None,
    };
    match out_dir {
        Some(dir) => {
            let written = app::write_outputs(&inv, &artifacts, &dir)?;
            let paths: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
            emit(&output::to_json(&paths)?)?;
            eprintln!("wrote {} files to {}", paths.len(), dir.display());
        }
        None => {
            for a in &artifacts {
                emit(&a.content)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
