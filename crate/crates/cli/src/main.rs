mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, Failure};

fn jobs(flag: Option<usize>) -> Result<usize, Failure> {
    match std::env::var("WICKFLOW_JOBS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Validation(format!("WICKFLOW_JOBS must be a non-negative integer (got '{v}')"))),
        _ => Ok(flag.unwrap_or(0)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = jobs(cli.jobs).and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Compute(format!("worker pool: {e}")))?;
        pool.install(|| commands::run(&cli))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
