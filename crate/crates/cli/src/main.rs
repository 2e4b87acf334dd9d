//! `twufp`: generate, solve, verify and benchmark twUFP instances.
//!
//! Exit status: 0 success, 1 infeasible schedule or failed verification,
//! 2 usage or input error, 3 oracle limits exceeded.

mod args;
mod bench;
mod commands;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{BenchArgs, Cli, Command};
use bench::{render_table, rows_jsonl, run_bench, BenchConfig};
use commands::{cmd_gen, cmd_reduce, cmd_solve, cmd_verify, emit, read};
use error::CliError;

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let text = read(&a.config)?;
    let config: BenchConfig = if text.trim().is_empty() {
        BenchConfig::default()
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed bench config: {e}")))?
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = pool.install(|| run_bench(&config))?;
    print!("{}", render_table(&rows));
    if let Some(path) = &a.output {
        emit(Some(path), &rows_jsonl(&rows))?;
    }
    let violations = rows.iter().filter(|r| r.within_bound == Some(false)).count();
    if violations > 0 {
        return Err(CliError::Infeasible(format!("{violations} approx rows exceed the ratio bound")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Reduce(a) => cmd_reduce(&a.direction),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twufp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
