use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use rpcircle_cli::{run, Cli, CliError, CliResult, Command, Outcome};

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(cli: &Cli, outcome: &Outcome) -> CliResult<()> {
    let csv_path = match &cli.command {
        Command::CheckFunction(a) => a.csv.as_deref(),
        Command::Kms(a) => a.csv.as_deref(),
        _ => None,
    };
    if let (Some(path), Some(text)) = (csv_path, &outcome.csv) {
        write_file(path, text)?;
    }
    if let (Command::Fit(a), Some(measure)) = (&cli.command, &outcome.measure) {
        if let Some(path) = &a.measure_out {
            let mut text = serde_json::to_string_pretty(measure).expect("measure serializes");
            text.push('\n');
            write_file(path, &text)?;
        }
    }
    let json = outcome.report.to_json();
    match &cli.out {
        Some(path) => write_file(path, &json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { rpcircle_cli::EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = run(&cli).and_then(|outcome| {
        emit(&cli, &outcome)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for d in &outcome.diagnostics {
                eprintln!("{d}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
