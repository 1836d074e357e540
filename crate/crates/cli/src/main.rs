mod args;
mod commands;
mod config;
mod error;
mod report;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{CommandFactory, Parser};

use args::{Cli, Command, Format};
use config::RunConfig;
use error::CliError;

fn write_output(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    if let Command::Schema = cli.command {
        let text = serde_json::to_string_pretty(&commands::schema())? + "\n";
        write_output(&cfg, &text)?;
        return Ok(true);
    }
    let mut report = commands::run(&cli.command, &cfg)?;
    if cfg.timestamp {
        report.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    report.param("tol", cfg.rel_tol);
    report.param("nodes", cfg.nodes);
    let text = match cfg.format {
        Format::Csv => report.to_csv(),
        Format::Json => serde_json::to_string_pretty(&report.to_json())? + "\n",
    };
    write_output(&cfg, &text)?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:e} (tol {:e})", c.name, c.value, c.tol);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("infometric {}: {e}", cli.command.name());
            if let CliError::Usage(_) = e {
                eprintln!("{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
